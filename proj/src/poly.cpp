// SPDX-License-Identifier: MIT
#include "alfeld/poly.hpp"

#include "alfeld/errors.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace alfeld {

// ---------------------------------------------------------------------------
// Multi-indices

MultiIndexSet::MultiIndexSet(int nvars, int degree) : nvars_(nvars), degree_(degree)
{
  size_ = static_cast<int>(binomial(degree + nvars - 1, nvars - 1));
  alphas_.reserve(static_cast<std::size_t>(size_) * nvars);
  std::vector<int> cur(nvars, 0);
  // Descending lexicographic enumeration of compositions of `degree`.
  std::function<void(int, int)> rec = [&](int j, int rest) {
    if (j == nvars - 1) {
      cur[j] = rest;
      alphas_.insert(alphas_.end(), cur.begin(), cur.end());
      return;
    }
    for (int v = rest; v >= 0; --v) {
      cur[j] = v;
      rec(j + 1, rest - v);
    }
  };
  rec(0, degree);
  multinomial_.resize(size_);
  for (int idx = 0; idx < size_; ++idx) {
    double r = factorial(degree);
    for (int j = 0; j < nvars; ++j)
      r /= factorial((*this)[idx][j]);
    multinomial_[idx] = r;
  }
}

const MultiIndexSet& MultiIndexSet::get(int nvars, int degree)
{
  if (nvars < 1 || degree < 0)
    throw DomainError("MultiIndexSet: need nvars >= 1 and degree >= 0");
  static std::mutex mtx;
  static std::map<std::pair<int, int>, std::unique_ptr<MultiIndexSet>> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto& slot = cache[{nvars, degree}];
  if (!slot)
    slot.reset(new MultiIndexSet(nvars, degree));
  return *slot;
}

int MultiIndexSet::index(const int* alpha) const
{
  int m = degree_;
  int r = 0;
  for (int j = 0; j < nvars_; ++j)
    if (alpha[j] < 0)
      return -1;
  for (int j = 0; j < nvars_ - 1; ++j) {
    const int rest = nvars_ - 1 - j;
    if (alpha[j] > m)
      return -1;
    // compositions of m with a larger j-th entry come first
    r += static_cast<int>(binomial(m - alpha[j] - 1 + rest, rest));
    m -= alpha[j];
  }
  return alpha[nvars_ - 1] == m ? r : -1;
}

// ---------------------------------------------------------------------------
// Bernstein polynomials

BPoly BPoly::zero(int nvars, int degree)
{
  return {nvars, degree, Eigen::VectorXd::Zero(MultiIndexSet::get(nvars, degree).size())};
}

BPoly BPoly::constant(int nvars, int degree, double value)
{
  return {nvars, degree, Eigen::VectorXd::Constant(MultiIndexSet::get(nvars, degree).size(), value)};
}

BPoly BPoly::linear(const Eigen::VectorXd& a)
{
  const int n = static_cast<int>(a.size());
  BPoly p = zero(n, 1);
  const auto& mi = MultiIndexSet::get(n, 1);
  for (int idx = 0; idx < mi.size(); ++idx)
    for (int j = 0; j < n; ++j)
      if (mi[idx][j] == 1)
        p.c(idx) = a(j);
  return p;
}

BPoly BPoly::basis(int nvars, int degree, int idx)
{
  BPoly p = zero(nvars, degree);
  p.c(idx) = 1.0;
  return p;
}

Eigen::VectorXd bernstein_values(int nvars, int degree, const Eigen::VectorXd& mu)
{
  const auto& mi = MultiIndexSet::get(nvars, degree);
  Eigen::MatrixXd pw(nvars, degree + 1);
  for (int j = 0; j < nvars; ++j) {
    pw(j, 0) = 1.0;
    for (int e = 1; e <= degree; ++e)
      pw(j, e) = pw(j, e - 1) * mu(j);
  }
  Eigen::VectorXd b(mi.size());
  for (int idx = 0; idx < mi.size(); ++idx) {
    double r = mi.multinomial(idx);
    const int* a = mi[idx];
    for (int j = 0; j < nvars; ++j)
      r *= pw(j, a[j]);
    b(idx) = r;
  }
  return b;
}

double BPoly::operator()(const Eigen::VectorXd& mu) const { return bernstein_values(nvars, degree, mu).dot(c); }

BPoly& BPoly::operator+=(const BPoly& o)
{
  if (o.nvars != nvars || o.degree != degree)
    throw DomainError("BPoly: shape mismatch in addition");
  c += o.c;
  return *this;
}

BPoly operator+(const BPoly& p, const BPoly& q)
{
  BPoly r = p;
  r += q;
  return r;
}

BPoly operator*(const BPoly& p, const BPoly& q)
{
  if (p.nvars != q.nvars)
    throw DomainError("BPoly: variable count mismatch in product");
  const int n = p.nvars;
  const auto& mp = MultiIndexSet::get(n, p.degree);
  const auto& mq = MultiIndexSet::get(n, q.degree);
  const auto& mr = MultiIndexSet::get(n, p.degree + q.degree);
  BPoly r = BPoly::zero(n, p.degree + q.degree);
  const double denom = static_cast<double>(binomial(p.degree + q.degree, p.degree));
  std::vector<int> g(n);
  for (int a = 0; a < mp.size(); ++a) {
    if (p.c(a) == 0.0)
      continue;
    for (int b = 0; b < mq.size(); ++b) {
      if (q.c(b) == 0.0)
        continue;
      double f = 1.0;
      for (int j = 0; j < n; ++j) {
        g[j] = mp[a][j] + mq[b][j];
        f *= static_cast<double>(binomial(g[j], mp[a][j]));
      }
      r.c(mr.index(g.data())) += p.c(a) * q.c(b) * f / denom;
    }
  }
  return r;
}

BPoly elevate(const BPoly& p, int degree)
{
  if (degree < p.degree)
    throw DomainError("elevate: target degree below polynomial degree");
  if (degree == p.degree)
    return p;
  return p * BPoly::constant(p.nvars, degree - p.degree, 1.0);
}

BPoly power(const BPoly& p, int e)
{
  BPoly r = BPoly::constant(p.nvars, 0, 1.0);
  for (int m = 0; m < e; ++m)
    r = r * p;
  return r;
}

BPoly derivative(const BPoly& p, int j)
{
  if (p.degree == 0)
    return BPoly::zero(p.nvars, 0);
  const auto& lo = MultiIndexSet::get(p.nvars, p.degree - 1);
  const auto& hi = MultiIndexSet::get(p.nvars, p.degree);
  BPoly r = BPoly::zero(p.nvars, p.degree - 1);
  std::vector<int> a(p.nvars);
  for (int b = 0; b < lo.size(); ++b) {
    std::copy(lo[b], lo[b] + p.nvars, a.begin());
    ++a[j];
    r.c(b) = p.degree * p.c(hi.index(a.data()));
  }
  return r;
}

namespace {

// One de Casteljau step: coefficients of degree m -> m-1 at point u.
Eigen::VectorXd casteljau_step(int nvars, int m, const Eigen::VectorXd& c, const Eigen::VectorXd& u)
{
  const auto& lo = MultiIndexSet::get(nvars, m - 1);
  const auto& hi = MultiIndexSet::get(nvars, m);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(lo.size());
  std::vector<int> a(nvars);
  for (int b = 0; b < lo.size(); ++b) {
    std::copy(lo[b], lo[b] + nvars, a.begin());
    double s = 0;
    for (int j = 0; j < nvars; ++j) {
      if (u(j) == 0.0)
        continue;
      ++a[j];
      s += u(j) * c(hi.index(a.data()));
      --a[j];
    }
    r(b) = s;
  }
  return r;
}

} // namespace

BPoly substitute(const BPoly& p, const Eigen::MatrixXd& W)
{
  if (W.rows() != p.nvars)
    throw DomainError("substitute: W must have one row per variable");
  const int nn = static_cast<int>(W.cols());
  const int m = p.degree;
  const auto& out = MultiIndexSet::get(nn, m);
  BPoly r = BPoly::zero(nn, m);
  for (int g = 0; g < out.size(); ++g) {
    // blossom of p at (W_0^{g_0}, ..., W_{nn-1}^{g_{nn-1}})
    Eigen::VectorXd c = p.c;
    int level = m;
    for (int k = 0; k < nn; ++k)
      for (int t = 0; t < out[g][k]; ++t) {
        c = casteljau_step(p.nvars, level, c, W.col(k));
        --level;
      }
    r.c(g) = c(0);
  }
  return r;
}

BPoly embed(const BPoly& q, const std::vector<int>& pos, int nvars)
{
  const auto& mq = MultiIndexSet::get(q.nvars, q.degree);
  const auto& mr = MultiIndexSet::get(nvars, q.degree);
  BPoly r = BPoly::zero(nvars, q.degree);
  std::vector<int> a(nvars);
  for (int b = 0; b < mq.size(); ++b) {
    std::fill(a.begin(), a.end(), 0);
    bool vanish = false;
    for (int t = 0; t < q.nvars; ++t) {
      if (pos[t] < 0) {
        vanish |= mq[b][t] > 0;
        continue;
      }
      a[pos[t]] = mq[b][t];
    }
    if (!vanish)
      r.c(mr.index(a.data())) += q.c(b);
  }
  return r;
}

double integral(const BPoly& p, double volume)
{
  return volume * p.c.sum() / static_cast<double>(binomial(p.degree + p.nvars - 1, p.nvars - 1));
}

Eigen::MatrixXd bernstein_mass(int nvars, int m1, int m2, double volume)
{
  const auto& a = MultiIndexSet::get(nvars, m1);
  const auto& b = MultiIndexSet::get(nvars, m2);
  const double scale = volume / static_cast<double>(binomial(m1 + m2, m1)) /
                       static_cast<double>(binomial(m1 + m2 + nvars - 1, nvars - 1));
  Eigen::MatrixXd M(a.size(), b.size());
  for (int i = 0; i < a.size(); ++i)
    for (int j = 0; j < b.size(); ++j) {
      double f = scale;
      for (int t = 0; t < nvars; ++t)
        f *= static_cast<double>(binomial(a[i][t] + b[j][t], a[i][t]));
      M(i, j) = f;
    }
  return M;
}

BPoly bubble(const IndexSet& f)
{
  if (f.has_c())
    throw DomainError("bubble: f must be a subsimplex of T");
  const int d = f.ambient_dim();
  std::vector<int> a(d + 1, 0);
  for (int i : f)
    a[i] = 1;
  const auto& mi = MultiIndexSet::get(d + 1, f.size());
  BPoly p = BPoly::zero(d + 1, f.size());
  p.c(mi.index(a.data())) = 1.0 / factorial(f.size());
  return p;
}

// ---------------------------------------------------------------------------
// Quadrature

const QuadRule& quad_rule(int dim, int degree)
{
  if (dim < 0 || dim > 4)
    throw DomainError("quad_rule: dimension must lie in [0, 4]");
  if (degree < 0)
    throw DomainError("quad_rule: degree must be >= 0");
  static std::mutex mtx;
  static std::map<std::pair<int, int>, std::unique_ptr<QuadRule>> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto& slot = cache[{dim, degree}];
  if (slot)
    return *slot;
  auto rule = std::make_unique<QuadRule>();
  rule->dim = dim;
  if (dim == 0) {
    rule->degree = degree;
    rule->nodes = Eigen::MatrixXd::Ones(1, 1);
    rule->weights = Eigen::VectorXd::Ones(1);
    slot = std::move(rule);
    return *slot;
  }
  const int s = std::max(0, (degree - 1 + 1) / 2);
  const int D = 2 * s + 1;
  rule->degree = D;
  std::vector<Eigen::VectorXd> nodes;
  std::vector<double> w;
  for (int i = 0; i <= s; ++i) {
    const double den = D + dim - 2 * i;
    const double wi = (i % 2 ? -1.0 : 1.0) * std::pow(2.0, -2 * s) * std::pow(den, D) /
                      (factorial(i) * factorial(D + dim - i));
    const auto& mi = MultiIndexSet::get(dim + 1, s - i);
    for (int b = 0; b < mi.size(); ++b) {
      Eigen::VectorXd x(dim + 1);
      for (int j = 0; j <= dim; ++j)
        x(j) = (2.0 * mi[b][j] + 1.0) / den;
      nodes.push_back(x);
      w.push_back(wi);
    }
  }
  rule->nodes.resize(dim + 1, static_cast<Eigen::Index>(nodes.size()));
  rule->weights.resize(static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t q = 0; q < nodes.size(); ++q) {
    rule->nodes.col(q) = nodes[q];
    rule->weights(q) = w[q];
  }
  slot = std::move(rule);
  return *slot;
}

// ---------------------------------------------------------------------------
// Piecewise polynomials on the split

PwPoly& PwPoly::operator*=(double s)
{
  for (auto& p : piece)
    p *= s;
  return *this;
}

PwPoly& PwPoly::operator+=(const PwPoly& o)
{
  if (o.piece.size() != piece.size())
    throw DomainError("PwPoly: piece count mismatch");
  const int m = std::max(degree(), o.degree());
  for (std::size_t i = 0; i < piece.size(); ++i)
    piece[i] = elevate(piece[i], m) + elevate(o.piece[i], m);
  return *this;
}

PwPoly operator*(const PwPoly& p, const PwPoly& q)
{
  if (p.piece.size() != q.piece.size())
    throw DomainError("PwPoly: piece count mismatch");
  PwPoly r;
  for (std::size_t i = 0; i < p.piece.size(); ++i)
    r.piece.push_back(p.piece[i] * q.piece[i]);
  return r;
}

PwPoly operator+(const PwPoly& p, const PwPoly& q)
{
  PwPoly r = p;
  r += q;
  return r;
}

PwPoly operator*(double s, const PwPoly& p)
{
  PwPoly r = p;
  r *= s;
  return r;
}

PwPoly elevate(const PwPoly& p, int degree)
{
  PwPoly r;
  for (const auto& q : p.piece)
    r.piece.push_back(elevate(q, degree));
  return r;
}

PwPoly power(const PwPoly& p, int e)
{
  PwPoly r;
  for (const auto& q : p.piece)
    r.piece.push_back(power(q, e));
  return r;
}

SplitCell::SplitCell(const Eigen::MatrixXd& coarse_vertices) : geo_(geometry_pack(coarse_vertices))
{
  const int d = geo_.d;
  for (int i = 0; i <= d; ++i) {
    SubCell s;
    s.pos.assign(d + 2, -1);
    for (int l = 0; l <= d + 1; ++l)
      if (l != i) {
        s.pos[l] = static_cast<int>(s.labels.size());
        s.labels.push_back(l);
      }
    s.v = vertices(s.labels);
    const CellGeometry g = geometry_pack(s.v);
    s.grad = g.grad;
    s.volume = g.volume;
    sub_.push_back(std::move(s));
  }
}

Eigen::MatrixXd SplitCell::vertices(const std::vector<int>& labels) const
{
  Eigen::MatrixXd p(geo_.d, static_cast<Eigen::Index>(labels.size()));
  for (std::size_t m = 0; m < labels.size(); ++m)
    p.col(m) = geo_.vertex(labels[m]);
  return p;
}

Eigen::VectorXd SplitCell::sub_barycentric(int i, const Eigen::VectorXd& x) const
{
  const SubCell& s = sub_[i];
  Eigen::VectorXd mu(geo_.d + 1);
  const Eigen::VectorXd y = x - s.v.col(0);
  for (int k = 0; k <= geo_.d; ++k)
    mu(k) = s.grad.col(k).dot(y);
  mu(0) += 1.0;
  return mu;
}

std::pair<int, Eigen::VectorXd> SplitCell::locate(const Eigen::VectorXd& x) const
{
  Eigen::Index i;
  geo_.barycentric(x).minCoeff(&i);
  return {static_cast<int>(i), sub_barycentric(static_cast<int>(i), x)};
}

int SplitCell::first_subcell(const IndexSet& f) const
{
  for (int i = 0; i <= geo_.d; ++i)
    if (!f.contains(i))
      return i;
  throw DomainError("first_subcell: f is not contained in any subcell");
}

PwPoly SplitCell::constant(int degree, double value) const
{
  PwPoly r;
  for (int i = 0; i <= geo_.d; ++i)
    r.piece.push_back(BPoly::constant(geo_.d + 1, degree, value));
  return r;
}

PwPoly SplitCell::coarse_lambda(int j) const
{
  const int d = geo_.d;
  PwPoly r;
  for (int i = 0; i <= d; ++i) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(d + 1);
    a(sub_[i].pos[d + 1]) = 1.0 / (d + 1);
    if (j != i)
      a(sub_[i].pos[j]) += 1.0;
    r.piece.push_back(BPoly::linear(a));
  }
  return r;
}

PwPoly SplitCell::hat(int label) const
{
  const int d = geo_.d;
  if (label < 0 || label > d + 1)
    throw DomainError("hat: label out of range");
  PwPoly r;
  for (int i = 0; i <= d; ++i) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(d + 1);
    if (label != i)
      a(sub_[i].pos[label]) = 1.0;
    r.piece.push_back(BPoly::linear(a));
  }
  return r;
}

PwPoly SplitCell::from_coarse(const BPoly& p) const
{
  const int d = geo_.d;
  if (p.nvars != d + 1)
    throw DomainError("from_coarse: polynomial must live on T");
  PwPoly r;
  for (int i = 0; i <= d; ++i) {
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(d + 1, d + 1);
    for (int k = 0; k <= d; ++k) {
      const int l = sub_[i].labels[k];
      if (l == d + 1)
        W.col(k).setConstant(1.0 / (d + 1));
      else
        W(l, k) = 1.0;
    }
    r.piece.push_back(substitute(p, W));
  }
  return r;
}

PwPoly SplitCell::on_subcell(int i, const BPoly& p) const
{
  PwPoly r;
  for (int q = 0; q <= geo_.d; ++q)
    r.piece.push_back(q == i ? p : BPoly::zero(geo_.d + 1, p.degree));
  return r;
}

PwPoly SplitCell::bubble(const IndexSet& f) const { return from_coarse(alfeld::bubble(f)); }

PwPoly SplitCell::split_bubble(const IndexSet& f) const
{
  const int l1 = f.size();
  // product of the hats is B_{(1,..,1)} / (l+1)!
  BPoly one = BPoly::zero(l1, l1);
  std::vector<int> ones(l1, 1);
  one.c(MultiIndexSet::get(l1, l1).index(ones.data())) = 1.0 / factorial(l1);
  return split_extend(f, one);
}

PwPoly SplitCell::extend_face_poly(const IndexSet& f, const BPoly& q) const
{
  if (f.has_c())
    throw DomainError("extend_face_poly: f must be a subsimplex of T");
  if (q.nvars != f.size())
    throw DomainError("extend_face_poly: q must live on f");
  return from_coarse(embed(q, f.labels(), geo_.d + 1));
}

PwPoly SplitCell::split_extend(const IndexSet& f, const BPoly& q) const
{
  if (q.nvars != f.size())
    throw DomainError("split_extend: q must live on f");
  PwPoly r;
  for (int i = 0; i <= geo_.d; ++i) {
    std::vector<int> pos;
    for (int l : f)
      pos.push_back(sub_[i].pos[l]);
    r.piece.push_back(embed(q, pos, geo_.d + 1));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Tensor and vector fields

SymIndex::SymIndex(int dim) : d(dim), ns(dim * (dim + 1) / 2), s_of(dim, std::vector<int>(dim))
{
  for (int a = 0; a < d; ++a)
    for (int b = a; b < d; ++b) {
      s_of[a][b] = s_of[b][a] = static_cast<int>(ab.size());
      ab.push_back({a, b});
    }
}

Eigen::VectorXd SymIndex::pack(const Eigen::MatrixXd& m) const
{
  Eigen::VectorXd v(ns);
  for (int s = 0; s < ns; ++s)
    v(s) = 0.5 * (m(ab[s].first, ab[s].second) + m(ab[s].second, ab[s].first));
  return v;
}

Eigen::MatrixXd SymIndex::unpack(const Eigen::VectorXd& v) const
{
  Eigen::MatrixXd m(d, d);
  for (int s = 0; s < ns; ++s)
    m(ab[s].first, ab[s].second) = m(ab[s].second, ab[s].first) = v(s);
  return m;
}

Eigen::VectorXd SymIndex::functional(const Eigen::MatrixXd& W) const
{
  Eigen::VectorXd r(ns);
  for (int s = 0; s < ns; ++s) {
    const auto [a, b] = ab[s];
    r(s) = a == b ? W(a, a) : W(a, b) + W(b, a);
  }
  return r;
}

FieldSpace::FieldSpace(int d, int degree, int ncomp)
    : d_(d), m_(degree), ncomp_(ncomp), nalpha_(MultiIndexSet::get(d + 1, degree).size())
{
}

FieldSpace sym_space(int d, int degree) { return FieldSpace(d, degree, d * (d + 1) / 2); }
FieldSpace vec_space(int d, int degree) { return FieldSpace(d, degree, d); }

void add_sym(Eigen::Ref<Eigen::VectorXd> coef, const FieldSpace& fs, const PwPoly& p, const Eigen::MatrixXd& M,
             int piece)
{
  const SymIndex si(fs.dim());
  const Eigen::VectorXd mv = si.pack(M);
  for (int i = 0; i <= fs.dim(); ++i) {
    if (piece >= 0 && i != piece)
      continue;
    const BPoly q = elevate(p.piece[i], fs.degree());
    for (int s = 0; s < si.ns; ++s)
      if (mv(s) != 0.0)
        coef.segment(fs.offset(i, s), fs.nalpha()) += mv(s) * q.c;
  }
}

void add_sym_piecewise(Eigen::Ref<Eigen::VectorXd> coef, const FieldSpace& fs, const PwPoly& p,
                       const std::vector<Eigen::MatrixXd>& M)
{
  for (int i = 0; i <= fs.dim(); ++i)
    add_sym(coef, fs, p, M[i], i);
}

void add_vec(Eigen::Ref<Eigen::VectorXd> coef, const FieldSpace& fs, const PwPoly& p, const Eigen::VectorXd& w,
             int piece)
{
  for (int i = 0; i <= fs.dim(); ++i) {
    if (piece >= 0 && i != piece)
      continue;
    const BPoly q = elevate(p.piece[i], fs.degree());
    for (int a = 0; a < fs.ncomp(); ++a)
      if (w(a) != 0.0)
        coef.segment(fs.offset(i, a), fs.nalpha()) += w(a) * q.c;
  }
}

Eigen::MatrixXd elevate_field(const FieldSpace& from, const FieldSpace& to, const Eigen::MatrixXd& coef)
{
  if (from.ncomp() != to.ncomp() || from.dim() != to.dim() || to.degree() < from.degree())
    throw DomainError("elevate_field: incompatible layouts");
  if (to.degree() == from.degree())
    return coef;
  const int d = from.dim();
  // elevation is linear: build the Bernstein elevation matrix once
  Eigen::MatrixXd E(to.nalpha(), from.nalpha());
  for (int a = 0; a < from.nalpha(); ++a)
    E.col(a) = elevate(BPoly::basis(d + 1, from.degree(), a), to.degree()).c;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(to.size(), coef.cols());
  for (int i = 0; i <= d; ++i)
    for (int k = 0; k < from.ncomp(); ++k)
      out.middleRows(to.offset(i, k), to.nalpha()) = E * coef.middleRows(from.offset(i, k), from.nalpha());
  return out;
}

Eigen::MatrixXd div_matrix(const SplitCell& cell, const FieldSpace& sym)
{
  const int d = sym.dim();
  const int m = sym.degree();
  if (m < 1)
    return Eigen::MatrixXd::Zero(vec_space(d, 0).size(), sym.size());
  const FieldSpace vs = vec_space(d, m - 1);
  const SymIndex si(d);
  const auto& lo = MultiIndexSet::get(d + 1, m - 1);
  const auto& hi = MultiIndexSet::get(d + 1, m);
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(vs.size(), sym.size());
  std::vector<int> a(d + 1);
  for (int i = 0; i <= d; ++i) {
    const Eigen::MatrixXd& G = cell.sub(i).grad;
    for (int r = 0; r < d; ++r)
      for (int b = 0; b < d; ++b) {
        const int s = si.s_of[r][b];
        for (int beta = 0; beta < lo.size(); ++beta) {
          std::copy(lo[beta], lo[beta] + d + 1, a.begin());
          for (int j = 0; j <= d; ++j) {
            ++a[j];
            D(vs.offset(i, r) + beta, sym.offset(i, s) + hi.index(a.data())) += m * G(b, j);
            --a[j];
          }
        }
      }
  }
  return D;
}

Eigen::MatrixXd field_values(const FieldSpace& fs, const Eigen::MatrixXd& coef, int piece, const Eigen::VectorXd& mu)
{
  const Eigen::VectorXd B = bernstein_values(fs.dim() + 1, fs.degree(), mu);
  Eigen::MatrixXd out(fs.ncomp(), coef.cols());
  for (int k = 0; k < fs.ncomp(); ++k)
    out.row(k) = B.transpose() * coef.middleRows(fs.offset(piece, k), fs.nalpha());
  return out;
}

Eigen::RowVectorXd point_functional(const FieldSpace& fs, int piece, const Eigen::VectorXd& mu,
                                    const Eigen::VectorXd& w)
{
  const Eigen::VectorXd B = bernstein_values(fs.dim() + 1, fs.degree(), mu);
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(fs.size());
  for (int k = 0; k < fs.ncomp(); ++k)
    if (w(k) != 0.0)
      row.segment(fs.offset(piece, k), fs.nalpha()) = w(k) * B.transpose();
  return row;
}

Eigen::MatrixXd field_mass(const SplitCell& cell, const FieldSpace& fs, const Eigen::VectorXd& comp_weight)
{
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(fs.size(), fs.size());
  for (int i = 0; i <= fs.dim(); ++i) {
    const Eigen::MatrixXd Mb = bernstein_mass(fs.dim() + 1, fs.degree(), fs.degree(), cell.sub(i).volume);
    for (int k = 0; k < fs.ncomp(); ++k)
      M.block(fs.offset(i, k), fs.offset(i, k), fs.nalpha(), fs.nalpha()) = comp_weight(k) * Mb;
  }
  return M;
}

std::vector<QPoint> cell_points(const SplitCell& cell, int degree)
{
  const int d = cell.dim();
  const QuadRule& rule = quad_rule(d, degree);
  const double scale = factorial(d);
  std::vector<QPoint> pts;
  pts.reserve(static_cast<std::size_t>((d + 1) * rule.weights.size()));
  for (int i = 0; i <= d; ++i) {
    const SubCell& s = cell.sub(i);
    for (int q = 0; q < rule.weights.size(); ++q) {
      QPoint p;
      p.piece = i;
      p.mu = rule.nodes.col(q);
      p.nu = p.mu;
      p.x = s.v * p.mu;
      p.w = rule.weights(q) * scale * s.volume;
      pts.push_back(std::move(p));
    }
  }
  return pts;
}

std::vector<QPoint> entity_points(const SplitCell& cell, const std::vector<int>& labels, int piece, int degree)
{
  const int d = cell.dim();
  const int l = static_cast<int>(labels.size()) - 1;
  const SubCell& s = cell.sub(piece);
  for (int lab : labels)
    if (s.pos[lab] < 0)
      throw DomainError("entity_points: entity not contained in the subcell");
  const QuadRule& rule = quad_rule(l, degree);
  const Eigen::MatrixXd P = cell.vertices(labels);
  const double scale = factorial(l) * simplex_measure(P);
  std::vector<QPoint> pts;
  for (int q = 0; q < rule.weights.size(); ++q) {
    QPoint p;
    p.piece = piece;
    p.nu = rule.nodes.col(q);
    p.mu = Eigen::VectorXd::Zero(d + 1);
    for (int t = 0; t <= l; ++t)
      p.mu(s.pos[labels[t]]) = p.nu(t);
    p.x = P * p.nu;
    p.w = rule.weights(q) * scale;
    pts.push_back(std::move(p));
  }
  return pts;
}

int rm_dim(int d) { return d * (d + 1) / 2; }

Eigen::MatrixXd rm_values(const Eigen::VectorXd& x, const Eigen::VectorXd& center)
{
  const int d = static_cast<int>(x.size());
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(d, rm_dim(d));
  const Eigen::VectorXd y = x - center;
  int col = 0;
  for (int a = 0; a < d; ++a)
    R(a, col++) = 1.0;
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b) {
      R(a, col) = y(b);
      R(b, col) = -y(a);
      ++col;
    }
  return R;
}

Eigen::VectorXd l2_project_rm(const std::vector<QPoint>& pts, const Eigen::VectorXd& center,
                              const std::function<Eigen::VectorXd(const QPoint&)>& f)
{
  const int d = static_cast<int>(center.size());
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(rm_dim(d), rm_dim(d));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rm_dim(d));
  for (const auto& p : pts) {
    const Eigen::MatrixXd R = rm_values(p.x, center);
    G += p.w * R.transpose() * R;
    rhs += p.w * R.transpose() * f(p);
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
  if (ldlt.info() != Eigen::Success)
    throw NumericalError("l2_project_rm: singular Gram matrix");
  return ldlt.solve(rhs);
}

BPoly l2_project_poly(const SplitCell& cell, int m, const std::function<double(const QPoint&)>& f, int quad_degree)
{
  const int d = cell.dim();
  const int n = MultiIndexSet::get(d + 1, m).size();
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (const auto& p : cell_points(cell, quad_degree)) {
    const Eigen::VectorXd B = bernstein_values(d + 1, m, cell.geometry().barycentric(p.x));
    G += p.w * B * B.transpose();
    rhs += p.w * f(p) * B;
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
  if (ldlt.info() != Eigen::Success)
    throw NumericalError("l2_project_poly: singular Gram matrix");
  return {d + 1, m, ldlt.solve(rhs)};
}

} // namespace alfeld
