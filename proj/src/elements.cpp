// SPDX-License-Identifier: MIT
//
// Linear-algebra helpers, traces, div bubbles, Ext operators and the ND face
// space. The family-specific spans and DoFs live in families.cpp.
#include "alfeld/elements.hpp"

#include "alfeld/errors.hpp"

#include <cmath>

namespace alfeld {

namespace {

struct Svd {
  Eigen::VectorXd s;
  Eigen::MatrixXd U, V;
};

// BDCSVD loses accuracy (even returns NaN) on some matrices with clustered
// singular values; those fall back to one-sided Jacobi.
Svd svd(const Eigen::MatrixXd& A, unsigned int opts)
{
  Eigen::BDCSVD<Eigen::MatrixXd> b(A, opts);
  if (b.singularValues().allFinite() && (!(opts & Eigen::ComputeThinU) || b.matrixU().allFinite()) &&
      (!(opts & Eigen::ComputeFullV) || b.matrixV().allFinite()))
    return {b.singularValues(), opts & Eigen::ComputeThinU ? b.matrixU() : Eigen::MatrixXd(),
            opts & Eigen::ComputeFullV ? b.matrixV() : Eigen::MatrixXd()};
  Eigen::JacobiSVD<Eigen::MatrixXd, Eigen::ColPivHouseholderQRPreconditioner> j(A, opts);
  return {j.singularValues(), opts & Eigen::ComputeThinU ? j.matrixU() : Eigen::MatrixXd(),
          opts & Eigen::ComputeFullV ? j.matrixV() : Eigen::MatrixXd()};
}

int rank_of(const Eigen::VectorXd& s, double rtol)
{
  int r = 0;
  while (r < s.size() && s(0) > 1e-300 && s(r) > rtol * s(0))
    ++r;
  return r;
}

} // namespace

int numerical_rank(const Eigen::MatrixXd& A, double rtol)
{
  if (A.size() == 0)
    return 0;
  return rank_of(svd(A, 0).s, rtol);
}

Eigen::MatrixXd orth(const Eigen::MatrixXd& A, double rtol)
{
  if (A.cols() == 0)
    return Eigen::MatrixXd(A.rows(), 0);
  const Svd r = svd(A, Eigen::ComputeThinU);
  return r.U.leftCols(rank_of(r.s, rtol));
}

Eigen::MatrixXd null_space(const Eigen::MatrixXd& A, double rtol)
{
  const Eigen::Index n = A.cols();
  if (A.rows() == 0)
    return Eigen::MatrixXd::Identity(n, n);
  const Svd r = svd(A, Eigen::ComputeFullV);
  return r.V.rightCols(n - rank_of(r.s, rtol));
}

Eigen::MatrixXd sym_unit(int d, int s)
{
  const SymIndex si(d);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(si.ns);
  e(s) = 1.0;
  return si.unpack(e);
}

Eigen::MatrixXd sym_mass(const SplitCell& cell, const FieldSpace& fs)
{
  const SymIndex si(fs.dim());
  Eigen::VectorXd w(si.ns);
  for (int s = 0; s < si.ns; ++s)
    w(s) = si.weight(s);
  return field_mass(cell, fs, w);
}

namespace {

// Rows of tau n restricted to the face of subcell `piece` opposite local
// position q, for the normal n. Face multi-indices follow the remaining
// positions in increasing order.
void face_trace_rows(const FieldSpace& fs, int piece, int q, const Eigen::VectorXd& n, double sign,
                     Eigen::MatrixXd& out, int row0, const std::vector<int>* posmap = nullptr)
{
  const int d = fs.dim();
  const SymIndex si(d);
  const auto& face = MultiIndexSet::get(d, fs.degree());
  const auto& full = MultiIndexSet::get(d + 1, fs.degree());
  std::vector<int> a(d + 1);
  for (int beta = 0; beta < face.size(); ++beta) {
    if (posmap) {
      std::fill(a.begin(), a.end(), 0);
      for (int t = 0; t < d; ++t)
        a[(*posmap)[t]] = face[beta][t];
    } else {
      for (int t = 0, u = 0; t <= d; ++t)
        a[t] = t == q ? 0 : face[beta][u++];
    }
    const int col = full.index(a.data());
    for (int r = 0; r < d; ++r)
      for (int b = 0; b < d; ++b)
        out(row0 + r * face.size() + beta, fs.offset(piece, si.s_of[r][b]) + col) += sign * n(b);
  }
}

Eigen::VectorXd outward_normal(const SubCell& s, int q)
{
  Eigen::VectorXd g = s.grad.col(q);
  return -g / g.norm();
}

} // namespace

Eigen::MatrixXd boundary_trace_matrix(const SplitCell& cell, const FieldSpace& fs)
{
  const int d = fs.dim();
  const int nb = d * MultiIndexSet::get(d, fs.degree()).size();
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero((d + 1) * nb, fs.size());
  for (int p = 0; p <= d; ++p)
    face_trace_rows(fs, p, d, cell.geometry().normal.col(p), 1.0, T, p * nb);
  return T;
}

Eigen::VectorXd interior_normal(const SplitCell& cell, int i, int j)
{
  const SubCell& s = cell.sub(i);
  return outward_normal(s, s.pos[j]);
}

Eigen::MatrixXd interior_jump_matrix(const SplitCell& cell, const FieldSpace& fs)
{
  const int d = fs.dim();
  const int nb = d * MultiIndexSet::get(d, fs.degree()).size();
  const int nf = d * (d + 1) / 2;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(nf * nb, fs.size());
  int f = 0;
  for (int i = 0; i <= d; ++i)
    for (int j = i + 1; j <= d; ++j, ++f) {
      const Eigen::VectorXd n = interior_normal(cell, i, j);
      std::vector<int> labels;
      for (int l = 0; l <= d + 1; ++l)
        if (l != i && l != j)
          labels.push_back(l);
      std::vector<int> pi, pj;
      for (int l : labels) {
        pi.push_back(cell.sub(i).pos[l]);
        pj.push_back(cell.sub(j).pos[l]);
      }
      face_trace_rows(fs, i, -1, n, 1.0, J, f * nb, &pi);
      face_trace_rows(fs, j, -1, n, -1.0, J, f * nb, &pj);
    }
  return J;
}

Eigen::MatrixXd coarse_sym_polys(const SplitCell& cell, const FieldSpace& fs, int r)
{
  const int d = fs.dim();
  const SymIndex si(d);
  const auto& mi = MultiIndexSet::get(d + 1, r);
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(fs.size(), mi.size() * si.ns);
  int c = 0;
  for (int a = 0; a < mi.size(); ++a) {
    const PwPoly p = cell.from_coarse(BPoly::basis(d + 1, r, a));
    for (int s = 0; s < si.ns; ++s)
      add_sym(G.col(c++), fs, p, sym_unit(d, s));
  }
  return G;
}

namespace {

Eigen::MatrixXd subcell_trace_matrix(const SplitCell& cell, const FieldSpace& fs, int piece)
{
  const int d = fs.dim();
  const int nb = d * MultiIndexSet::get(d, fs.degree()).size();
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero((d + 1) * nb, fs.size());
  for (int q = 0; q <= d; ++q)
    face_trace_rows(fs, piece, q, outward_normal(cell.sub(piece), q), 1.0, T, q * nb);
  return T;
}

} // namespace

Eigen::MatrixXd div_bubble_space(const SplitCell& cell, const FieldSpace& fs, int k, int piece)
{
  const int d = fs.dim();
  if (k < 2)
    return Eigen::MatrixXd(fs.size(), 0);
  if (fs.degree() < k)
    throw DomainError("div_bubble_space: layout degree below k");
  const SymIndex si(d);
  const auto& mp = MultiIndexSet::get(d + 1, k - 2);
  std::vector<Eigen::VectorXd> cols;
  for (int i = 0; i <= d; ++i)
    for (int j = i + 1; j <= d; ++j) {
      Eigen::VectorXd t;
      if (piece < 0)
        t = cell.geometry().t(i, j);
      else
        t = cell.sub(piece).v.col(j) - cell.sub(piece).v.col(i);
      const Eigen::MatrixXd tt = t * t.transpose();
      Eigen::VectorXd ei = Eigen::VectorXd::Zero(d + 1), ej = ei;
      ei(i) = 1;
      ej(j) = 1;
      const BPoly lij = BPoly::linear(ei) * BPoly::linear(ej);
      for (int a = 0; a < mp.size(); ++a) {
        const BPoly q = lij * BPoly::basis(d + 1, k - 2, a);
        const PwPoly pq = piece < 0 ? cell.from_coarse(q) : cell.on_subcell(piece, q);
        Eigen::VectorXd col = Eigen::VectorXd::Zero(fs.size());
        add_sym(col, fs, pq, tt);
        cols.push_back(std::move(col));
      }
    }
  Eigen::MatrixXd G(fs.size(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c)
    G.col(c) = cols[c];
  const Eigen::MatrixXd B = orth(G);

  // Null space oracle: H_0(div) cap P_k on the same simplex.
  Eigen::MatrixXd Pk;
  Eigen::MatrixXd Tr;
  if (piece < 0) {
    Pk = coarse_sym_polys(cell, fs, k);
    Tr = boundary_trace_matrix(cell, fs);
  } else {
    const auto& mk = MultiIndexSet::get(d + 1, k);
    Pk = Eigen::MatrixXd::Zero(fs.size(), mk.size() * si.ns);
    int c = 0;
    for (int a = 0; a < mk.size(); ++a)
      for (int s = 0; s < si.ns; ++s)
        add_sym(Pk.col(c++), fs, cell.on_subcell(piece, BPoly::basis(d + 1, k, a)), sym_unit(d, s));
    Tr = subcell_trace_matrix(cell, fs, piece);
  }
  const int oracle = static_cast<int>(null_space(Tr * Pk).cols());
  const long long expected = binomial(k + d - 2, d) * d * (d + 1) / 2;
  const double leak = (Tr * B).norm();
  if (B.cols() != oracle || oracle != expected || leak > 1e-9 * std::max(1.0, Tr.norm()))
    throw CertificationError("div_bubble_space: span rank " + std::to_string(B.cols()) + ", null space " +
                             std::to_string(oracle) + ", expected " + std::to_string(expected));
  return B;
}

Eigen::MatrixXd rm_fields(const SplitCell& cell, const FieldSpace& vfs, const Eigen::VectorXd& center, int piece)
{
  const int d = vfs.dim();
  const int nr = rm_dim(d);
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(vfs.size(), nr);
  const auto& m1 = MultiIndexSet::get(d + 1, 1);
  for (int i = 0; i <= d; ++i) {
    if (piece >= 0 && i != piece)
      continue;
    // degree-1 Bernstein coefficients are the vertex values
    std::vector<Eigen::MatrixXd> vals(d + 1);
    for (int a = 0; a < m1.size(); ++a) {
      int v = 0;
      while (m1[a][v] == 0)
        ++v;
      vals[a] = rm_values(cell.sub(i).v.col(v), center);
    }
    for (int c = 0; c < nr; ++c)
      for (int r = 0; r < d; ++r) {
        BPoly p = BPoly::zero(d + 1, 1);
        for (int a = 0; a < m1.size(); ++a)
          p.c(a) = vals[a](r, c);
        R.col(c).segment(vfs.offset(i, r), vfs.nalpha()) = elevate(p, vfs.degree()).c;
      }
  }
  return R;
}

Eigen::MatrixXd rm_complement_projector(const SplitCell& cell, const FieldSpace& vfs, int piece)
{
  const Eigen::VectorXd center =
      piece < 0 ? cell.geometry().vc : Eigen::VectorXd(cell.sub(piece).v.rowwise().mean());
  const Eigen::MatrixXd R = rm_fields(cell, vfs, center, piece);
  const Eigen::MatrixXd M = field_mass(cell, vfs, Eigen::VectorXd::Ones(vfs.ncomp()));
  const Eigen::MatrixXd RtM = R.transpose() * M;
  const Eigen::MatrixXd G = RtM * R;
  return Eigen::MatrixXd::Identity(vfs.size(), vfs.size()) - R * G.ldlt().solve(RtM);
}

namespace {

Eigen::VectorXd mask_piece(const FieldSpace& fs, const Eigen::VectorXd& v, int piece)
{
  Eigen::VectorXd r = Eigen::VectorXd::Zero(v.size());
  const int len = fs.ncomp() * fs.nalpha();
  r.segment(fs.offset(piece, 0), len) = v.segment(fs.offset(piece, 0), len);
  return r;
}

} // namespace

NNExtender::NNExtender(const SplitCell& cell, const FieldSpace& fs) : fs_(fs)
{
  const int d = fs.dim();
  D_ = div_matrix(cell, fs);
  const FieldSpace vfs = vec_space(d, fs.degree() - 1);
  for (int i = 0; i <= d; ++i) {
    bubbles_.push_back(div_bubble_space(cell, fs, d + 1, i));
    proj_.push_back(rm_complement_projector(cell, vfs, i));
    cod_.emplace_back();
    cod_.back().setThreshold(1e-10);
    cod_.back().compute(D_ * bubbles_.back());
  }
}

Eigen::VectorXd NNExtender::apply(int piece, const Eigen::VectorXd& b) const
{
  const FieldSpace vfs = vec_space(fs_.dim(), fs_.degree() - 1);
  const Eigen::VectorXd db = D_ * b;
  const Eigen::VectorXd t = mask_piece(vfs, proj_[piece] * db, piece);
  const Eigen::VectorXd c = cod_[piece].solve(t);
  const double res = (D_ * (bubbles_[piece] * c) - t).norm();
  if (res > 1e-10 * std::max(1.0, db.norm()))
    throw NumericalError("ext_nn: least-squares residual " + std::to_string(res));
  return b - bubbles_[piece] * c;
}

Eigen::VectorXd ext_nn(const SplitCell& cell, const FieldSpace& fs, int piece, const Eigen::VectorXd& b)
{
  return NNExtender(cell, fs).apply(piece, b);
}

PsiExtender::PsiExtender(const SplitCell& cell, const FieldSpace& fs, int k, const Eigen::MatrixXd& span)
{
  const int d = fs.dim();
  const Eigen::MatrixXd Q = orth(span);
  const Eigen::MatrixXd Tr = boundary_trace_matrix(cell, fs);
  bubbles_ = Q * null_space(Tr * Q);
  D_ = div_matrix(cell, fs);
  P_ = rm_complement_projector(cell, vec_space(d, fs.degree() - 1), -1);
  cod_.setThreshold(1e-10);
  cod_.compute(D_ * bubbles_);
  div_rank_ = static_cast<int>(cod_.rank());
  const long long expected = d * (d + 1) * binomial(k - 1 + d, d) - d * (d + 1) / 2;
  if (div_rank_ != expected)
    throw CertificationError("PsiExtender: div rank " + std::to_string(div_rank_) + " on the interior bubbles, expected " +
                             std::to_string(expected));
}

Eigen::VectorXd PsiExtender::apply(const Eigen::VectorXd& phi) const
{
  const Eigen::VectorXd dphi = D_ * phi;
  const Eigen::VectorXd t = P_ * dphi;
  const Eigen::VectorXd c = cod_.solve(t);
  const double res = (D_ * (bubbles_ * c) - t).norm();
  if (res > 1e-10 * std::max(1.0, dphi.norm()))
    throw NumericalError("ext_psi: least-squares residual " + std::to_string(res));
  return phi - bubbles_ * c;
}

Eigen::MatrixXd NDSpace::values(const Eigen::VectorXd& x) const
{
  const Eigen::VectorXd y = frame.transpose() * (x - origin) / scale;
  const int nm = static_cast<int>(monomials.size());
  Eigen::VectorXd mv(nm);
  for (int m = 0; m < nm; ++m) {
    double v = 1;
    for (int t = 0; t < dim_face; ++t)
      v *= std::pow(y(t), monomials[m][t]);
    mv(m) = v;
  }
  Eigen::MatrixXd out(dim_face, size());
  for (int r = 0; r < dim_face; ++r)
    out.row(r) = mv.transpose() * coef.middleRows(r * nm, nm);
  return out;
}

NDSpace nd_space(const Eigen::MatrixXd& face_vertices, int m)
{
  if (m < 0)
    throw DomainError("nd_space: order must be >= 0");
  const int d = static_cast<int>(face_vertices.rows());
  const int n = static_cast<int>(face_vertices.cols()) - 1;
  if (n < 1)
    throw DomainError("nd_space: face must have dimension >= 1");
  NDSpace s;
  s.dim_face = n;
  s.order = m;
  Eigen::MatrixXd e(d, n);
  double h = 0;
  for (int r = 0; r < n; ++r) {
    e.col(r) = face_vertices.col(r + 1) - face_vertices.col(0);
    h = std::max(h, e.col(r).norm());
  }
  s.frame = tangent_frame(e);
  s.origin = face_vertices.rowwise().mean();
  s.scale = h;
  // monomials by total degree, degree-(m+1) block last
  std::vector<int> first_of_degree;
  for (int t = 0; t <= m + 1; ++t) {
    first_of_degree.push_back(static_cast<int>(s.monomials.size()));
    const auto& mi = MultiIndexSet::get(n, t);
    for (int a = 0; a < mi.size(); ++a)
      s.monomials.emplace_back(mi[a], mi[a] + n);
  }
  const int nm = static_cast<int>(s.monomials.size());
  const int top0 = first_of_degree[m + 1];
  const int ntop = nm - top0;
  std::vector<Eigen::VectorXd> cols;
  for (int r = 0; r < n; ++r)
    for (int a = 0; a < top0; ++a) {
      Eigen::VectorXd c = Eigen::VectorXd::Zero(nm * n);
      c(r * nm + a) = 1.0;
      cols.push_back(c);
    }
  // homogeneous top-degree fields q with y . q = 0
  const auto& hi = MultiIndexSet::get(n, m + 2);
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(hi.size(), n * ntop);
  std::vector<int> a(n);
  for (int r = 0; r < n; ++r)
    for (int b = 0; b < ntop; ++b) {
      a = s.monomials[top0 + b];
      ++a[r];
      C(hi.index(a.data()), r * ntop + b) = 1.0;
    }
  const Eigen::MatrixXd N = null_space(C);
  for (int c = 0; c < N.cols(); ++c) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(nm * n);
    for (int r = 0; r < n; ++r)
      v.segment(r * nm + top0, ntop) = N.col(c).segment(r * ntop, ntop);
    cols.push_back(v);
  }
  s.coef.resize(nm * n, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c)
    s.coef.col(c) = cols[c];
  return s;
}

} // namespace alfeld
