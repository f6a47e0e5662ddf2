// SPDX-License-Identifier: MIT
//
// Spanning sets and DoFs of the eight element families, and build_element.
#include "alfeld/elements.hpp"

#include "alfeld/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>

namespace alfeld {

const std::vector<Family>& all_families()
{
  static const std::vector<Family> f{Family::LinearPhiSplit, Family::LinearReduced, Family::LinearRM,
                                     Family::HighPhiSplit,   Family::HighPhiNN,     Family::HighReduced,
                                     Family::HighPsi,        Family::RTPlus};
  return f;
}

std::string to_string(Family f)
{
  switch (f) {
  case Family::LinearPhiSplit: return "LinearPhiSplit";
  case Family::LinearReduced: return "LinearReduced";
  case Family::LinearRM: return "LinearRM";
  case Family::HighPhiSplit: return "HighPhiSplit";
  case Family::HighPhiNN: return "HighPhiNN";
  case Family::HighReduced: return "HighReduced";
  case Family::HighPsi: return "HighPsi";
  case Family::RTPlus: return "RTPlus";
  }
  return "?";
}

Family family_from_string(const std::string& s)
{
  std::string key;
  for (char ch : s)
    if (std::isalnum(static_cast<unsigned char>(ch)))
      key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  for (Family f : all_families()) {
    std::string name = to_string(f);
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (name == key)
      return f;
  }
  throw DomainError("unknown element family '" + s + "'");
}

bool is_linear(Family f)
{
  return f == Family::LinearPhiSplit || f == Family::LinearReduced || f == Family::LinearRM;
}

bool admissible(Family f, int d, int k)
{
  if (d < 2 || d > 3)
    return false;
  if (is_linear(f))
    return k == 1;
  if (f == Family::HighPhiSplit || f == Family::RTPlus)
    return k >= 1;
  return k >= 2;
}

int ambient_degree(Family f, int d, int k)
{
  switch (f) {
  case Family::HighPhiNN:
  case Family::HighPsi: return std::max(k, d + 1);
  case Family::RTPlus: return k + 1;
  default: return k;
  }
}

long long dimension_formula(Family f, int d, int k)
{
  const long long ns = d * (d + 1) / 2;
  switch (f) {
  case Family::LinearPhiSplit: return ns * (2 * d + 1);
  case Family::LinearReduced: return static_cast<long long>(d) * d * (d + 1);
  case Family::LinearRM: return (d + 1) * ns;
  case Family::HighPhiSplit: return (d + 1) * binomial(k + d - 1, k) * ((d + 1) * k + d) / 2;
  case Family::HighPhiNN:
    return dimension_formula(Family::HighPhiSplit, d, k) + static_cast<long long>(d) * d * (d + 1) / 2;
  case Family::HighReduced:
  case Family::HighPsi: return ns * (binomial(k + d, d) + binomial(k + d - 2, d - 2));
  case Family::RTPlus: return (d + 1) * d * binomial(k + d - 1, d - 1) + ns * binomial(k - 1 + d, d);
  }
  return 0;
}

Eigen::VectorXd ElementSpace::global_normal(int p) const
{
  const double s = face_sign.empty() ? 1.0 : face_sign[p];
  return s * cell.geometry().normal.col(p);
}

namespace {

// Columns collected one at a time, then packed into a matrix.
struct Columns {
  int rows = 0;
  std::vector<Eigen::VectorXd> cols;

  explicit Columns(int n) : rows(n) {}
  Eigen::VectorXd& add()
  {
    cols.push_back(Eigen::VectorXd::Zero(rows));
    return cols.back();
  }
  void append(const Eigen::MatrixXd& m)
  {
    for (int c = 0; c < m.cols(); ++c)
      cols.push_back(m.col(c));
  }
  Eigen::MatrixXd matrix() const
  {
    Eigen::MatrixXd m(rows, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c)
      m.col(c) = cols[c];
    return m;
  }
};

std::vector<IndexSet> subsets(const IndexSet& F, int size)
{
  std::vector<IndexSet> out;
  const int n = F.size();
  std::vector<int> pick(size);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == size) {
      std::vector<int> l;
      for (int t : pick)
        l.push_back(F[t]);
      out.emplace_back(F.ambient_dim(), l);
      return;
    }
    for (int t = start; t < n; ++t) {
      pick[depth] = t;
      rec(t + 1, depth + 1);
    }
  };
  rec(0, 0);
  return out;
}

// b_f^R B_alpha(lambda^R_f) for every alpha of degree r on f.
std::vector<PwPoly> split_face_polys(const SplitCell& cell, const IndexSet& f, int r)
{
  const PwPoly b = cell.split_bubble(f);
  const auto& mi = MultiIndexSet::get(f.size(), r);
  std::vector<PwPoly> out;
  for (int a = 0; a < mi.size(); ++a)
    out.push_back(b * cell.split_extend(f, BPoly::basis(f.size(), r, a)));
  return out;
}

// Outward unit normal of the face of subcell i opposite label l.
Eigen::VectorXd sub_normal(const SplitCell& cell, int i, int l)
{
  const SubCell& s = cell.sub(i);
  Eigen::VectorXd g = s.grad.col(s.pos[l]);
  return -g / g.norm();
}

// n-hat on subcell `piece`: the dual vector to the face opposite `opp` among
// the faces of the subcell containing f, with that face's normal set to nF.
Eigen::VectorXd dual_face_normal(const SplitCell& cell, int piece, int opp, const IndexSet& f,
                                 const Eigen::VectorXd& nF)
{
  const SubCell& s = cell.sub(piece);
  std::vector<Eigen::VectorXd> cols;
  int target = -1;
  for (int l : s.labels) {
    if (f.contains(l))
      continue;
    if (l == opp) {
      target = static_cast<int>(cols.size());
      cols.push_back(nF);
    } else {
      cols.push_back(sub_normal(cell, piece, l));
    }
  }
  Eigen::MatrixXd Ng(cell.dim(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c)
    Ng.col(c) = cols[c];
  Eigen::VectorXd e = Eigen::VectorXd::Zero(Ng.cols());
  e(target) = 1.0;
  return Ng * (Ng.transpose() * Ng).ldlt().solve(e);
}

// ---------------------------------------------------------------------------
// Generators

// Phi parts: b_f^R q phi^f_ij for f in Delta_l(T), l <= min(d-2, k-1).
void add_phi_parts(Columns& G, const SplitCell& cell, const FieldSpace& fs, int k)
{
  const int d = cell.dim();
  for (int l = 0; l <= std::min(d - 2, k - 1); ++l)
    for (const IndexSet& f : subsimplices(d, l)) {
      const IndexSet star = complement_star(f);
      const auto polys = split_face_polys(cell, f, k - l - 1);
      for (const PwPoly& p : polys)
        for (int a = 0; a < star.size(); ++a)
          for (int b = a + 1; b < star.size(); ++b)
            add_sym_piecewise(G.add(), fs, p, phi_field(cell, f, star[a], star[b]));
    }
}

void add_split_generators(Columns& G, const SplitCell& cell, const FieldSpace& fs, int k)
{
  const int d = cell.dim();
  const CellGeometry& g = cell.geometry();
  const SymIndex si(d);
  const int lmax = std::min(d - 1, k - 1);

  // b_f^R P_{k-l-1}(f) N^f(S) on the coarse subsimplices
  for (int l = 0; l <= lmax; ++l)
    for (const IndexSet& f : subsimplices(d, l)) {
      const Eigen::MatrixXd N = sym_decompose(g, f).normal_part();
      for (const PwPoly& p : split_face_polys(cell, f, k - l - 1))
        for (int c = 0; c < N.cols(); ++c)
          add_sym(G.add(), fs, p, si.unpack(N.col(c)));
    }

  add_phi_parts(G, cell, fs, k);

  // b_f^R P_{k-l-1}(f) S(N^f) on interior subsimplices
  for (int l = 0; l <= lmax; ++l)
    for (const IndexSet& f : interior_split_subsimplices(d, l)) {
      const Eigen::MatrixXd n = normal_frame(edge_tangents(g, f.labels()), d);
      const Eigen::MatrixXd nn = sym_decompose(Eigen::MatrixXd(d, 0), n).nn;
      for (const PwPoly& p : split_face_polys(cell, f, k - l - 1))
        for (int c = 0; c < nn.cols(); ++c)
          add_sym(G.add(), fs, p, si.unpack(nn.col(c)));
    }

  // tangential-normal bubbles glued across interior faces
  for (int i = 0; i <= d; ++i)
    for (int j = i + 1; j <= d; ++j) {
      const IndexSet F = interior_face(d, i, j);
      const Eigen::VectorXd nF = interior_normal(cell, i, j);
      for (int l = 1; l <= lmax; ++l)
        for (const IndexSet& f : subsets(F, l + 1)) {
          const Eigen::VectorXd ni = dual_face_normal(cell, i, j, f, nF);
          const Eigen::VectorXd nj = dual_face_normal(cell, j, i, f, nF);
          const Eigen::MatrixXd t = edge_tangents(g, f.labels());
          for (const PwPoly& p : split_face_polys(cell, f, k - l - 1))
            for (int c = 0; c < t.cols(); ++c) {
              Eigen::VectorXd& col = G.add();
              add_sym(col, fs, p, sym_outer(t.col(c), ni), i);
              add_sym(col, fs, p, sym_outer(t.col(c), nj), j);
            }
        }
    }

  for (int i = 0; i <= d; ++i)
    G.append(div_bubble_space(cell, fs, k, i));
}

// Ext(b_F^R p n_F n_F^T), p in P_1(F), one generator per (F_ij, p). The
// optional `corr` receives Ext(b) - b for b = b_F^R (sum of the P_1 basis) n_F n_F^T.
void add_nn_extensions(Columns& G, const SplitCell& cell, const FieldSpace& fs, const NNExtender& ext,
                       std::vector<Eigen::VectorXd>* corr = nullptr)
{
  const int d = cell.dim();
  for (int i = 0; i <= d; ++i)
    for (int j = i + 1; j <= d; ++j) {
      const IndexSet F = interior_face(d, i, j);
      const Eigen::VectorXd nF = interior_normal(cell, i, j);
      const Eigen::MatrixXd nn = nF * nF.transpose();
      Eigen::VectorXd c = Eigen::VectorXd::Zero(fs.size());
      for (const PwPoly& p : split_face_polys(cell, F, 1)) {
        Eigen::VectorXd bi = Eigen::VectorXd::Zero(fs.size()), bj = bi;
        add_sym(bi, fs, p, nn, i);
        add_sym(bj, fs, p, nn, j);
        G.add() = ext.apply(i, bi) + ext.apply(j, bj);
        c += G.cols.back() - bi - bj;
      }
      if (corr)
        corr->push_back(c);
    }
}

void add_coarse_face_parts(Columns& G, const SplitCell& cell, const FieldSpace& fs, int k)
{
  const int d = cell.dim();
  const CellGeometry& g = cell.geometry();
  const SymIndex si(d);
  for (int l = 0; l <= std::min(d - 1, k - 1); ++l)
    for (const IndexSet& f : subsimplices(d, l)) {
      const Eigen::MatrixXd N = sym_decompose(g, f).normal_part();
      const PwPoly b = cell.bubble(f);
      const auto& mi = MultiIndexSet::get(f.size(), k - l - 1);
      for (int a = 0; a < mi.size(); ++a) {
        const PwPoly p = b * cell.extend_face_poly(f, BPoly::basis(f.size(), k - l - 1, a));
        for (int c = 0; c < N.cols(); ++c)
          add_sym(G.add(), fs, p, si.unpack(N.col(c)));
      }
    }
}

Eigen::MatrixXd phi_nn_span(const SplitCell& cell, const FieldSpace& fs, int k, const NNExtender* ext)
{
  Columns G(fs.size());
  add_split_generators(G, cell, fs, k);
  if (ext)
    add_nn_extensions(G, cell, fs, *ext);
  return G.matrix();
}

// ---------------------------------------------------------------------------
// DoF rows

// rows(t, .) = sum over points of w * sum_s C(t, s) B(mu) on block (piece, s),
// so that rows * coef = sum w * C(pt) * pack(tau(pt)).
Eigen::MatrixXd moment_rows(const FieldSpace& fs, const std::vector<QPoint>& pts, int ntest,
                            const std::function<Eigen::MatrixXd(const QPoint&)>& coef)
{
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(ntest, fs.size());
  for (const QPoint& pt : pts) {
    const Eigen::VectorXd B = bernstein_values(fs.dim() + 1, fs.degree(), pt.mu);
    const Eigen::MatrixXd C = coef(pt);
    for (int s = 0; s < fs.ncomp(); ++s)
      R.middleCols(fs.offset(pt.piece, s), fs.nalpha()) += pt.w * C.col(s) * B.transpose();
  }
  return R;
}

struct DofBuilder {
  const SplitCell& cell;
  const FieldSpace& fs;
  SymIndex si;
  std::vector<Eigen::RowVectorXd> rows;
  std::vector<DofFunctional> dofs;
  Eigen::MatrixXd mass;

  DofBuilder(const SplitCell& c, const FieldSpace& f) : cell(c), fs(f), si(f.dim()) {}

  const Eigen::MatrixXd& M()
  {
    if (mass.size() == 0)
      mass = sym_mass(cell, fs);
    return mass;
  }

  void push(const Eigen::MatrixXd& R, DofKind kind, const std::vector<int>& locus, int face = -1)
  {
    for (int r = 0; r < R.rows(); ++r) {
      rows.push_back(R.row(r));
      dofs.push_back({kind, locus, face, r});
    }
  }

  std::vector<int> face_labels(int p) const
  {
    std::vector<int> l;
    for (int q = 0; q <= cell.dim(); ++q)
      if (q != p)
        l.push_back(q);
    return l;
  }

  // int_F (tau n_F) . e_a B_alpha, alpha outer and a inner, averaged over F.
  Eigen::MatrixXd face_vector_rows(int p, int r, const Eigen::VectorXd& n)
  {
    const int d = cell.dim();
    const auto labels = face_labels(p);
    const auto pts = entity_points(cell, labels, p, fs.degree() + r);
    const int nb = MultiIndexSet::get(d, r).size();
    const double meas = simplex_measure(cell.vertices(labels));
    return moment_rows(fs, pts, nb * d, [&](const QPoint& pt) {
             const Eigen::VectorXd B = bernstein_values(d, r, pt.nu);
             Eigen::MatrixXd C(nb * d, si.ns);
             for (int a = 0; a < nb; ++a)
               for (int c = 0; c < d; ++c) {
                 Eigen::MatrixXd W = Eigen::MatrixXd::Zero(d, d);
                 W.row(c) = n.transpose();
                 C.row(a * d + c) = B(a) * si.functional(W).transpose();
               }
             return C;
           }) /
           meas;
  }

  void face_moments(int r, const std::vector<int>& face_sign)
  {
    for (int p = 0; p <= cell.dim(); ++p) {
      const Eigen::VectorXd n = face_sign[p] * cell.geometry().normal.col(p);
      push(face_vector_rows(p, r, n), DofKind::FaceMoment, face_labels(p), p);
    }
  }

  // int_T tau : q / |T|, q in coarse P_r(T; S)
  void cell_moments(int r)
  {
    if (r < 0)
      return;
    const Eigen::MatrixXd Q = coarse_sym_polys(cell, fs, r);
    std::vector<int> all(cell.dim() + 1);
    for (int i = 0; i <= cell.dim(); ++i)
      all[i] = i;
    push((M() * Q).transpose() / cell.geometry().volume, DofKind::CellMoment, all);
  }

  // int_f n_a^T tau n_b q over interior f, l <= min(d-1, k-1)
  void nn_moments(int k)
  {
    const int d = cell.dim();
    const CellGeometry& g = cell.geometry();
    for (int l = 0; l <= std::min(d - 1, k - 1); ++l)
      for (const IndexSet& f : interior_split_subsimplices(d, l)) {
        const Eigen::MatrixXd n = normal_frame(edge_tangents(g, f.labels()), d);
        const Eigen::MatrixXd nn = sym_decompose(Eigen::MatrixXd(d, 0), n).nn;
        const int r = k - l - 1;
        const int nb = MultiIndexSet::get(f.size(), r).size();
        const int piece = cell.first_subcell(f);
        const auto pts = entity_points(cell, f.labels(), piece, fs.degree() + r);
        const double meas = simplex_measure(cell.vertices(f.labels()));
        // nn columns hold sym(n_a n_b^T); the functional picks n_a^T tau n_b
        const Eigen::MatrixXd R = moment_rows(fs, pts, nb * static_cast<int>(nn.cols()), [&](const QPoint& pt) {
          const Eigen::VectorXd B = bernstein_values(f.size(), r, pt.nu);
          Eigen::MatrixXd C(nb * nn.cols(), si.ns);
          for (int a = 0; a < nb; ++a)
            for (int c = 0; c < nn.cols(); ++c)
              C.row(a * nn.cols() + c) = B(a) * si.functional(si.unpack(nn.col(c))).transpose();
          return C;
        });
        push(R / meas, DofKind::NNMoment, f.labels());
      }
  }

  // int_F q . (Pi_F tau n_F), q in ND_{k-2}(F), on each interior face from T_i
  void nd_moments(int k)
  {
    if (k < 2)
      return;
    const int d = cell.dim();
    for (int i = 0; i <= d; ++i)
      for (int j = i + 1; j <= d; ++j) {
        const IndexSet F = interior_face(d, i, j);
        const Eigen::VectorXd nF = interior_normal(cell, i, j);
        const Eigen::MatrixXd X = cell.vertices(F.labels());
        const NDSpace nd = nd_space(X, k - 2);
        const auto pts = entity_points(cell, F.labels(), i, fs.degree() + k);
        const double meas = simplex_measure(X);
        const Eigen::MatrixXd R = moment_rows(fs, pts, nd.size(), [&](const QPoint& pt) {
          const Eigen::MatrixXd q = nd.frame * nd.values(pt.x);
          Eigen::MatrixXd C(nd.size(), si.ns);
          for (int t = 0; t < nd.size(); ++t)
            C.row(t) = si.functional(q.col(t) * nF.transpose()).transpose();
          return C;
        });
        push(R / meas, DofKind::TNFaceMoment, F.labels());
      }
  }

  void subcell_bubble_moments(int k)
  {
    if (k < 2)
      return;
    for (int i = 0; i <= cell.dim(); ++i) {
      const Eigen::MatrixXd B = div_bubble_space(cell, fs, k, i);
      push((M() * B).transpose() / cell.sub(i).volume, DofKind::SubcellMoment, cell.sub(i).labels);
    }
  }

  // int_F n_F^T tau n_F p, p in P_1(F) Bernstein with index in [r0, d)
  void nn_face_moments(int r0)
  {
    const int d = cell.dim();
    for (int i = 0; i <= d; ++i)
      for (int j = i + 1; j <= d; ++j) {
        const IndexSet F = interior_face(d, i, j);
        const Eigen::VectorXd nF = interior_normal(cell, i, j);
        const Eigen::VectorXd fn = si.functional(nF * nF.transpose());
        const auto pts = entity_points(cell, F.labels(), i, fs.degree() + 1);
        const double meas = simplex_measure(cell.vertices(F.labels()));
        const Eigen::MatrixXd R = moment_rows(fs, pts, d - r0, [&](const QPoint& pt) {
          const Eigen::VectorXd B = bernstein_values(d, 1, pt.nu);
          Eigen::MatrixXd C(d - r0, si.ns);
          for (int r = r0; r < d; ++r)
            C.row(r - r0) = B(r) * fn.transpose();
          return C;
        });
        push(R / meas, DofKind::NNFaceMoment, F.labels());
      }
  }

  Eigen::MatrixXd matrix() const
  {
    Eigen::MatrixXd R(static_cast<Eigen::Index>(rows.size()), fs.size());
    for (std::size_t r = 0; r < rows.size(); ++r)
      R.row(r) = rows[r];
    return R;
  }
};

// P_1(F; R^d) coefficients (alpha outer, component inner) of a basis of
// W = P_1(F) n_F + RM(F).
Eigen::MatrixXd face_rm_basis(const SplitCell& cell, int p, const Eigen::VectorXd& n)
{
  const int d = cell.dim();
  std::vector<int> labels;
  for (int q = 0; q <= d; ++q)
    if (q != p)
      labels.push_back(q);
  const Eigen::MatrixXd X = cell.vertices(labels);
  Eigen::MatrixXd e(d, d - 1);
  for (int r = 1; r < d; ++r)
    e.col(r - 1) = X.col(r) - X.col(0);
  const Eigen::MatrixXd t = tangent_frame(e);
  const Eigen::VectorXd xc = X.rowwise().mean();
  const int nrot = (d - 1) * (d - 2) / 2;
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(d * d, d + (d - 1) + nrot);
  int col = 0;
  for (int a = 0; a < d; ++a, ++col)
    W.block(a * d, col, d, 1) = n;
  for (int s = 0; s < d - 1; ++s, ++col)
    for (int a = 0; a < d; ++a)
      W.block(a * d, col, d, 1) = t.col(s);
  for (int s = 0; s < d - 1; ++s)
    for (int u = s + 1; u < d - 1; ++u, ++col)
      for (int a = 0; a < d; ++a) {
        const Eigen::VectorXd y = X.col(a) - xc;
        W.block(a * d, col, d, 1) = y.dot(t.col(s)) * t.col(u) - y.dot(t.col(u)) * t.col(s);
      }
  return W;
}

// Constraint rows (div tau, q) = 0 for q in P_1(T; R^d), orthogonal to RM(T).
Eigen::MatrixXd reduced_div_constraints(const SplitCell& cell, const FieldSpace& fs)
{
  const int d = cell.dim();
  const FieldSpace v1 = vec_space(d, 1);
  const Eigen::MatrixXd D = elevate_field(vec_space(d, fs.degree() - 1), v1, div_matrix(cell, fs));
  Eigen::MatrixXd P(v1.size(), (d + 1) * d);
  int c = 0;
  for (int a = 0; a <= d; ++a) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(d + 1);
    e(a) = 1;
    for (int r = 0; r < d; ++r) {
      Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
      w(r) = 1;
      Eigen::VectorXd col = Eigen::VectorXd::Zero(v1.size());
      add_vec(col, v1, cell.from_coarse(BPoly::linear(e)), w);
      P.col(c++) = col;
    }
  }
  const Eigen::MatrixXd Q = orth(rm_complement_projector(cell, v1, -1) * P);
  const Eigen::MatrixXd Mv = field_mass(cell, v1, Eigen::VectorXd::Ones(d));
  return Q.transpose() * Mv * D;
}

Eigen::MatrixXd restrict_span(const Eigen::MatrixXd& S0, const Eigen::MatrixXd& C, const char* what)
{
  const Eigen::MatrixXd S = S0 * null_space(C * S0);
  const double res = (C * S).norm();
  if (res > 1e-10 * std::max(1.0, C.norm()))
    throw CertificationError(std::string(what) + ": constraint residual " + std::to_string(res));
  return S;
}

std::vector<int> default_signs(int d, const std::vector<int>& s)
{
  if (s.empty())
    return std::vector<int>(d + 1, 1);
  if (static_cast<int>(s.size()) != d + 1)
    throw DomainError("build_element: face_sign needs d+1 entries");
  return s;
}

} // namespace

Eigen::MatrixXd element_generators(Family family, const SplitCell& cell, int k)
{
  const int d = cell.dim();
  if (!admissible(family, d, k))
    throw DomainError("element_generators: " + to_string(family) + " is not defined for d=" + std::to_string(d) +
                      ", k=" + std::to_string(k));
  const FieldSpace fs = sym_space(d, ambient_degree(family, d, k));
  switch (family) {
  case Family::LinearPhiSplit:
  case Family::LinearReduced:
  case Family::LinearRM:
  case Family::HighPhiSplit: return phi_nn_span(cell, fs, k, nullptr);
  case Family::HighPhiNN: {
    const NNExtender ext(cell, fs);
    return phi_nn_span(cell, fs, k, &ext);
  }
  case Family::HighReduced: {
    Columns G(fs.size());
    G.append(coarse_sym_polys(cell, fs, k));
    add_phi_parts(G, cell, fs, k);
    return G.matrix();
  }
  case Family::HighPsi: {
    std::unique_ptr<NNExtender> ext;
    if (k <= d)
      ext = std::make_unique<NNExtender>(cell, fs);
    const PsiExtender psi(cell, fs, k, phi_nn_span(cell, fs, k, ext.get()));
    Columns phi(fs.size());
    add_phi_parts(phi, cell, fs, k);
    Columns G(fs.size());
    G.append(coarse_sym_polys(cell, fs, k));
    for (const auto& c : phi.cols)
      G.add() = psi.apply(c);
    return G.matrix();
  }
  case Family::RTPlus: {
    Columns G(fs.size());
    G.append(div_bubble_space(cell, fs, k + 1, -1));
    add_coarse_face_parts(G, cell, fs, k);
    add_phi_parts(G, cell, fs, k);
    return G.matrix();
  }
  }
  return {};
}

UnisolvenceReport unisolvence_certificate(const ElementSpace& e)
{
  UnisolvenceReport r;
  r.n = static_cast<int>(e.V.rows());
  if (e.V.rows() != e.V.cols() || e.V.size() == 0) {
    r.cond = std::numeric_limits<double>::infinity();
    return r;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(e.V);
  const auto& s = svd.singularValues();
  r.smin = s(s.size() - 1);
  r.cond = r.smin > 0 ? s(0) / r.smin : std::numeric_limits<double>::infinity();
  r.ok = r.cond < 1e8;
  return r;
}

ElementSpace build_element(Family family, const Eigen::MatrixXd& vertices, int k, const std::vector<int>& face_sign)
{
  const int d = static_cast<int>(vertices.rows());
  if (!admissible(family, d, k))
    throw DomainError("build_element: " + to_string(family) + " is not defined for d=" + std::to_string(d) +
                      ", k=" + std::to_string(k));
  ElementSpace e;
  e.family = family;
  e.d = d;
  e.k = k;
  e.cell = SplitCell(vertices);
  e.fs = sym_space(d, ambient_degree(family, d, k));
  e.face_sign = default_signs(d, face_sign);
  const SplitCell& cell = e.cell;
  const FieldSpace& fs = e.fs;

  DofBuilder B(cell, fs);
  std::unique_ptr<NNExtender> ext;
  if (family == Family::HighPhiNN || (family == Family::HighPsi && k <= d))
    ext = std::make_unique<NNExtender>(cell, fs);

  switch (family) {
  case Family::LinearPhiSplit:
    e.generators = element_generators(family, cell, k);
    e.shape = orth(e.generators);
    B.face_moments(1, e.face_sign);
    B.cell_moments(0);
    break;
  case Family::LinearReduced:
    e.generators = element_generators(family, cell, k);
    e.shape = restrict_span(orth(e.generators), reduced_div_constraints(cell, fs), "LinearReduced");
    B.face_moments(1, e.face_sign);
    break;
  case Family::LinearRM: {
    e.generators = element_generators(family, cell, k);
    std::vector<Eigen::MatrixXd> C{reduced_div_constraints(cell, fs)};
    for (int p = 0; p <= d; ++p) {
      const Eigen::VectorXd n = e.global_normal(p);
      const Eigen::MatrixXd R = B.face_vector_rows(p, 1, n);
      const Eigen::MatrixXd W = face_rm_basis(cell, p, n);
      const double area = simplex_measure(cell.vertices(B.face_labels(p)));
      const Eigen::MatrixXd Mb = bernstein_mass(d, 1, 1, area);
      Eigen::MatrixXd G = Eigen::MatrixXd::Zero(d * d, d * d);
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
          G.block(a * d, b * d, d, d) = Mb(a, b) * Eigen::MatrixXd::Identity(d, d);
      C.push_back(null_space(W.transpose() * G).transpose() * R);
      B.push(W.transpose() * R, DofKind::FaceMoment, B.face_labels(p), p);
    }
    Eigen::Index nr = 0;
    for (const auto& c : C)
      nr += c.rows();
    Eigen::MatrixXd Call(nr, fs.size());
    nr = 0;
    for (const auto& c : C) {
      Call.middleRows(nr, c.rows()) = c;
      nr += c.rows();
    }
    e.shape = restrict_span(orth(e.generators), Call, "LinearRM");
    break;
  }
  case Family::HighPhiSplit:
  case Family::HighPhiNN: {
    Columns G(fs.size());
    add_split_generators(G, cell, fs, k);
    std::vector<Eigen::VectorXd> corr;
    if (family == Family::HighPhiNN)
      add_nn_extensions(G, cell, fs, *ext, &corr);
    e.generators = G.matrix();
    e.shape = orth(e.generators);
    B.face_moments(k, e.face_sign);
    B.nn_moments(k);
    B.nd_moments(k);
    B.subcell_bubble_moments(k);
    if (family == Family::HighPhiNN) {
      // The extensions may partly fall into the split space: always for
      // k > d, and for b_F^R (sum of the P_1 basis) n_F n_F^T when k = d = 2.
      // Leading P_1 test functions are dropped accordingly. When all d are
      // new but k >= d, the constant nn moment on F is already an interior
      // DoF and is traded for the L2 moment against Ext(b) - b.
      const int nfaces = d * (d + 1) / 2;
      const long long extra = e.shape.cols() - dimension_formula(Family::HighPhiSplit, d, k);
      if (extra < 0 || extra % nfaces != 0 || extra / nfaces > d)
        throw CertificationError("build_element: HighPhiNN extension adds " + std::to_string(extra) +
                                 " functions, not a multiple of the interior face count");
      const int per_face = static_cast<int>(extra / nfaces);
      const bool trade = per_face == d && k >= d;
      if (per_face > 0)
        B.nn_face_moments(trade ? 1 : d - per_face);
      if (trade) {
        int f = 0;
        for (int i = 0; i <= d; ++i)
          for (int j = i + 1; j <= d; ++j, ++f)
            B.push((B.M() * corr[f]).transpose() / cell.geometry().volume, DofKind::CorrectionMoment,
                   interior_face(d, i, j).labels());
      }
    }
    break;
  }
  case Family::HighReduced:
  case Family::HighPsi:
    e.generators = element_generators(family, cell, k);
    e.shape = orth(e.generators);
    B.face_moments(k, e.face_sign);
    B.cell_moments(k - 2);
    break;
  case Family::RTPlus:
    e.generators = element_generators(family, cell, k);
    e.shape = orth(e.generators);
    B.face_moments(k, e.face_sign);
    B.cell_moments(k - 1);
    break;
  }

  e.dofs = B.dofs;
  e.dof_rows = B.matrix();
  e.face_dofs = 0;
  for (const auto& df : e.dofs)
    if (df.kind == DofKind::FaceMoment && df.face == 0)
      ++e.face_dofs;
  e.cell_dofs = static_cast<int>(e.dofs.size()) - (d + 1) * e.face_dofs;

  if (e.shape.cols() != e.dof_rows.rows())
    throw CertificationError("build_element: " + to_string(family) + " d=" + std::to_string(d) +
                             " k=" + std::to_string(k) + " has span dimension " + std::to_string(e.shape.cols()) +
                             " but " + std::to_string(e.dof_rows.rows()) + " DoFs");
  e.V = e.dof_rows * e.shape;
  e.report = unisolvence_certificate(e);
  if (!e.report.ok)
    throw CertificationError("build_element: " + to_string(family) + " d=" + std::to_string(d) +
                             " k=" + std::to_string(k) + " DoF matrix condition " + std::to_string(e.report.cond));
  e.nodal = e.shape * e.V.partialPivLu().solve(Eigen::MatrixXd::Identity(e.dim(), e.dim()));
  return e;
}

} // namespace alfeld
