// SPDX-License-Identifier: MIT
//
// Polynomial calculus on simplices in the Bernstein basis
//   B_alpha = (m! / alpha!) mu^alpha,  |alpha| = m,
// where mu are the barycentric coordinates of the simplex at hand. Piecewise
// polynomials on the barycentric split T^R keep one Bernstein array per
// subcell T_i.
#pragma once

#include "alfeld/mesh.hpp"
#include "alfeld/simplex.hpp"

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace alfeld {

/// All multi-indices in N^nvars with |alpha| = degree, lexicographically
/// descending (degree, 0, ..., 0) first. Instances are cached and shared.
class MultiIndexSet {
public:
  static const MultiIndexSet& get(int nvars, int degree);

  int nvars() const { return nvars_; }
  int degree() const { return degree_; }
  int size() const { return size_; }
  const int* operator[](int idx) const { return &alphas_[static_cast<std::size_t>(idx) * nvars_]; }
  /// Position of alpha, or -1 if |alpha| != degree or an entry is negative.
  int index(const int* alpha) const;
  /// m! / alpha!
  double multinomial(int idx) const { return multinomial_[idx]; }

private:
  MultiIndexSet(int nvars, int degree);
  int nvars_, degree_, size_;
  std::vector<int> alphas_;
  std::vector<double> multinomial_;
};

/// Bernstein polynomial of fixed degree in nvars barycentric variables.
struct BPoly {
  int nvars = 0;
  int degree = 0;
  Eigen::VectorXd c;

  static BPoly zero(int nvars, int degree);
  static BPoly constant(int nvars, int degree, double value);
  /// sum_j a_j mu_j
  static BPoly linear(const Eigen::VectorXd& a);
  /// The single Bernstein basis polynomial B_alpha.
  static BPoly basis(int nvars, int degree, int idx);

  double operator()(const Eigen::VectorXd& mu) const;
  BPoly& operator+=(const BPoly& o);
  BPoly& operator*=(double s)
  {
    c *= s;
    return *this;
  }
};

Eigen::VectorXd bernstein_values(int nvars, int degree, const Eigen::VectorXd& mu);
BPoly operator*(const BPoly& p, const BPoly& q);
BPoly operator+(const BPoly& p, const BPoly& q);
BPoly elevate(const BPoly& p, int degree);
BPoly power(const BPoly& p, int e);
/// d p / d mu_j as a polynomial of degree m-1 (Bernstein variables are
/// treated as independent).
BPoly derivative(const BPoly& p, int j);
/// Composition with the affine map sending vertex k of the new simplex to the
/// point with old barycentric coordinates W.col(k); computed by blossoming.
BPoly substitute(const BPoly& p, const Eigen::MatrixXd& W);
/// Bernstein polynomial on f whose variables are placed into positions pos
/// of an nvars-variable polynomial; entries with pos < 0 are identically zero.
BPoly embed(const BPoly& q, const std::vector<int>& pos, int nvars);
/// Exact integral over a simplex of the given volume.
double integral(const BPoly& p, double volume);
/// Exact mass matrix (int B_alpha B_beta) for degrees m1, m2.
Eigen::MatrixXd bernstein_mass(int nvars, int m1, int m2, double volume);
/// Coarse bubble b_f = prod_{i in f} lambda_i on T (nvars d+1).
BPoly bubble(const IndexSet& f);

/// Quadrature on the reference n-simplex. Nodes are barycentric (columns);
/// weights sum to the reference volume 1/n!.
struct QuadRule {
  int dim = 0;
  int degree = 0;
  Eigen::MatrixXd nodes;
  Eigen::VectorXd weights;
};

/// Grundmann-Moeller rule exact for P_degree; cached.
const QuadRule& quad_rule(int dim, int degree);

/// Vertices, gradients and volume of one subcell T_i of a split cell.
struct SubCell {
  std::vector<int> labels; // sorted labels of T_i = {i}^c
  Eigen::MatrixXd v;       // d x (d+1)
  Eigen::MatrixXd grad;    // d x (d+1)
  double volume = 0;
  std::vector<int> pos;    // label -> local position or -1
};

/// Scalar piecewise polynomial on T^R, one Bernstein array per subcell.
struct PwPoly {
  std::vector<BPoly> piece;

  int degree() const { return piece.empty() ? 0 : piece.front().degree; }
  PwPoly& operator*=(double s);
  PwPoly& operator+=(const PwPoly& o);
};

PwPoly operator*(const PwPoly& p, const PwPoly& q);
PwPoly operator+(const PwPoly& p, const PwPoly& q);
PwPoly operator*(double s, const PwPoly& p);
PwPoly elevate(const PwPoly& p, int degree);
PwPoly power(const PwPoly& p, int e);

/// A coarse simplex T with its barycentric split. All vertex labels follow
/// the IndexSet convention (c = d+1).
class SplitCell {
public:
  SplitCell() = default;
  explicit SplitCell(const Eigen::MatrixXd& coarse_vertices);

  int dim() const { return geo_.d; }
  int c() const { return geo_.d + 1; }
  const CellGeometry& geometry() const { return geo_; }
  Eigen::VectorXd vertex(int label) const { return geo_.vertex(label); }
  Eigen::MatrixXd vertices(const std::vector<int>& labels) const;
  const SubCell& sub(int i) const { return sub_[i]; }

  Eigen::VectorXd sub_barycentric(int i, const Eigen::VectorXd& x) const;
  /// Subcell containing x (smallest coarse lambda) and its barycentrics there.
  std::pair<int, Eigen::VectorXd> locate(const Eigen::VectorXd& x) const;
  /// Smallest i with f ⊆ T_i.
  int first_subcell(const IndexSet& f) const;

  PwPoly constant(int degree, double value) const;
  PwPoly coarse_lambda(int j) const;
  /// lambda_i^R, i in {0..d,c}
  PwPoly hat(int label) const;
  /// Coarse polynomial p(lambda) restricted to each subcell.
  PwPoly from_coarse(const BPoly& p) const;
  /// Bernstein polynomial on a single subcell, zero elsewhere.
  PwPoly on_subcell(int i, const BPoly& p) const;
  /// b_f, the coarse bubble of f ⊆ {0..d}.
  PwPoly bubble(const IndexSet& f) const;
  /// b_f^R = prod_{m} lambda^R_{f(m)}, f ⊆ {0..d,c}.
  PwPoly split_bubble(const IndexSet& f) const;
  /// q(lambda_{f(0)}, ..., lambda_{f(l)}) with q in f's Bernstein basis.
  PwPoly extend_face_poly(const IndexSet& f, const BPoly& q) const;
  /// q(lambda^R_{f(0)}, ..., lambda^R_{f(l)}).
  PwPoly split_extend(const IndexSet& f, const BPoly& q) const;

private:
  CellGeometry geo_;
  std::vector<SubCell> sub_;
};

/// Index bookkeeping for symmetric d x d tensors stored as d(d+1)/2 entries
/// (a <= b, row-major upper triangle).
struct SymIndex {
  int d = 0;
  int ns = 0;
  std::vector<std::pair<int, int>> ab;
  std::vector<std::vector<int>> s_of;

  explicit SymIndex(int dim = 0);
  /// Frobenius weight: 1 on the diagonal, 2 off it.
  double weight(int s) const { return ab[s].first == ab[s].second ? 1.0 : 2.0; }
  Eigen::VectorXd pack(const Eigen::MatrixXd& m) const;
  Eigen::MatrixXd unpack(const Eigen::VectorXd& v) const;
  /// Row vector r with r . pack(tau) = sum_ab W_ab tau_ab for symmetric tau.
  Eigen::VectorXd functional(const Eigen::MatrixXd& W) const;
};

/// Coefficient layout of P_m^{-1}(T^R; R^ncomp): block (piece, comp) holds a
/// degree-m Bernstein array.
class FieldSpace {
public:
  FieldSpace() = default;
  FieldSpace(int d, int degree, int ncomp);

  int dim() const { return d_; }
  int degree() const { return m_; }
  int ncomp() const { return ncomp_; }
  int nalpha() const { return nalpha_; }
  int size() const { return (d_ + 1) * ncomp_ * nalpha_; }
  int offset(int piece, int comp) const { return (piece * ncomp_ + comp) * nalpha_; }

private:
  int d_ = 0, m_ = 0, ncomp_ = 0, nalpha_ = 0;
};

/// Symmetric-tensor fields: ncomp = d(d+1)/2. Vector fields: ncomp = d.
FieldSpace sym_space(int d, int degree);
FieldSpace vec_space(int d, int degree);

/// coef += p * M on every subcell (or only on subcell `piece` when >= 0).
/// M is a symmetric d x d matrix; p is elevated to the layout degree.
void add_sym(Eigen::Ref<Eigen::VectorXd> coef, const FieldSpace& fs, const PwPoly& p,
             const Eigen::MatrixXd& M, int piece = -1);
/// Same as add_sym with a different constant matrix on each subcell.
void add_sym_piecewise(Eigen::Ref<Eigen::VectorXd> coef, const FieldSpace& fs, const PwPoly& p,
                       const std::vector<Eigen::MatrixXd>& M);
/// coef += p * w for a vector field.
void add_vec(Eigen::Ref<Eigen::VectorXd> coef, const FieldSpace& fs, const PwPoly& p,
             const Eigen::VectorXd& w, int piece = -1);
/// Copies a field into a layout of higher degree.
Eigen::MatrixXd elevate_field(const FieldSpace& from, const FieldSpace& to, const Eigen::MatrixXd& coef);

/// Row-wise divergence P_m^{-1}(T^R;S) -> P_{m-1}^{-1}(T^R;R^d).
Eigen::MatrixXd div_matrix(const SplitCell& cell, const FieldSpace& sym);
/// Component values at a point of subcell `piece`: (ncomp x cols).
Eigen::MatrixXd field_values(const FieldSpace& fs, const Eigen::MatrixXd& coef, int piece,
                             const Eigen::VectorXd& mu);
/// Functional row: sum_comp w_comp * value_comp at (piece, mu).
Eigen::RowVectorXd point_functional(const FieldSpace& fs, int piece, const Eigen::VectorXd& mu,
                                    const Eigen::VectorXd& w);
/// Block-diagonal L2 Gram matrix of the layout, with per-component weights.
Eigen::MatrixXd field_mass(const SplitCell& cell, const FieldSpace& fs, const Eigen::VectorXd& comp_weight);

struct QPoint {
  int piece = 0;
  Eigen::VectorXd mu; // barycentrics in the subcell
  Eigen::VectorXd nu; // barycentrics in the integration entity
  Eigen::VectorXd x;  // physical point
  double w = 0;       // physical weight
};

/// Quadrature points covering T (all subcells).
std::vector<QPoint> cell_points(const SplitCell& cell, int degree);
/// Quadrature points on the simplex with the given vertex labels, evaluated
/// from subcell `piece` (which must contain it).
std::vector<QPoint> entity_points(const SplitCell& cell, const std::vector<int>& labels, int piece, int degree);

/// Rigid motions on a cell: constants e_a then rotations x_b e_a - x_a e_b
/// (a < b) about `center`.
Eigen::MatrixXd rm_values(const Eigen::VectorXd& x, const Eigen::VectorXd& center);
int rm_dim(int d);

/// L2 projection of a vector-valued function onto RM of the region covered by
/// the points; returns the RM coefficients.
Eigen::VectorXd l2_project_rm(const std::vector<QPoint>& pts, const Eigen::VectorXd& center,
                              const std::function<Eigen::VectorXd(const QPoint&)>& f);
/// L2 projection onto coarse P_m(T) (scalar); returns Bernstein coefficients.
BPoly l2_project_poly(const SplitCell& cell, int m, const std::function<double(const QPoint&)>& f,
                      int quad_degree);

} // namespace alfeld
