// SPDX-License-Identifier: MIT
//
// Local H(div; S) element families on a simplex and its barycentric split.
// Every element lives in a common ambient layout P_m^{-1}(T^R; S) (see
// FieldSpace); shape functions and DoFs are columns and rows over that layout.
#pragma once

#include "alfeld/frames.hpp"
#include "alfeld/poly.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace alfeld {

enum class Family {
  LinearPhiSplit, // Sigma_{1,phi}(T^R; S)
  LinearReduced,  // Sigma_{1,phi}(T; S)
  LinearRM,       // Sigma_RM(T; S)
  HighPhiSplit,   // Sigma_{k,phi}(T^R; S)
  HighPhiNN,      // Sigma_{k,phi,nn}(T^R; S)
  HighReduced,    // Sigma_{k,phi}(T; S)
  HighPsi,        // Sigma_{k,psi}(T; S)
  RTPlus,         // Sigma^{div,+}_{k,phi}(T; S)
};

const std::vector<Family>& all_families();
std::string to_string(Family f);
/// Accepts the command-line spellings (e.g. "high-psi").
Family family_from_string(const std::string& s);
bool is_linear(Family f);
/// Range of k for which the family is defined (linear families: k = 1).
bool admissible(Family f, int d, int k);
/// Degree of the ambient layout used to store the family.
int ambient_degree(Family f, int d, int k);
/// Closed-form local dimension.
long long dimension_formula(Family f, int d, int k);

enum class DofKind {
  FaceMoment,       // int_F tau n_F . q, q in a face test space
  CellMoment,       // int_T tau : q
  SubcellMoment,    // int_{T_i} tau : q, q in B_k(div, T_i; S)
  NNMoment,         // int_f n_a^T tau n_b q on an interior subsimplex
  TNFaceMoment,     // int_F (Pi_F tau n_F) . q, q in ND(F)
  NNFaceMoment,     // int_F n_F^T tau n_F p on an interior face
  CorrectionMoment, // int_T tau : (Ext(b) - b) for an interior-face nn-bubble b
};

struct DofFunctional {
  DofKind kind;
  std::vector<int> locus; // vertex labels of the carrier (c = d+1)
  int face = -1;          // local coarse face for FaceMoment
  int index = 0;          // test function index within its block
};

struct UnisolvenceReport {
  int n = 0;
  double cond = 0;
  double smin = 0;
  bool ok = false;
};

struct ElementSpace {
  Family family = Family::HighReduced;
  int d = 0;
  int k = 0;
  SplitCell cell;
  FieldSpace fs;
  std::vector<int> face_sign;      // +1: n_F is the outward normal of local face p
  Eigen::MatrixXd generators;      // raw spanning set
  Eigen::MatrixXd shape;           // orthonormal basis of the span
  std::vector<DofFunctional> dofs; // face blocks p = 0..d, then cell DoFs
  Eigen::MatrixXd dof_rows;        // functionals over the ambient layout
  Eigen::MatrixXd V;               // dof_rows * shape
  Eigen::MatrixXd nodal;           // shape * V^{-1}
  UnisolvenceReport report;
  int face_dofs = 0;               // per coarse face
  int cell_dofs = 0;

  int dim() const { return static_cast<int>(shape.cols()); }
  Eigen::VectorXd global_normal(int p) const;
};

/// Builds and certifies the element on the simplex with the given vertices.
/// face_sign defaults to all +1. Throws CertificationError when the span has
/// the wrong size or cond(V) >= 1e8.
ElementSpace build_element(Family family, const Eigen::MatrixXd& vertices, int k,
                           const std::vector<int>& face_sign = {});

/// Spanning set only (no DoFs), for direct-sum and dimension checks.
Eigen::MatrixXd element_generators(Family family, const SplitCell& cell, int k);

UnisolvenceReport unisolvence_certificate(const ElementSpace& e);

// ---------------------------------------------------------------------------
// Building blocks

/// Numerical rank with relative threshold.
int numerical_rank(const Eigen::MatrixXd& A, double rtol = 1e-10);
/// Orthonormal basis of the column span / null space.
Eigen::MatrixXd orth(const Eigen::MatrixXd& A, double rtol = 1e-10);
Eigen::MatrixXd null_space(const Eigen::MatrixXd& A, double rtol = 1e-10);

/// Packed unit symmetric tensor for component s (1 at (a,b) and (b,a)).
Eigen::MatrixXd sym_unit(int d, int s);

/// Frobenius-weighted L2 Gram matrix of a symmetric-tensor layout.
Eigen::MatrixXd sym_mass(const SplitCell& cell, const FieldSpace& fs);

/// Normal traces tau n on the d+1 coarse faces (outward normals), one block
/// of d x nalpha(F) coefficients per face.
Eigen::MatrixXd boundary_trace_matrix(const SplitCell& cell, const FieldSpace& fs);
/// Normal jumps across the interior faces F_ij, i < j, with n_F outward from T_i.
Eigen::MatrixXd interior_jump_matrix(const SplitCell& cell, const FieldSpace& fs);
/// Unit normal of F_ij pointing out of T_i.
Eigen::VectorXd interior_normal(const SplitCell& cell, int i, int j);

/// Coarse P_r(T; S) embedded into the layout.
Eigen::MatrixXd coarse_sym_polys(const SplitCell& cell, const FieldSpace& fs, int r);

/// B_k(div, T; S) on the coarse cell (piece = -1) or on subcell T_piece,
/// written into fs (degree >= k). Certified against the null space of the
/// boundary trace map; throws CertificationError on a rank mismatch.
Eigen::MatrixXd div_bubble_space(const SplitCell& cell, const FieldSpace& fs, int k, int piece = -1);

/// Rigid motions of a region in the vector layout of degree >= 1 (exact).
Eigen::MatrixXd rm_fields(const SplitCell& cell, const FieldSpace& vfs, const Eigen::VectorXd& center, int piece = -1);

/// L2 projector onto (RM)^perp in the vector layout, restricted to `piece`
/// (or all of T when piece = -1): returns I - R (R^T M R)^{-1} R^T M.
Eigen::MatrixXd rm_complement_projector(const SplitCell& cell, const FieldSpace& vfs, int piece = -1);

/// Ext for normal-normal bubbles: subtracts b_0 in B_{d+1}(div, T_piece; S)
/// with div b_0 = (I - Q_RM(T_piece)) div b. The per-subcell bubble spaces
/// and factorizations are built once.
class NNExtender {
public:
  NNExtender(const SplitCell& cell, const FieldSpace& fs);
  /// Throws NumericalError when the least-squares residual exceeds 1e-10.
  Eigen::VectorXd apply(int piece, const Eigen::VectorXd& b) const;

private:
  FieldSpace fs_;
  Eigen::MatrixXd D_;
  std::vector<Eigen::MatrixXd> bubbles_;
  std::vector<Eigen::MatrixXd> proj_;
  std::vector<Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>> cod_;
};

Eigen::VectorXd ext_nn(const SplitCell& cell, const FieldSpace& fs, int piece, const Eigen::VectorXd& b);

/// Interior bubble space span cap H_0(div, T; S) with a factorized
/// divergence; `span` is Sigma_{k,phi}(T^R; S), plus the nn-extensions when
/// k <= d. The div rank is certified against the predicted value.
class PsiExtender {
public:
  PsiExtender(const SplitCell& cell, const FieldSpace& fs, int k, const Eigen::MatrixXd& span);
  /// phi - b_0 with div b_0 = (I - Q_RM(T)) div phi.
  Eigen::VectorXd apply(const Eigen::VectorXd& phi) const;
  int bubble_dim() const { return static_cast<int>(bubbles_.cols()); }
  int div_rank() const { return div_rank_; }
  const Eigen::MatrixXd& bubbles() const { return bubbles_; }

private:
  Eigen::MatrixXd bubbles_;
  Eigen::MatrixXd D_;
  Eigen::MatrixXd P_;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod_;
  int div_rank_ = 0;
};

/// ND_m(F) on a (d-1)-face in an orthonormal tangent frame, stored as
/// monomial coefficients in the scaled local coordinate y = E^T (x - x0) / h.
struct NDSpace {
  int dim_face = 0;             // d - 1
  int order = 0;                // m
  Eigen::MatrixXd frame;        // d x (d-1) orthonormal tangents
  Eigen::VectorXd origin;
  double scale = 1;
  std::vector<std::vector<int>> monomials; // exponents, total degree <= m+1
  Eigen::MatrixXd coef;         // (nmono * (d-1)) x dim, component-major

  int size() const { return static_cast<int>(coef.cols()); }
  /// Basis values at x: (d-1) x size, in the tangent frame.
  Eigen::MatrixXd values(const Eigen::VectorXd& x) const;
};

NDSpace nd_space(const Eigen::MatrixXd& face_vertices, int m);

} // namespace alfeld
