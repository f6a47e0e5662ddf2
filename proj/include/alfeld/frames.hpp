// SPDX-License-Identifier: MIT
//
// Tangential-normal frames of subsimplices and the t-n splitting of S.
#pragma once

#include "alfeld/mesh.hpp"
#include "alfeld/poly.hpp"
#include "alfeld/simplex.hpp"

#include <Eigen/Dense>

#include <vector>

namespace alfeld {

struct TNFrame {
  IndexSet f;
  std::vector<int> star;       // f*, increasing
  Eigen::MatrixXd tangents;    // d x l, t_{f(0), f(m)}
  Eigen::MatrixXd face_normals; // d x (d-l), n_{F_i} for i in f*
  Eigen::MatrixXd tn_normals;   // d x (d-l), unit n^f_{f+i}
  Eigen::MatrixXd dual_normals; // tn_normals scaled so that dual . face_normals = I
};

/// f must be a subsimplex of T of dimension <= d-1.
TNFrame build_frame(const CellGeometry& g, const IndexSet& f);

/// Edge vectors t_{f(0), f(m)}, m = 1..l; labels may contain the barycenter.
Eigen::MatrixXd edge_tangents(const CellGeometry& g, const std::vector<int>& labels);

/// Orthonormal basis of the complement of span(tangents). Each column has its
/// first entry of magnitude > 1e-12 positive.
Eigen::MatrixXd normal_frame(const Eigen::MatrixXd& tangents, int d);

/// Orthonormal tangent basis of span(tangents), same sign rule.
Eigen::MatrixXd tangent_frame(const Eigen::MatrixXd& tangents);

/// sym(a b^T)
Eigen::MatrixXd sym_outer(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// T^f(S), S(N^f) and sym(T^f x N^f) as matrices whose columns are packed
/// symmetric tensors.
struct SymSplit {
  Eigen::MatrixXd tt;
  Eigen::MatrixXd nn;
  Eigen::MatrixXd tn;

  /// N^f(S) = S(N^f) + sym(T^f x N^f)
  Eigen::MatrixXd normal_part() const;
  Eigen::MatrixXd all() const;
};

SymSplit sym_decompose(const Eigen::MatrixXd& tangents, const Eigen::MatrixXd& normals);
/// Uses the face normal basis for f of dimension < d; N^f is empty for dim f = d.
SymSplit sym_decompose(const CellGeometry& g, const IndexSet& f);

/// phi^f_ij on T^R as one constant matrix per subcell. i, j in f*.
std::vector<Eigen::MatrixXd> phi_field(const SplitCell& cell, const IndexSet& f, int i, int j);

/// The map tau -> (tau n_{F_i} on T_i)_{i in f*} on P_0(T; N^f(S)) + Phi^f(S).
/// Rows are grouped per i in f*; columns list N^f(S) first, then phi_ij, i<j.
Eigen::MatrixXd qnf_matrix(const SplitCell& cell, const IndexSet& f);

} // namespace alfeld
