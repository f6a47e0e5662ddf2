// SPDX-License-Identifier: MIT
#pragma once

#include <Eigen/Dense>

#include <array>
#include <string>
#include <utility>
#include <vector>

namespace alfeld {

/// Per-cell geometric quantities of a d-simplex in R^d. Label d+1 means the
/// barycenter v_c wherever a vertex label is accepted.
struct CellGeometry {
  int d = 0;
  Eigen::MatrixXd v;      // d x (d+1)
  Eigen::VectorXd vc;     // barycenter
  Eigen::MatrixXd grad;   // column i: grad lambda_i
  Eigen::MatrixXd normal; // column i: outward unit normal of F_i
  Eigen::VectorXd height; // h_i = dist(v_i, F_i)
  double volume = 0;
  double diameter = 0;

  Eigen::VectorXd vertex(int label) const { return label == d + 1 ? vc : Eigen::VectorXd(v.col(label)); }
  /// t_{i,j} = v_j - v_i; j (or i) may be the barycenter label d+1.
  Eigen::VectorXd t(int i, int j) const { return vertex(j) - vertex(i); }
  Eigen::VectorXd barycentric(const Eigen::VectorXd& x) const;
};

CellGeometry geometry_pack(const Eigen::MatrixXd& vertices);

/// l-dimensional measure of the simplex spanned by the columns of p (d x (l+1)).
double simplex_measure(const Eigen::MatrixXd& p);

struct MeshFace {
  std::vector<int> verts;          // sorted global vertex ids
  std::array<int, 2> cell{-1, -1}; // cell[0] < cell[1]; cell[1] = -1 on the boundary
  std::array<int, 2> local{-1, -1};
  Eigen::VectorXd normal;          // outward from cell[0]
  bool boundary() const { return cell[1] < 0; }
};

class Mesh {
public:
  int dim = 0;
  Eigen::MatrixXd points;              // d x nv
  std::vector<std::vector<int>> cells; // sorted vertex ids
  std::vector<MeshFace> faces;
  std::vector<std::vector<int>> cell_faces;     // local face p (opposite local vertex p) -> face id
  std::vector<std::vector<int>> cell_face_sign; // +1 if the stored normal is outward for the cell

  int num_vertices() const { return static_cast<int>(points.cols()); }
  int num_cells() const { return static_cast<int>(cells.size()); }
  int num_faces() const { return static_cast<int>(faces.size()); }
  int num_boundary_faces() const;
  Eigen::MatrixXd cell_vertices(int c) const;
  CellGeometry geometry(int c) const;
  double max_diameter() const;
  double total_volume() const;
};

/// Validates and builds face tables. Throws GeometryError or ConformityError.
Mesh build_mesh(const Eigen::MatrixXd& points, const std::vector<std::vector<int>>& cells);

/// Freudenthal/Kuhn triangulation of (0,1)^d with n^d subcubes.
Mesh uniform_box_mesh(int d, int n);

Mesh read_mesh(const std::string& path);
void write_mesh(const std::string& path, const Mesh& mesh);

struct SplitMesh {
  Mesh coarse;
  Mesh fine;
  std::vector<std::pair<int, int>> parent;       // fine cell -> (coarse cell, i)
  std::vector<int> barycenter;                   // coarse cell -> vertex id in fine
  std::vector<std::vector<int>> children;        // coarse cell -> fine cell of T_i
  std::vector<std::vector<int>> interior_faces;  // coarse cell -> fine face id of F_ij, pairs lexicographic
};

SplitMesh barycentric_refine(const Mesh& mesh);

} // namespace alfeld
