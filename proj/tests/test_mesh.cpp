#include "alfeld/errors.hpp"
#include "alfeld/mesh.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>

using namespace alfeld;

namespace {

Eigen::MatrixXd tri(double a, double b, double c, double d, double e, double f)
{
  Eigen::MatrixXd v(2, 3);
  v << a, c, e, b, d, f;
  return v;
}

} // namespace

TEST(Geometry, ReferenceTriangle)
{
  const CellGeometry g = geometry_pack(tri(0, 0, 1, 0, 0, 1));
  EXPECT_NEAR(g.volume, 0.5, 1e-15);
  EXPECT_NEAR(g.diameter, std::sqrt(2.0), 1e-15);
  // grad lambda sums to zero, and grad lambda_i . (v_j - v_0) = delta_ij - delta_i0
  EXPECT_LT(g.grad.rowwise().sum().norm(), 1e-14);
  for (int i = 0; i < 3; ++i)
    for (int j = 1; j < 3; ++j)
      EXPECT_NEAR(g.grad.col(i).dot(g.t(0, j)), (i == j) - (i == 0), 1e-14);
  // outward normal of the hypotenuse
  EXPECT_NEAR(g.normal(0, 0), 1 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(g.normal(1, 0), 1 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(g.height(0), 1 / std::sqrt(2.0), 1e-15);
}

TEST(Geometry, BarycentricRoundTrip)
{
  const CellGeometry g = geometry_pack(tri(0.1, 0.2, 1.3, 0.1, 0.4, 0.9));
  Eigen::VectorXd x(2);
  x << 0.5, 0.4;
  const Eigen::VectorXd l = g.barycentric(x);
  EXPECT_NEAR(l.sum(), 1.0, 1e-15);
  EXPECT_LT((g.v * l - x).norm(), 1e-14);
  EXPECT_LT((g.barycentric(g.vc).array() - 1.0 / 3).abs().maxCoeff(), 1e-14);
}

TEST(Geometry, DegenerateCellThrows)
{
  EXPECT_THROW(geometry_pack(tri(0, 0, 1, 1, 2, 2)), GeometryError);
}

TEST(Geometry, MeasureOfFace)
{
  Eigen::MatrixXd e(2, 2);
  e << 0, 3, 0, 4;
  EXPECT_NEAR(simplex_measure(e), 5.0, 1e-15);
}

TEST(BoxMesh, Counts2D)
{
  for (int n = 1; n <= 4; ++n) {
    const Mesh m = uniform_box_mesh(2, n);
    EXPECT_EQ(m.num_cells(), 2 * n * n);
    EXPECT_EQ(m.num_vertices(), (n + 1) * (n + 1));
    // Euler: V - E + F = 1
    EXPECT_EQ(m.num_vertices() - m.num_faces() + m.num_cells(), 1);
    EXPECT_EQ(m.num_boundary_faces(), 4 * n);
    EXPECT_NEAR(m.total_volume(), 1.0, 1e-13);
    EXPECT_NEAR(m.max_diameter(), std::sqrt(2.0) / n, 1e-14);
  }
}

TEST(BoxMesh, Counts3D)
{
  for (int n = 1; n <= 3; ++n) {
    const Mesh m = uniform_box_mesh(3, n);
    EXPECT_EQ(m.num_cells(), 6 * n * n * n);
    EXPECT_EQ(m.num_boundary_faces(), 12 * n * n);
    EXPECT_NEAR(m.total_volume(), 1.0, 1e-13);
  }
}

TEST(BoxMesh, FaceOrientation)
{
  const Mesh m = uniform_box_mesh(3, 2);
  for (int c = 0; c < m.num_cells(); ++c) {
    const CellGeometry g = m.geometry(c);
    for (int p = 0; p <= 3; ++p) {
      const MeshFace& f = m.faces[m.cell_faces[c][p]];
      const Eigen::VectorXd n = m.cell_face_sign[c][p] * f.normal;
      EXPECT_LT((n - g.normal.col(p)).norm(), 1e-14);
    }
  }
  for (const auto& f : m.faces) {
    EXPECT_NEAR(f.normal.norm(), 1.0, 1e-14);
    if (!f.boundary())
      EXPECT_LT(f.cell[0], f.cell[1]);
  }
}

TEST(BuildMesh, RejectsHangingVertex)
{
  // the midpoint of the left triangle's hypotenuse is a vertex of two right
  // triangles only
  Eigen::MatrixXd p(2, 5);
  p << 0, 1, 0, 0.5, 1, 0, 0, 1, 0.5, 1;
  EXPECT_THROW(build_mesh(p, {{0, 1, 2}, {1, 3, 4}, {2, 3, 4}}), ConformityError);
}

TEST(BuildMesh, RejectsBadInput)
{
  Eigen::MatrixXd p(2, 3);
  p << 0, 1, 0, 0, 0, 1;
  EXPECT_THROW(build_mesh(p, {{0, 1}}), DomainError);
  EXPECT_THROW(build_mesh(p, {{0, 1, 1}}), DomainError);
  EXPECT_THROW(build_mesh(p, {{0, 1, 7}}), DomainError);
  EXPECT_THROW(uniform_box_mesh(4, 1), DomainError);
}

TEST(MeshIO, RoundTrip)
{
  const Mesh m = uniform_box_mesh(2, 3);
  const std::string path = (std::filesystem::temp_directory_path() / "alfeld_mesh_roundtrip.txt").string();
  write_mesh(path, m);
  const Mesh r = read_mesh(path);
  std::remove(path.c_str());
  EXPECT_EQ(r.cells, m.cells);
  EXPECT_EQ((r.points - m.points).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_THROW(read_mesh(path), DomainError);
}

TEST(Refine, BarycentricSplit)
{
  const Mesh m = uniform_box_mesh(2, 2);
  const SplitMesh s = barycentric_refine(m);
  EXPECT_EQ(s.fine.num_cells(), 3 * m.num_cells());
  EXPECT_NEAR(s.fine.total_volume(), 1.0, 1e-13);
  for (int c = 0; c < m.num_cells(); ++c) {
    double v = 0;
    for (int fc : s.children[c])
      v += s.fine.geometry(fc).volume;
    EXPECT_NEAR(v, m.geometry(c).volume, 1e-15);
    EXPECT_EQ(s.interior_faces[c].size(), 3u);
    for (int f : s.interior_faces[c])
      EXPECT_FALSE(s.fine.faces[f].boundary());
  }
}
