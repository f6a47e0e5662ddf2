#include "alfeld/errors.hpp"
#include "alfeld/frames.hpp"
#include "alfeld/simplex.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace alfeld;

namespace {

Eigen::MatrixXd perturbed_simplex(int d, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(d, d + 1);
  v.rightCols(d) = Eigen::MatrixXd::Identity(d, d);
  for (int a = 0; a < d; ++a)
    for (int j = 0; j <= d; ++j)
      v(a, j) += u(rng);
  return v;
}

double frobenius(const SymIndex& si, const Eigen::VectorXd& a, const Eigen::VectorXd& b)
{
  return (si.unpack(a).array() * si.unpack(b).array()).sum();
}

int rank(const Eigen::MatrixXd& A)
{
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  svd.setThreshold(1e-10);
  return static_cast<int>(svd.rank());
}

} // namespace

TEST(Frame, NormalsAndDuals)
{
  for (int d = 2; d <= 3; ++d) {
    const CellGeometry g = geometry_pack(perturbed_simplex(d, 100 + d));
    for (int l = 0; l < d; ++l)
      for (const IndexSet& f : subsimplices(d, l)) {
        const TNFrame fr = build_frame(g, f);
        EXPECT_EQ(fr.tangents.cols(), l);
        EXPECT_EQ(fr.face_normals.cols(), d - l);
        EXPECT_EQ(static_cast<int>(fr.star.size()), d - l);
        if (l > 0) {
          EXPECT_LT((fr.face_normals.transpose() * fr.tangents).norm(), 1e-13);
          EXPECT_LT((fr.tn_normals.transpose() * fr.tangents).norm(), 1e-13);
        }
        EXPECT_LT((fr.dual_normals.transpose() * fr.face_normals -
                   Eigen::MatrixXd::Identity(d - l, d - l)).norm(),
                  1e-12);
        for (int c = 0; c < d - l; ++c)
          EXPECT_NEAR(fr.tn_normals.col(c).norm(), 1.0, 1e-14);
      }
  }
}

TEST(Frame, NormalAndTangentFramesAreOrthonormal)
{
  Eigen::MatrixXd t(3, 1);
  t << 1, 2, -0.5;
  const Eigen::MatrixXd N = normal_frame(t, 3);
  const Eigen::MatrixXd T = tangent_frame(t);
  ASSERT_EQ(N.cols(), 2);
  ASSERT_EQ(T.cols(), 1);
  EXPECT_LT((N.transpose() * N - Eigen::MatrixXd::Identity(2, 2)).norm(), 1e-14);
  EXPECT_LT((N.transpose() * T).norm(), 1e-14);
  for (int c = 0; c < 2; ++c) {
    int i = 0;
    while (std::abs(N(i, c)) <= 1e-12)
      ++i;
    EXPECT_GT(N(i, c), 0.0);
  }
}

TEST(SymDecomposition, DimensionsAndOrthogonality)
{
  for (int d = 2; d <= 3; ++d) {
    const SymIndex si(d);
    const CellGeometry g = geometry_pack(perturbed_simplex(d, 200 + d));
    for (int l = 0; l < d; ++l)
      for (const IndexSet& f : subsimplices(d, l)) {
        const TNFrame fr = build_frame(g, f);
        const SymSplit s = sym_decompose(fr.tangents, fr.face_normals);
        EXPECT_EQ(s.tt.cols(), l * (l + 1) / 2);
        EXPECT_EQ(s.nn.cols(), (d - l) * (d - l + 1) / 2);
        EXPECT_EQ(s.tn.cols(), l * (d - l));
        EXPECT_EQ(rank(s.all()), si.ns);
        EXPECT_EQ(s.normal_part().cols(), s.nn.cols() + s.tn.cols());
        for (int a = 0; a < s.tt.cols(); ++a) {
          for (int b = 0; b < s.nn.cols(); ++b)
            EXPECT_NEAR(frobenius(si, s.tt.col(a), s.nn.col(b)), 0.0, 1e-13);
          for (int b = 0; b < s.tn.cols(); ++b)
            EXPECT_NEAR(frobenius(si, s.tt.col(a), s.tn.col(b)), 0.0, 1e-13);
        }
        // normal-normal tensors have no tangential-tangential part
        for (int b = 0; b < s.nn.cols(); ++b)
          if (l > 0)
            EXPECT_LT((fr.tangents.transpose() * si.unpack(s.nn.col(b))).norm(), 1e-13);
      }
  }
}

TEST(PhiField, NormalContinuousAcrossFacesContainingF)
{
  for (int d = 2; d <= 3; ++d) {
    const SplitCell cell(perturbed_simplex(d, 300 + d));
    for (int l = 0; l < d - 1; ++l)
      for (const IndexSet& f : subsimplices(d, l)) {
        const IndexSet star = complement_star(f);
        for (int a = 0; a < star.size(); ++a)
          for (int b = a + 1; b < star.size(); ++b) {
            const auto phi = phi_field(cell, f, star[a], star[b]);
            // only faces F_ij that contain f; the split bubble kills the rest
            for (int i = 0; i <= d; ++i)
              for (int j = i + 1; j <= d; ++j) {
                if (f.contains(i) || f.contains(j))
                  continue;
                // normal of F_ij: gradient of the hat of j restricted to T_i
                const SubCell& s = cell.sub(i);
                const Eigen::VectorXd n = s.grad.col(s.pos[j]).normalized();
                EXPECT_LT(((phi[i] - phi[j]) * n).norm(), 1e-13)
                    << "f=" << f.str() << " pair " << star[a] << star[b] << " face " << i << j;
              }
          }
      }
  }
}

TEST(PhiField, RejectsLabelsOutsideStar)
{
  const SplitCell cell(perturbed_simplex(2, 7));
  EXPECT_THROW(phi_field(cell, IndexSet(2, {0}), 0, 1), DomainError);
}

TEST(QnfMap, SquareAndInvertible)
{
  for (int d = 2; d <= 3; ++d) {
    const SplitCell cell(perturbed_simplex(d, 400 + d));
    for (int l = 0; l < d; ++l)
      for (const IndexSet& f : subsimplices(d, l)) {
        const Eigen::MatrixXd A = qnf_matrix(cell, f);
        ASSERT_EQ(A.rows(), A.cols()) << f.str();
        EXPECT_EQ(rank(A), A.rows()) << f.str();
      }
  }
}
