#include "alfeld/elements.hpp"
#include "alfeld/errors.hpp"
#include "alfeld/verify.hpp"

#include <gtest/gtest.h>

using namespace alfeld;

TEST(Families, NamesRoundTrip)
{
  for (Family f : all_families())
    EXPECT_EQ(family_from_string(to_string(f)), f);
  EXPECT_EQ(family_from_string("high-psi"), Family::HighPsi);
  EXPECT_EQ(family_from_string("linear-phi-split"), Family::LinearPhiSplit);
  EXPECT_EQ(family_from_string("rt-plus"), Family::RTPlus);
  EXPECT_THROW(family_from_string("bdm"), DomainError);
}

TEST(Families, Admissibility)
{
  EXPECT_TRUE(admissible(Family::LinearRM, 2, 1));
  EXPECT_FALSE(admissible(Family::LinearRM, 2, 2));
  EXPECT_TRUE(admissible(Family::HighPsi, 3, 2));
  EXPECT_FALSE(admissible(Family::HighPsi, 3, 1));
  EXPECT_FALSE(admissible(Family::HighPsi, 4, 2));
}

TEST(DimensionFormula, ClosedFormValues)
{
  EXPECT_EQ(dimension_formula(Family::LinearPhiSplit, 2, 1), 15);
  EXPECT_EQ(dimension_formula(Family::LinearPhiSplit, 3, 1), 42);
  EXPECT_EQ(dimension_formula(Family::LinearRM, 2, 1), 9);
  EXPECT_EQ(dimension_formula(Family::LinearRM, 3, 1), 24);
  EXPECT_EQ(dimension_formula(Family::LinearReduced, 2, 1), 12);
  EXPECT_EQ(dimension_formula(Family::LinearReduced, 3, 1), 36);
  EXPECT_EQ(dimension_formula(Family::HighPhiSplit, 2, 2), 36);
  EXPECT_EQ(dimension_formula(Family::HighPhiNN, 2, 2), 42);
  EXPECT_EQ(dimension_formula(Family::HighReduced, 2, 2), 21);
  EXPECT_EQ(dimension_formula(Family::HighPsi, 2, 2), 21);
  // the general split count reproduces the linear one
  for (int d = 2; d <= 3; ++d)
    EXPECT_EQ(dimension_formula(Family::HighPhiSplit, d, 1), d * (d + 1) * (2 * d + 1) / 2);
}

TEST(Build, LinearElementsOnReference)
{
  for (int d = 2; d <= 3; ++d)
    for (Family f : {Family::LinearPhiSplit, Family::LinearReduced, Family::LinearRM}) {
      const ElementSpace e = build_element(f, reference_simplex(d), 1);
      EXPECT_EQ(e.dim(), dimension_formula(f, d, 1)) << to_string(f) << " d=" << d;
      EXPECT_TRUE(e.report.ok);
      EXPECT_LT(e.report.cond, 1e8);
    }
}

TEST(Build, NodalBasisIsDualToDofs)
{
  for (Family f : {Family::HighPhiSplit, Family::HighReduced, Family::HighPsi, Family::RTPlus}) {
    const ElementSpace e = build_element(f, random_affine_simplex(2, 5), 2);
    const Eigen::MatrixXd I = e.dof_rows * e.nodal;
    EXPECT_LT((I - Eigen::MatrixXd::Identity(e.dim(), e.dim())).cwiseAbs().maxCoeff(), 1e-9) << to_string(f);
    EXPECT_EQ((e.d + 1) * e.face_dofs + e.cell_dofs, e.dim());
  }
}

TEST(Build, FaceDofCountsForHybridization)
{
  // d P_k(F) moments per face
  for (int d = 2; d <= 3; ++d) {
    const ElementSpace e = build_element(Family::HighPsi, reference_simplex(d), 2);
    EXPECT_EQ(e.face_dofs, d * binomial(2 + d - 1, d - 1));
  }
}

TEST(Build, FaceSignsFlipFaceDofs)
{
  const Eigen::MatrixXd V = reference_simplex(2);
  const ElementSpace a = build_element(Family::HighReduced, V, 2);
  const ElementSpace b = build_element(Family::HighReduced, V, 2, {1, -1, 1});
  EXPECT_LT((a.global_normal(1) + b.global_normal(1)).norm(), 1e-15);
  EXPECT_EQ(a.dim(), b.dim());
}

TEST(Build, RejectsInadmissible)
{
  EXPECT_THROW(build_element(Family::HighPsi, reference_simplex(2), 1), DomainError);
}

TEST(DivBubbles, RanksOnTheCoarseCell)
{
  // 1/2 d (d+1) C(k+d-2, d)
  const int want[2][2] = {{3, 9}, {6, 24}};
  for (int d = 2; d <= 3; ++d)
    for (int k = 2; k <= 3; ++k) {
      const SplitCell cell(random_affine_simplex(d, 10 + k));
      const FieldSpace fs = sym_space(d, k);
      const Eigen::MatrixXd B = div_bubble_space(cell, fs, k);
      EXPECT_EQ(B.cols(), want[d - 2][k - 2]);
      EXPECT_LT((boundary_trace_matrix(cell, fs) * B).cwiseAbs().maxCoeff(), 1e-11);
    }
}

TEST(RigidMotionFields, OrthogonalComplement)
{
  const SplitCell cell(random_affine_simplex(3, 21));
  const FieldSpace vfs = vec_space(3, 2);
  const Eigen::VectorXd c = cell.geometry().vc;
  const Eigen::MatrixXd R = rm_fields(cell, vfs, c);
  EXPECT_EQ(R.cols(), 6);
  const Eigen::MatrixXd P = rm_complement_projector(cell, vfs);
  EXPECT_LT((P * R).cwiseAbs().maxCoeff(), 1e-11);
  EXPECT_LT((P * P - P).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(LinearAlgebra, RankOrthNull)
{
  Eigen::MatrixXd A(3, 4);
  A << 1, 2, 3, 4, 2, 4, 6, 8, 0, 1, 0, 1;
  EXPECT_EQ(numerical_rank(A), 2);
  const Eigen::MatrixXd Q = orth(A);
  EXPECT_EQ(Q.cols(), 2);
  EXPECT_LT((Q.transpose() * Q - Eigen::MatrixXd::Identity(2, 2)).norm(), 1e-14);
  const Eigen::MatrixXd N = null_space(A);
  EXPECT_EQ(N.cols(), 2);
  EXPECT_LT((A * N).norm(), 1e-13);
}

TEST(NedelecFaceSpace, Dimensions)
{
  Eigen::MatrixXd F(3, 3);
  F << 0, 1, 0, 0, 0, 1, 0.2, 0, 0;
  EXPECT_EQ(nd_space(F, 0).size(), 3);
  EXPECT_EQ(nd_space(F, 1).size(), 8);
  Eigen::MatrixXd E(2, 2);
  E << 0, 1, 0, 1;
  EXPECT_EQ(nd_space(E, 2).size(), 3);
}

TEST(Unisolvence, AffineImagesSpotCheck)
{
  for (std::uint64_t seed = 1; seed <= 2; ++seed)
    for (Family f : {Family::HighPhiSplit, Family::HighPsi}) {
      const ElementSpace e = build_element(f, random_affine_simplex(2, seed), 3);
      EXPECT_TRUE(e.report.ok);
      EXPECT_LT(e.report.cond, 1e8);
    }
}

TEST(Conformity, ReducedElementOnTwoCells)
{
  const ConformityReport r = check_conformity(two_cell_mesh(2), Family::HighReduced, 2);
  EXPECT_TRUE(r.ok()) << r.coarse_jump << " " << r.fine_jump;
}
