#include "alfeld/errors.hpp"
#include "alfeld/verify.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace alfeld;

TEST(Fixtures, RandomAffineSimplexIsSeededAndTame)
{
  for (int d = 2; d <= 3; ++d) {
    const Eigen::MatrixXd a = random_affine_simplex(d, 9), b = random_affine_simplex(d, 9);
    EXPECT_EQ((a - b).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_GT((a - random_affine_simplex(d, 10)).norm(), 0.0);
    // A maps the reference simplex, so A = [v1 - v0, ..., vd - v0]
    Eigen::MatrixXd A(d, d);
    for (int j = 0; j < d; ++j)
      A.col(j) = a.col(j + 1) - a.col(0);
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    EXPECT_LE(svd.singularValues()(0) / svd.singularValues()(d - 1), 4.0 + 1e-12);
  }
}

TEST(Fixtures, Meshes)
{
  for (int d = 2; d <= 3; ++d) {
    const Mesh m = two_cell_mesh(d);
    EXPECT_EQ(m.num_cells(), 2);
    EXPECT_EQ(m.num_faces() - m.num_boundary_faces(), 1);
  }
  const Mesh c = crisscross_mesh(2);
  EXPECT_EQ(c.num_cells(), 16);
  EXPECT_NEAR(c.total_volume(), 1.0, 1e-14);
}

TEST(Dimensions, RowsCarryFormulaAndRank)
{
  const auto rows = check_dimensions(2, 1);
  EXPECT_EQ(rows.size(), 5u); // three linear families, HighPhiSplit, RTPlus
  for (const auto& r : rows) {
    EXPECT_TRUE(r.ok) << to_string(r.family) << ": " << r.note;
    EXPECT_EQ(r.constructed, r.formula);
  }
  EXPECT_THROW(check_dimension(Family::HighPsi, 2, 1), DomainError);
}

TEST(Intersection, RigidityOracles)
{
  EXPECT_EQ(brute_force_intersection(SplitCell(reference_simplex(2)), 0).dim, 3);
  EXPECT_EQ(brute_force_intersection(SplitCell(random_affine_simplex(2, 4)), 1).dim, 15);
  EXPECT_EQ(brute_force_intersection(SplitCell(reference_simplex(3)), 0).dim, 6);
}

TEST(DivRange, TwoDimensionsDegreeTwo)
{
  const DivRangeReport r = check_div_range(SplitCell(random_affine_simplex(2, 2)), 2);
  EXPECT_EQ(r.coarse_rank, 3);
  EXPECT_EQ(r.coarse_expected, 3);
  EXPECT_EQ(r.split_rank, r.split_expected);
  EXPECT_LE(r.coarse_rm_moment, 1e-11);
  EXPECT_LE(r.nn_trace, 1e-12);
  EXPECT_LE(r.psi_div_rm, 1e-11);
  EXPECT_TRUE(r.ok);
}

TEST(Conformity, PsiElementOnBoxMesh)
{
  const ConformityReport r = check_conformity(uniform_box_mesh(2, 1), Family::HighPsi, 2);
  EXPECT_TRUE(r.ok()) << r.coarse_jump << " " << r.fine_jump;
  EXPECT_GT(r.ndofs, 0);
}

TEST(InfSup, PsiPairIsStable)
{
  const InfSupReport r = infsup_constant(2, {1, 2}, psi_pair(2));
  ASSERT_EQ(r.levels.size(), 2u);
  EXPECT_TRUE(r.positive());
  EXPECT_LT(r.ratio, 1.5);
  EXPECT_EQ(r.levels[1].disp_dofs, 8 * 6);
}

TEST(InfSup, DetectsAnUnstablePair)
{
  // RM stresses cannot control full linear displacements
  PairSpec p{PairSpec::Conforming, Family::LinearRM, 1, DispSpace::poly(1), false, "LinearRM x P1"};
  const InfSupReport r = infsup_constant(2, {1}, p);
  EXPECT_FALSE(r.positive());
  EXPECT_EQ(r.kernel.size(), r.levels[0].disp_dofs);
}

TEST(InfSup, LinearPairRejectsHighFamily)
{
  EXPECT_THROW(linear_pair(Family::HighPsi), DomainError);
}

TEST(Rates, LogRatio)
{
  EXPECT_NEAR(rate(1.0, 0.125, 0.5, 0.25), 3.0, 1e-14);
  EXPECT_NEAR(rate(4.0, 1.0, 1.0, 0.5), 2.0, 1e-14);
}

TEST(Methods, Names)
{
  for (Method m : {Method::Stabilized, Method::Hybrid, Method::LinearPair})
    EXPECT_EQ(method_from_string(to_string(m)), m);
  EXPECT_THROW(method_from_string("dg"), DomainError);
}

TEST(Study, CsvIsDeterministic)
{
  StudyConfig c;
  c.k = 2;
  c.method = Method::Hybrid;
  c.levels = {1, 2};
  const RateTable a = convergence_study(c), b = convergence_study(c);
  std::ostringstream sa, sb;
  a.write_csv(sa);
  b.write_csv(sb);
  EXPECT_EQ(sa.str(), sb.str());
  std::istringstream in(sa.str());
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header.rfind("level,h,dofs,err_sigma_L2,err_sigma_Hdiv,err_u_L2,err_super_1h,err_post_eps,rate_", 0), 0u);
  ASSERT_EQ(a.rows.size(), 2u);
  EXPECT_TRUE(std::isnan(a.rows[0].r_sigma_L2));
  EXPECT_GT(a.rows[1].r_sigma_L2, 1.0);
  EXPECT_LT(a.rows[1].err.sigma_L2, a.rows[0].err.sigma_L2);
}

TEST(Study, LinearPairNeedsLinearFamily)
{
  StudyConfig c;
  c.method = Method::LinearPair;
  c.family = Family::HighPsi;
  c.levels = {1};
  EXPECT_THROW(convergence_study(c), DomainError);
}

TEST(Equivalence, HybridMatchesMixed)
{
  const Mesh m = two_cell_mesh(2);
  EXPECT_LT(hybrid_mixed_difference(m, manufactured_problem(2, 1, 1), 2), 1e-9);
}
