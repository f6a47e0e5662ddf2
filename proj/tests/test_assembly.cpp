#include "alfeld/assembly.hpp"
#include "alfeld/errors.hpp"
#include "alfeld/verify.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace alfeld;

namespace {

// u = (b, b) with b = x(1-x)y(1-y): sigma is a cubic and f a quadratic, so
// degree-3 stresses whose divergence is a coarse quadratic reproduce sigma
// exactly. The stabilized method is left out: its split stresses have
// piecewise divergence against coarse displacements.
ElasticityProblem polynomial_problem(double mu, double lambda)
{
  ElasticityProblem pb;
  pb.d = 2;
  pb.mu = mu;
  pb.lambda = lambda;
  auto bx = [](double x, double y) { return (1 - 2 * x) * y * (1 - y); };
  auto by = [](double x, double y) { return x * (1 - x) * (1 - 2 * y); };
  pb.u = [](const Eigen::VectorXd& p) {
    const double b = p(0) * (1 - p(0)) * p(1) * (1 - p(1));
    return Eigen::VectorXd(Eigen::Vector2d(b, b));
  };
  pb.grad_u = [=](const Eigen::VectorXd& p) {
    Eigen::MatrixXd g(2, 2);
    g << bx(p(0), p(1)), by(p(0), p(1)), bx(p(0), p(1)), by(p(0), p(1));
    return g;
  };
  pb.sigma = [=](const Eigen::VectorXd& p) {
    const double ux = bx(p(0), p(1)), uy = by(p(0), p(1));
    Eigen::MatrixXd s(2, 2);
    s << 2 * mu * ux, mu * (ux + uy), mu * (ux + uy), 2 * mu * uy;
    s.diagonal().array() += lambda * (ux + uy);
    return s;
  };
  pb.f = [=](const Eigen::VectorXd& p) {
    const double x = p(0), y = p(1);
    const double bxx = -2 * y * (1 - y), byy = -2 * x * (1 - x), bxy = (1 - 2 * x) * (1 - 2 * y);
    const double r0 = 2 * mu * bxx + lambda * (bxx + bxy) + mu * (bxy + byy);
    const double r1 = mu * (bxx + bxy) + 2 * mu * byy + lambda * (bxy + byy);
    return Eigen::VectorXd(Eigen::Vector2d(-r0, -r1));
  };
  return pb;
}

Eigen::MatrixXd fd_div(const MatrixFn& s, const Eigen::VectorXd& x)
{
  const int d = static_cast<int>(x.size());
  const double h = 1e-5;
  Eigen::VectorXd r = Eigen::VectorXd::Zero(d);
  for (int b = 0; b < d; ++b) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(d);
    e(b) = h;
    r += (s(x + e) - s(x - e)).col(b) / (2 * h);
  }
  return r;
}

} // namespace

TEST(Compliance, InvertsHooke)
{
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int d = 2; d <= 3; ++d)
    for (double lambda : {0.0, 1.0, 1e6}) {
      Eigen::MatrixXd e(d, d);
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
          e(a, b) = u(rng);
      e = (e + e.transpose()).eval();
      const double mu = 0.7;
      Eigen::MatrixXd s = 2 * mu * e;
      s.diagonal().array() += lambda * e.trace();
      EXPECT_LT((compliance(s, mu, lambda) - e).norm(), 1e-9 * (1 + lambda));
      EXPECT_LT((compliance(s, mu, lambda) - compliance_dev_tr(s, mu, lambda)).norm(), 1e-12 * (1 + lambda));
    }
}

TEST(Problems, ManufacturedLoadIsMinusDivSigma)
{
  for (int d = 2; d <= 3; ++d) {
    const ElasticityProblem pb = manufactured_problem(d, 1.3, 2.1);
    Eigen::VectorXd x = Eigen::VectorXd::Constant(d, 0.31);
    x(0) = 0.62;
    EXPECT_LT((pb.f(x) + fd_div(pb.sigma, x)).norm(), 1e-6);
    EXPECT_LT(pb.u(Eigen::VectorXd::Zero(d)).norm(), 1e-15);
  }
}

TEST(Problems, DivergenceFreeFieldIgnoresLambda)
{
  const ElasticityProblem a = divergence_free_problem(1, 1), b = divergence_free_problem(1, 1e6);
  const Eigen::Vector2d x(0.3, 0.55);
  EXPECT_NEAR(a.grad_u(x).trace(), 0.0, 1e-13);
  EXPECT_LT((a.sigma(x) - b.sigma(x)).norm(), 1e-12);
  EXPECT_LT((a.f(x) + fd_div(a.sigma, x)).norm(), 1e-6);
}

TEST(Problems, PolynomialFixtureIsConsistent)
{
  const ElasticityProblem pb = polynomial_problem(1, 2);
  const Eigen::Vector2d x(0.27, 0.8);
  EXPECT_LT((pb.f(x) + fd_div(pb.sigma, x)).norm(), 1e-8);
}

TEST(GlobalSpaceTest, Counts)
{
  const Mesh m = uniform_box_mesh(2, 2);
  ElementCache cache;
  const GlobalSpace g = global_space(m, Family::HighReduced, 2, &cache);
  EXPECT_EQ(g.ndofs, m.num_faces() * g.face_dofs + m.num_cells() * g.cell_dofs);
  EXPECT_EQ(g.num_boundary_dofs(), m.num_boundary_faces() * g.face_dofs);
  // translation invariance leaves only a few distinct elements
  EXPECT_LE(cache.size(), 8u);
  for (const auto& map : g.cell_map)
    for (int i : map) {
      EXPECT_GE(i, 0);
      EXPECT_LT(i, g.ndofs);
    }
}

TEST(DispSpaceTest, Sizes)
{
  EXPECT_EQ(DispSpace::poly(1).per_cell(2), 6);
  EXPECT_EQ(DispSpace::poly(2).per_cell(3), 30);
  EXPECT_EQ(DispSpace::rm().per_cell(2), 3);
  EXPECT_EQ(DispSpace::rm().per_cell(3), 6);
  const CellGeometry g = geometry_pack(reference_simplex(3));
  EXPECT_EQ(disp_basis(g, DispSpace::rm()).cols(), 6);
}

TEST(Solvers, ReproducePolynomialStress)
{
  const Mesh m = uniform_box_mesh(2, 2);
  const ElasticityProblem pb = polynomial_problem(1, 2);
  DiscreteSolution h = solve_hybrid(m, pb, 3);
  postprocess_displacement(h, pb);
  const ErrorNorms eh = error_norms(h, pb);
  EXPECT_LT(eh.sigma_L2, 1e-10);
  EXPECT_LT(eh.sigma_Hdiv, 1e-9);
  EXPECT_LT(eh.super_1h, 1e-9);
  EXPECT_LT(eh.post_eps, 1e-9);
  EXPECT_GT(h.report.min_pivot, 0.0);

  const ErrorNorms em = error_norms(solve_mixed(m, pb, Family::HighPsi, 3, DispSpace::poly(2)), pb);
  EXPECT_LT(em.sigma_L2, 1e-10);
}

TEST(Solvers, BackwardErrorReported)
{
  const Mesh m = uniform_box_mesh(2, 2);
  const ElasticityProblem pb = manufactured_problem(2, 1, 1);
  const DiscreteSolution s = solve_stabilized(m, pb, 2);
  EXPECT_LE(s.report.residual, 1e-12);
  EXPECT_EQ(s.report.method, "stabilized");
  EXPECT_THROW(solve_hybrid(m, pb, 1), DomainError);
}

TEST(Solvers, DiscreteStressIsNormalContinuous)
{
  const Mesh m = uniform_box_mesh(2, 2);
  const ElasticityProblem pb = manufactured_problem(2, 1, 1);
  EXPECT_LT(solution_normal_jump(solve_hybrid(m, pb, 2)), 1e-10);
  EXPECT_LT(solution_normal_jump(solve_stabilized(m, pb, 2)), 1e-10);
}

TEST(Solvers, LinearPairsRun)
{
  const Mesh m = uniform_box_mesh(2, 2);
  const ElasticityProblem pb = manufactured_problem(2, 1, 1);
  for (Family f : {Family::LinearPhiSplit, Family::LinearReduced, Family::LinearRM}) {
    const DispSpace ds = f == Family::LinearPhiSplit ? DispSpace::poly(1) : DispSpace::rm();
    const ErrorNorms e = error_norms(solve_mixed(m, pb, f, 1, ds), pb);
    EXPECT_TRUE(std::isfinite(e.sigma_L2)) << to_string(f);
    EXPECT_LT(e.sigma_L2, e.sigma_norm);
  }
}
