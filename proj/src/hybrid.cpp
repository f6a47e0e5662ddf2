// SPDX-License-Identifier: MIT
//
// Hybridization: stresses and displacements are fully discontinuous, normal
// continuity is imposed by multipliers on interior faces, and the local
// saddle-point problems are eliminated in favor of the multipliers.
#include "alfeld/assembly.hpp"
#include "alfeld/errors.hpp"

#include "assembly_detail.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <map>

namespace alfeld {

namespace {

struct LocalSystem {
  detail::LocalOps ops;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu; // [[A, B^T], [B, 0]]
  Eigen::MatrixXd C;                       // coupling to the d+1 face multiplier blocks
  Eigen::MatrixXd KiC;                     // K^{-1} C
};

} // namespace

DiscreteSolution solve_hybrid(const Mesh& mesh, const ElasticityProblem& pb, int k, const SolveOptions& opt)
{
  if (k < 2)
    throw DomainError("solve_hybrid: k >= 2 required");
  const int d = mesh.dim;
  const GlobalSpace S = global_space(mesh, Family::HighPsi, k, opt.cache);
  const DispSpace ds = DispSpace::poly(k - 1);
  const int nu = ds.per_cell(d);
  const int nb = MultiIndexSet::get(d, k).size();
  const int nm = d * nb; // multiplier unknowns per face
  if (S.face_dofs != nm)
    throw CertificationError("solve_hybrid: face DoFs do not match the multiplier space");

  // interior faces get consecutive multiplier blocks
  std::vector<int> mface(mesh.num_faces(), -1);
  int nint = 0;
  for (int f = 0; f < mesh.num_faces(); ++f)
    if (!mesh.faces[f].boundary())
      mface[f] = nint++;

  std::map<const ElementSpace*, LocalSystem> local;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const ElementSpace* e = S.element[c].get();
    if (local.count(e))
      continue;
    LocalSystem ls;
    ls.ops = detail::local_ops(*e, ds, pb.mu, pb.lambda);
    const int n = e->dim();
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + nu, n + nu);
    K.topLeftCorner(n, n) = ls.ops.A;
    K.bottomLeftCorner(nu, n) = ls.ops.B;
    K.topRightCorner(n, nu) = ls.ops.B.transpose();
    ls.lu.compute(K);
    if (std::abs(ls.lu.determinant()) == 0.0 || !std::isfinite(ls.lu.rcond()) || ls.lu.rcond() < 1e-14)
      throw NumericalError("solve_hybrid: singular local saddle-point matrix");
    // int_F tau_j n_T . q_t = face_sign meas_F delta_jt for the normalized face moments
    ls.C = Eigen::MatrixXd::Zero(n + nu, (d + 1) * nm);
    for (int p = 0; p <= d; ++p) {
      std::vector<int> labels;
      for (int l = 0; l <= d; ++l)
        if (l != p)
          labels.push_back(l);
      const double meas = simplex_measure(e->cell.vertices(labels));
      const double sign = e->face_sign.empty() ? 1.0 : e->face_sign[p];
      for (int t = 0; t < nm; ++t)
        ls.C(p * nm + t, p * nm + t) = -sign * meas;
    }
    ls.KiC = ls.lu.solve(ls.C);
    local.emplace(e, std::move(ls));
  }

  const int qd = opt.quad_degree > 0 ? opt.quad_degree : 2 * std::max(S.element[0]->fs.degree(), k + 2);
  const int N = nint * nm;
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(N);
  std::vector<Eigen::VectorXd> Kig(mesh.num_cells());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const ElementSpace& e = *S.element[c];
    const LocalSystem& ls = local.at(&e);
    const int n = e.dim();
    Eigen::VectorXd Fv, Fd;
    detail::local_loads(S.cell[c], e, ls.ops, ds, pb.f, qd, Fv, Fd);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n + nu);
    g.tail(nu) = -Fv;
    Kig[c] = ls.lu.solve(g);
    const Eigen::MatrixXd Sl = ls.C.transpose() * ls.KiC;
    const Eigen::VectorXd rl = ls.C.transpose() * Kig[c];
    for (int p = 0; p <= d; ++p) {
      const int fp = mface[mesh.cell_faces[c][p]];
      if (fp < 0)
        continue;
      rhs.segment(fp * nm, nm) += rl.segment(p * nm, nm);
      for (int q = 0; q <= d; ++q) {
        const int fq = mface[mesh.cell_faces[c][q]];
        if (fq < 0)
          continue;
        for (int i = 0; i < nm; ++i)
          for (int j = 0; j < nm; ++j) {
            const double v = Sl(p * nm + i, q * nm + j);
            if (v != 0.0)
              trip.emplace_back(fp * nm + i, fq * nm + j, v);
          }
      }
    }
  }

  Eigen::VectorXd lam = Eigen::VectorXd::Zero(N);
  double min_pivot = 0;
  double res = 0;
  if (N > 0) {
    Eigen::SparseMatrix<double> Sg(N, N);
    Sg.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(Sg);
    if (ldlt.info() != Eigen::Success)
      throw NumericalError("solve_hybrid: condensed factorization failed");
    min_pivot = ldlt.vectorD().minCoeff();
    if (!(min_pivot > 0))
      throw NumericalError("solve_hybrid: condensed system is not positive definite");
    lam = ldlt.solve(rhs);
    // normwise backward error
    res = (Sg * lam - rhs).norm() / (Sg.norm() * lam.norm() + rhs.norm() + 1e-300);
    if (!std::isfinite(res) || res > 1e-12)
      throw NumericalError("solve_hybrid: condensed backward error " + std::to_string(res));
  }

  DiscreteSolution sol;
  sol.mesh = &mesh;
  sol.d = d;
  sol.k = k;
  sol.sfs = S.element[0]->fs;
  sol.u_degree = k - 1;
  sol.mult_degree = k;
  sol.report = {"hybrid", N, res, min_pivot};
  sol.multiplier.assign(mesh.num_faces(), Eigen::VectorXd());
  for (int f = 0; f < mesh.num_faces(); ++f)
    if (mface[f] >= 0)
      sol.multiplier[f] = lam.segment(mface[f] * nm, nm);
  int ndof = N;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const ElementSpace& e = *S.element[c];
    const LocalSystem& ls = local.at(&e);
    const int n = e.dim();
    Eigen::VectorXd lc = Eigen::VectorXd::Zero((d + 1) * nm);
    for (int p = 0; p <= d; ++p) {
      const int fp = mface[mesh.cell_faces[c][p]];
      if (fp >= 0)
        lc.segment(p * nm, nm) = lam.segment(fp * nm, nm);
    }
    const Eigen::VectorXd x = Kig[c] - ls.KiC * lc;
    sol.cell.push_back(S.cell[c]);
    sol.sigma_dofs.push_back(x.head(n));
    sol.sigma.push_back(e.nodal * x.head(n));
    sol.u.push_back(detail::to_components(ls.ops.P * x.tail(nu), d));
    ndof += n + nu;
  }
  sol.dofs = ndof;
  return sol;
}

} // namespace alfeld
