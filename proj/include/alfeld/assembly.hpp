// SPDX-License-Identifier: MIT
//
// Global spaces on a mesh, the stabilized, mixed and hybridized discretizations
// of linear elasticity, displacement postprocessing and error norms.
#pragma once

#include "alfeld/elements.hpp"
#include "alfeld/mesh.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace alfeld {

using VectorFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using MatrixFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

struct ElasticityProblem {
  int d = 2;
  double mu = 1;
  double lambda = 1;
  VectorFn f;
  // exact solution, optional
  VectorFn u;
  MatrixFn grad_u;
  MatrixFn sigma;

  bool has_exact() const { return static_cast<bool>(u) && static_cast<bool>(sigma); }
};

/// u_i = prod_j sin(pi x_j) for every component i on (0,1)^d; f = -div sigma
/// in closed form.
ElasticityProblem manufactured_problem(int d, double mu, double lambda);
/// Divergence-free field u = curl (sin(pi x) sin(pi y))^2 on (0,1)^2, so that
/// sigma = 2 mu eps(u) does not depend on lambda.
ElasticityProblem divergence_free_problem(double mu, double lambda);

/// A sigma = sigma / (2 mu) - lambda / (2 mu (2 mu + d lambda)) tr(sigma) I
Eigen::MatrixXd compliance(const Eigen::MatrixXd& sigma, double mu, double lambda);
/// The same operator written as dev(sigma) / (2 mu) + tr(sigma) I / (d (2 mu + d lambda)).
Eigen::MatrixXd compliance_dev_tr(const Eigen::MatrixXd& sigma, double mu, double lambda);

/// Elements are translation invariant in the layout coordinates, so cells that
/// differ by a shift share one ElementSpace. Thread-safe.
class ElementCache {
public:
  std::shared_ptr<const ElementSpace> get(Family family, const Eigen::MatrixXd& vertices, int k,
                                          const std::vector<int>& face_sign);
  std::size_t size() const;

private:
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const ElementSpace>> map_;
};

/// Face-based global numbering: face DoFs first (face id major), then cell
/// DoFs. Local DoFs of cell c map to cell_map[c].
struct GlobalSpace {
  const Mesh* mesh = nullptr;
  Family family = Family::HighReduced;
  int k = 0;
  int face_dofs = 0;
  int cell_dofs = 0;
  int ndofs = 0;
  std::vector<std::shared_ptr<const ElementSpace>> element;
  std::vector<SplitCell> cell; // physical split cells
  std::vector<std::vector<int>> cell_map;
  std::vector<char> boundary; // per global DoF

  int num_boundary_dofs() const;
};

GlobalSpace global_space(const Mesh& mesh, Family family, int k, ElementCache* cache = nullptr);

/// Displacement spaces, all made of coarse polynomials on each cell.
struct DispSpace {
  enum Kind { Poly, RigidMotion } kind = Poly;
  int degree = 0; // Poly: P_degree(T; R^d)

  static DispSpace poly(int r) { return {Poly, r}; }
  static DispSpace rm() { return {RigidMotion, 1}; }
  int coef_degree() const { return kind == Poly ? degree : 1; }
  int per_cell(int d) const;
  std::string str() const;
};

/// Basis of the displacement space on a cell as coarse Bernstein
/// coefficients of degree coef_degree(), component-major (a * nalpha + alpha).
Eigen::MatrixXd disp_basis(const CellGeometry& g, const DispSpace& ds);

struct SolverReport {
  std::string method;
  int unknowns = 0;
  double residual = 0;
  double min_pivot = 0; // condensed hybrid system
};

/// Piecewise stress (layout coefficients per cell) and coarse displacement
/// (Bernstein coefficients per cell, nalpha x d) with optional hybrid data.
struct DiscreteSolution {
  const Mesh* mesh = nullptr;
  int d = 0;
  int k = 0;
  std::vector<SplitCell> cell;
  FieldSpace sfs;
  std::vector<Eigen::VectorXd> sigma;
  int u_degree = 0;
  std::vector<Eigen::MatrixXd> u;
  // hybrid multipliers per face (empty on boundary faces), P_k(F; R^d)
  // coefficients with alpha outer and component inner
  int mult_degree = -1;
  std::vector<Eigen::VectorXd> multiplier;
  // postprocessed displacement, P_{k+1}(T; R^d) Bernstein, nalpha x d
  int ustar_degree = -1;
  std::vector<Eigen::MatrixXd> ustar;
  // local DoF values per cell and global vectors where available
  std::vector<Eigen::VectorXd> sigma_dofs;
  Eigen::VectorXd sigma_global;
  Eigen::VectorXd u_global;
  SolverReport report;
  int dofs = 0;
};

struct SolveOptions {
  int quad_degree = -1; // default 2 max(m, k + 2)
  ElementCache* cache = nullptr;
};

/// Stabilized method with HighReduced stresses and P_{k-1}^{-1} displacements.
DiscreteSolution solve_stabilized(const Mesh& mesh, const ElasticityProblem& pb, int k, const SolveOptions& opt = {});
/// Conforming mixed method (no stabilization) for any family and displacement space.
DiscreteSolution solve_mixed(const Mesh& mesh, const ElasticityProblem& pb, Family family, int k, const DispSpace& ds,
                             const SolveOptions& opt = {});
/// Hybridized method: broken HighPsi stresses, P_{k-1}^{-1} displacements and
/// P_k multipliers on interior faces, condensed to an SPD system.
DiscreteSolution solve_hybrid(const Mesh& mesh, const ElasticityProblem& pb, int k, const SolveOptions& opt = {});

/// u* in P_{k+1}^{-1}(T_h; R^d): (eps u*, eps q) = (A sigma_h, eps q) with the
/// RM moments of u* fixed to those of u_h.
void postprocess_displacement(DiscreteSolution& sol, const ElasticityProblem& pb, int quad_degree = -1);

struct ErrorNorms {
  double sigma_L2 = NAN;
  double sigma_Hdiv = NAN;
  double u_L2 = NAN;
  double super_1h = NAN; // || Q_h^M u - u_h ||_{1,h}, hybrid only
  double post_eps = NAN; // || eps_h(u - u*) ||
  double sigma_norm = NAN;
};

ErrorNorms error_norms(const DiscreteSolution& sol, const ElasticityProblem& pb, int quad_degree = -1);

// ---------------------------------------------------------------------------
// Local building blocks shared with verify

/// Compliance-weighted Gram matrix of a symmetric-tensor layout.
Eigen::MatrixXd compliance_mass(const SplitCell& cell, const FieldSpace& fs, double mu, double lambda);
/// Values of coarse Bernstein polynomials of degree r at coarse barycentrics.
Eigen::VectorXd coarse_values(int d, int r, const Eigen::VectorXd& lambda);
/// Gradients (nalpha x d) of coarse Bernstein polynomials of degree r.
Eigen::MatrixXd coarse_gradients(const CellGeometry& g, int r, const Eigen::VectorXd& lambda);
/// Coarse vector polynomials (component-major coefficients) embedded into a
/// piecewise vector layout of degree >= r.
Eigen::MatrixXd coarse_vec_embedding(const SplitCell& cell, int r, const FieldSpace& vfs);

/// Normal-jump samples of a conforming stress field over all interior coarse
/// faces and all fine interior faces; returns the maximum norm.
double max_normal_jump(const GlobalSpace& space, const Eigen::VectorXd& coef);

} // namespace alfeld
