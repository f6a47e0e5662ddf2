// SPDX-License-Identifier: MIT
//
// Certification: dimension counts, rank identities, conformity, discrete
// inf-sup constants and convergence studies.
#pragma once

#include "alfeld/assembly.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace alfeld {

/// Reference simplex: origin and unit vectors.
Eigen::MatrixXd reference_simplex(int d);
/// Affine image x -> A x + b with cond(A) <= 4, drawn from a seeded generator.
Eigen::MatrixXd random_affine_simplex(int d, std::uint64_t seed);
/// Two cells sharing one face.
Mesh two_cell_mesh(int d);
/// (0,1)^2 with every square cut along both diagonals; the square centers are
/// singular vertices (all incident edges lie on two lines).
Mesh crisscross_mesh(int n);

struct DimensionRow {
  Family family{};
  int d = 0;
  int k = 0;
  long long formula = 0;
  int generator_rank = 0; // rank of the raw spanning set
  int constructed = 0;    // dimension of the certified element
  double cond = 0;
  bool ok = false;
  std::string note;
};

/// Every family admissible for (d, k), built on the reference cell.
std::vector<DimensionRow> check_dimensions(int d, int k);
/// Same for one family; throws DomainError if not admissible.
DimensionRow check_dimension(Family family, int d, int k);

struct IntersectionReport {
  int d = 0;
  int k = 0;
  int dim = 0;
  Eigen::MatrixXd basis; // columns in sym_space(d, max(k, 0))
};

/// Null space of the normal jumps across interior fine faces, acting on
/// P_k^{-1}(T^R; S).
IntersectionReport brute_force_intersection(const SplitCell& cell, int k);

struct DivRangeReport {
  int d = 0;
  int k = 0;
  // div on B_k(div, T; S)
  int coarse_rank = 0;
  long long coarse_expected = 0;
  double coarse_rm_moment = 0; // max |(div b, r)| over unit b and RM basis r
  // div on the interior bubbles of the composite space on T^R
  int split_rank = 0;
  long long split_expected = 0;
  double split_rm_moment = 0;
  // Ext operators
  double nn_trace = 0;  // max |(Ext b - b) n| on the subcell boundary
  double nn_div_rm = 0; // |(I - Q_RM(T_i)) div Ext b|
  double psi_trace = 0; // max |(psi - phi) n| on the boundary of T
  double psi_div_rm = 0;
  bool ok = false;
};

DivRangeReport check_div_range(const SplitCell& cell, int k);

struct ConformityReport {
  Family family{};
  int d = 0;
  int k = 0;
  int ndofs = 0;
  double coarse_jump = 0; // across interior mesh faces
  double fine_jump = 0;   // across interior faces of every split
  bool ok() const { return coarse_jump <= 1e-11 && fine_jump <= 1e-11; }
};

/// Normal jumps of every global basis function.
ConformityReport check_conformity(const Mesh& mesh, Family family, int k);

/// Largest normal jump of a discrete stress over all interior coarse faces.
double solution_normal_jump(const DiscreteSolution& sol);

/// Stress/displacement pair for inf-sup studies.
struct PairSpec {
  enum Stress { Conforming, BrokenPkConforming } stress = Conforming;
  Family family = Family::HighPsi;
  int k = 2;
  DispSpace disp;
  bool projected_div = false; // norm uses ||Q div tau|| instead of ||div tau||
  std::string name;
};

/// The pairs certified by the library, and a control pair without enrichment.
PairSpec psi_pair(int k);
PairSpec reduced_projected_pair(int k);
PairSpec linear_pair(Family f);
PairSpec broken_pk_pair(int k);

struct InfSupLevel {
  int n = 0;
  double h = 0;
  int stress_dofs = 0;
  int disp_dofs = 0;
  double beta = 0;
};

struct InfSupReport {
  std::string pair;
  std::string norm;
  std::vector<InfSupLevel> levels;
  double min_beta = 0;
  double ratio = 0; // max / min
  Eigen::VectorXd kernel; // eigenvector of the smallest eigenvalue on the last level
  bool positive() const { return min_beta > 1e-8; }
};

/// beta^2 = smallest eigenvalue of B G^{-1} B^T x = beta^2 M x.
InfSupLevel infsup_level(const Mesh& mesh, const PairSpec& pair, Eigen::VectorXd* kernel = nullptr);
InfSupReport infsup_constant(int d, const std::vector<int>& box_levels, const PairSpec& pair);
/// Same on given meshes; `labels` fills InfSupLevel::n.
InfSupReport infsup_constant(const std::vector<Mesh>& meshes, const std::vector<int>& labels, const PairSpec& pair);

enum class Method { Stabilized, Hybrid, LinearPair };
std::string to_string(Method m);
Method method_from_string(const std::string& s);

struct StudyConfig {
  int d = 2;
  int k = 2;
  Method method = Method::Hybrid;
  Family family = Family::LinearPhiSplit; // LinearPair only
  double mu = 1;
  double lambda = 1;
  std::vector<int> levels{2, 4, 8};        // box subdivisions
  std::string problem = "manufactured";    // or "divergence-free"
  std::optional<std::string> mesh_file;    // single level from file
};

struct RateRow {
  int level = 0;
  double h = 0;
  int dofs = 0;
  ErrorNorms err;
  // rates against the previous row; NaN on the first
  double r_sigma_L2 = NAN, r_sigma_Hdiv = NAN, r_u_L2 = NAN, r_super_1h = NAN, r_post_eps = NAN;
};

struct RateTable {
  StudyConfig config;
  std::vector<RateRow> rows;
  void write_csv(std::ostream& os) const;
};

ElasticityProblem study_problem(const StudyConfig& c);
DiscreteSolution study_solve(const Mesh& mesh, const StudyConfig& c, const ElasticityProblem& pb, ElementCache* cache);
RateTable convergence_study(const StudyConfig& c);

/// log(e0 / e1) / log(h0 / h1)
double rate(double e0, double e1, double h0, double h1);

/// Max difference in stress DoFs and displacement coefficients between the
/// hybridized and the conforming mixed solution with the same spaces.
double hybrid_mixed_difference(const Mesh& mesh, const ElasticityProblem& pb, int k);

} // namespace alfeld
