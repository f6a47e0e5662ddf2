// SPDX-License-Identifier: MIT
#include "alfeld/verify.hpp"

#include "alfeld/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

namespace alfeld {

Eigen::MatrixXd reference_simplex(int d)
{
  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(d, d + 1);
  for (int j = 0; j < d; ++j)
    V(j, j + 1) = 1;
  return V;
}

Eigen::MatrixXd random_affine_simplex(int d, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (;;) {
    Eigen::MatrixXd A(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        A(i, j) = u(rng);
    Eigen::VectorXd b(d);
    for (int i = 0; i < d; ++i)
      b(i) = 2 * u(rng);
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    const auto& s = svd.singularValues();
    if (s(d - 1) < 1e-3 || s(0) / s(d - 1) > 4)
      continue;
    return (A * reference_simplex(d)).colwise() + b;
  }
}

Mesh two_cell_mesh(int d)
{
  if (d == 2) {
    Eigen::MatrixXd P(2, 4);
    P << 0, 1, 0, 1.2, 0, 0, 1, 0.9;
    return build_mesh(P, {{0, 1, 2}, {1, 2, 3}});
  }
  if (d == 3) {
    Eigen::MatrixXd P(3, 5);
    P << 0, 1, 0, 0, 0.8, 0, 0, 1, 0, 0.9, 0, 0, 0, 1, 1.1;
    return build_mesh(P, {{0, 1, 2, 3}, {1, 2, 3, 4}});
  }
  throw DomainError("two_cell_mesh: d must be 2 or 3");
}

Mesh crisscross_mesh(int n)
{
  const int nv = (n + 1) * (n + 1);
  Eigen::MatrixXd P(2, nv + n * n);
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      P.col(j * (n + 1) + i) << double(i) / n, double(j) / n;
  std::vector<std::vector<int>> cells;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int c = nv + j * n + i;
      P.col(c) << (i + 0.5) / n, (j + 0.5) / n;
      const int a = j * (n + 1) + i, b = a + 1, e = a + n + 1, f = e + 1;
      for (auto [u, v] : {std::pair{a, b}, {b, f}, {f, e}, {e, a}}) {
        std::vector<int> t{u, v, c};
        std::sort(t.begin(), t.end());
        cells.push_back(t);
      }
    }
  return build_mesh(P, cells);
}

// ---------------------------------------------------------------------------

DimensionRow check_dimension(Family family, int d, int k)
{
  if (!admissible(family, d, k))
    throw DomainError("check_dimension: " + to_string(family) + " not defined for d=" + std::to_string(d) +
                      ", k=" + std::to_string(k));
  DimensionRow r;
  r.family = family;
  r.d = d;
  r.k = k;
  r.formula = dimension_formula(family, d, k);
  const Eigen::MatrixXd V = reference_simplex(d);
  r.generator_rank = numerical_rank(element_generators(family, SplitCell(V), k));
  try {
    const ElementSpace e = build_element(family, V, k);
    r.constructed = e.dim();
    r.cond = e.report.cond;
    // LinearReduced and LinearRM are cut out of the split span by constraints
    const bool constrained = family == Family::LinearReduced || family == Family::LinearRM;
    r.ok = r.constructed == r.formula && (constrained || r.generator_rank == r.constructed) && e.report.ok;
    if (r.constructed != r.formula)
      r.note = "span rank differs from the closed form";
  } catch (const CertificationError& ex) {
    r.note = ex.what();
  }
  return r;
}

std::vector<DimensionRow> check_dimensions(int d, int k)
{
  std::vector<DimensionRow> rows;
  for (Family f : all_families())
    if (admissible(f, d, k))
      rows.push_back(check_dimension(f, d, k));
  return rows;
}

IntersectionReport brute_force_intersection(const SplitCell& cell, int k)
{
  const int d = cell.dim();
  const FieldSpace fs = sym_space(d, k);
  IntersectionReport r;
  r.d = d;
  r.k = k;
  r.basis = null_space(interior_jump_matrix(cell, fs));
  r.dim = static_cast<int>(r.basis.cols());
  return r;
}

namespace {

std::vector<int> without(const std::vector<int>& labels, int q)
{
  std::vector<int> out;
  for (std::size_t m = 0; m < labels.size(); ++m)
    if (static_cast<int>(m) != q)
      out.push_back(labels[m]);
  return out;
}

// max |tau n| on the boundary of subcell `piece`, sampled at quadrature points
double subcell_trace_max(const SplitCell& cell, const FieldSpace& fs, const Eigen::VectorXd& v, int piece)
{
  const int d = fs.dim();
  const SymIndex si(d);
  const SubCell& s = cell.sub(piece);
  double m = 0;
  for (int q = 0; q <= d; ++q) {
    const Eigen::VectorXd n = -s.grad.col(q).normalized();
    for (const QPoint& p : entity_points(cell, without(s.labels, q), piece, fs.degree() + 2))
      m = std::max(m, (si.unpack(field_values(fs, v, piece, p.mu)) * n).cwiseAbs().maxCoeff());
  }
  return m;
}

double rm_moment_max(const SplitCell& cell, const FieldSpace& vfs, const Eigen::MatrixXd& fields)
{
  if (fields.cols() == 0)
    return 0;
  const Eigen::MatrixXd R = rm_fields(cell, vfs, cell.geometry().vc);
  const Eigen::MatrixXd M = field_mass(cell, vfs, Eigen::VectorXd::Ones(vfs.ncomp()));
  return (R.transpose() * M * fields).cwiseAbs().maxCoeff();
}

} // namespace

DivRangeReport check_div_range(const SplitCell& cell, int k)
{
  if (k < 2)
    throw DomainError("check_div_range: k >= 2 required");
  const int d = cell.dim();
  const long long nrm = d * (d + 1) / 2;
  DivRangeReport r;
  r.d = d;
  r.k = k;

  {
    const FieldSpace fs = sym_space(d, k);
    const Eigen::MatrixXd DB = div_matrix(cell, fs) * div_bubble_space(cell, fs, k);
    r.coarse_rank = numerical_rank(DB);
    r.coarse_expected = d * binomial(k - 1 + d, d) - nrm;
    r.coarse_rm_moment = rm_moment_max(cell, vec_space(d, k - 1), DB);
  }
  {
    const FieldSpace fs = sym_space(d, ambient_degree(Family::HighPhiNN, d, k));
    const Eigen::MatrixXd Q = orth(element_generators(Family::HighPhiNN, cell, k));
    const Eigen::MatrixXd bub = Q * null_space(boundary_trace_matrix(cell, fs) * Q);
    const Eigen::MatrixXd DB = div_matrix(cell, fs) * bub;
    r.split_rank = numerical_rank(DB);
    r.split_expected = d * (d + 1) * binomial(k - 1 + d, d) - nrm;
    r.split_rm_moment = rm_moment_max(cell, vec_space(d, fs.degree() - 1), DB);
  }
  {
    // nn-bubbles b_F^R p n_F n_F^T on either side of each interior face
    const FieldSpace fs = sym_space(d, d + 1);
    const FieldSpace vfs = vec_space(d, d);
    const NNExtender ext(cell, fs);
    const Eigen::MatrixXd D = div_matrix(cell, fs);
    for (int i = 0; i <= d; ++i) {
      const Eigen::MatrixXd P = rm_complement_projector(cell, vfs, i);
      for (int j = 0; j <= d; ++j) {
        if (j == i)
          continue;
        const IndexSet F = interior_face(d, std::min(i, j), std::max(i, j));
        const Eigen::VectorXd nF = interior_normal(cell, std::min(i, j), std::max(i, j));
        for (int a = 0; a < d; ++a) {
          const PwPoly p = cell.split_bubble(F) * cell.split_extend(F, BPoly::basis(d, 1, a));
          Eigen::VectorXd b = Eigen::VectorXd::Zero(fs.size());
          add_sym(b, fs, p, nF * nF.transpose(), i);
          const Eigen::VectorXd beta = ext.apply(i, b);
          r.nn_trace = std::max(r.nn_trace, subcell_trace_max(cell, fs, beta - b, i));
          r.nn_div_rm = std::max(r.nn_div_rm, (P * (D * beta)).cwiseAbs().maxCoeff());
        }
      }
    }
  }
  {
    // psi = Ext(phi): the HighPsi generators after the P_k(T; S) block
    const FieldSpace fk = sym_space(d, k);
    const FieldSpace fm = sym_space(d, ambient_degree(Family::HighPsi, d, k));
    const Eigen::MatrixXd phi = elevate_field(fk, fm, element_generators(Family::HighReduced, cell, k));
    const Eigen::MatrixXd psi = element_generators(Family::HighPsi, cell, k);
    if (phi.cols() != psi.cols())
      throw CertificationError("check_div_range: generator blocks do not align");
    const long long nc = nrm * binomial(k + d, d);
    const Eigen::MatrixXd diff = (psi - phi).rightCols(psi.cols() - nc);
    const Eigen::MatrixXd P = rm_complement_projector(cell, vec_space(d, fm.degree() - 1), -1);
    if (diff.cols() > 0) {
      r.psi_trace = (boundary_trace_matrix(cell, fm) * diff).cwiseAbs().maxCoeff();
      r.psi_div_rm = (P * div_matrix(cell, fm) * psi.rightCols(diff.cols())).cwiseAbs().maxCoeff();
    }
  }
  r.ok = r.coarse_rank == r.coarse_expected && r.split_rank == r.split_expected && r.coarse_rm_moment <= 1e-11 &&
         r.split_rm_moment <= 1e-11 && r.nn_trace <= 1e-12 && r.nn_div_rm <= 1e-11 && r.psi_trace <= 1e-12 &&
         r.psi_div_rm <= 1e-11;
  return r;
}

// ---------------------------------------------------------------------------

namespace {

// tau n_F at the quadrature points of mesh face F seen from side s; rows are
// (point, component), columns the local stress basis.
Eigen::MatrixXd face_normal_values(const Mesh& mesh, const MeshFace& F, int s, const SplitCell& cell,
                                   const FieldSpace& fs, const Eigen::MatrixXd& local, int degree)
{
  const int d = mesh.dim;
  const SymIndex si(d);
  const int p = F.local[s];
  std::vector<int> labels;
  for (int l = 0; l <= d; ++l)
    if (l != p)
      labels.push_back(l);
  const auto pts = entity_points(cell, labels, p, degree);
  Eigen::MatrixXd E(pts.size() * d, local.cols());
  for (std::size_t q = 0; q < pts.size(); ++q) {
    const Eigen::MatrixXd vals = field_values(fs, local, p, pts[q].mu); // ns x cols
    for (int c = 0; c < local.cols(); ++c)
      E.block(q * d, c, d, 1) = si.unpack(vals.col(c)) * F.normal;
  }
  return E;
}

} // namespace

ConformityReport check_conformity(const Mesh& mesh, Family family, int k)
{
  const GlobalSpace S = global_space(mesh, family, k);
  ConformityReport r;
  r.family = family;
  r.d = mesh.dim;
  r.k = k;
  r.ndofs = S.ndofs;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const ElementSpace& e = *S.element[c];
    const Eigen::MatrixXd J = interior_jump_matrix(S.cell[c], e.fs) * e.nodal;
    if (J.size())
      r.fine_jump = std::max(r.fine_jump, J.cwiseAbs().maxCoeff());
  }
  for (const MeshFace& F : mesh.faces) {
    if (F.boundary())
      continue;
    Eigen::MatrixXd diff;
    for (int s = 0; s < 2; ++s) {
      const int c = F.cell[s];
      const ElementSpace& e = *S.element[c];
      const Eigen::MatrixXd E = face_normal_values(mesh, F, s, S.cell[c], e.fs, e.nodal, 2 * e.fs.degree());
      if (s == 0)
        diff = Eigen::MatrixXd::Zero(E.rows(), S.ndofs);
      for (int j = 0; j < e.dim(); ++j)
        diff.col(S.cell_map[c][j]) += (s == 0 ? 1.0 : -1.0) * E.col(j);
    }
    r.coarse_jump = std::max(r.coarse_jump, diff.cwiseAbs().maxCoeff());
  }
  return r;
}

double solution_normal_jump(const DiscreteSolution& sol)
{
  const Mesh& mesh = *sol.mesh;
  double m = 0;
  for (const MeshFace& F : mesh.faces) {
    if (F.boundary())
      continue;
    Eigen::MatrixXd v[2];
    for (int s = 0; s < 2; ++s)
      v[s] = face_normal_values(mesh, F, s, sol.cell[F.cell[s]], sol.sfs, sol.sigma[F.cell[s]],
                                2 * sol.sfs.degree());
    m = std::max(m, (v[0] - v[1]).cwiseAbs().maxCoeff());
  }
  return m;
}

double hybrid_mixed_difference(const Mesh& mesh, const ElasticityProblem& pb, int k)
{
  ElementCache cache;
  SolveOptions opt;
  opt.cache = &cache;
  const DiscreteSolution h = solve_hybrid(mesh, pb, k, opt);
  const DiscreteSolution m = solve_mixed(mesh, pb, Family::HighPsi, k, DispSpace::poly(k - 1), opt);
  double diff = 0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    diff = std::max(diff, (h.sigma_dofs[c] - m.sigma_dofs[c]).cwiseAbs().maxCoeff());
    diff = std::max(diff, (h.u[c] - m.u[c]).cwiseAbs().maxCoeff());
  }
  return diff;
}

// ---------------------------------------------------------------------------

std::string to_string(Method m)
{
  switch (m) {
  case Method::Stabilized: return "stabilized";
  case Method::Hybrid: return "hybrid";
  case Method::LinearPair: return "linear-pair";
  }
  return "?";
}

Method method_from_string(const std::string& s)
{
  for (Method m : {Method::Stabilized, Method::Hybrid, Method::LinearPair})
    if (to_string(m) == s)
      return m;
  throw DomainError("unknown method '" + s + "'");
}

double rate(double e0, double e1, double h0, double h1)
{
  if (!(e0 > 0) || !(e1 > 0))
    return NAN;
  return std::log(e0 / e1) / std::log(h0 / h1);
}

ElasticityProblem study_problem(const StudyConfig& c)
{
  if (c.problem == "manufactured")
    return manufactured_problem(c.d, c.mu, c.lambda);
  if (c.problem == "divergence-free") {
    if (c.d != 2)
      throw DomainError("the divergence-free problem is two-dimensional");
    return divergence_free_problem(c.mu, c.lambda);
  }
  throw DomainError("unknown problem '" + c.problem + "'");
}

DiscreteSolution study_solve(const Mesh& mesh, const StudyConfig& c, const ElasticityProblem& pb, ElementCache* cache)
{
  SolveOptions opt;
  opt.cache = cache;
  switch (c.method) {
  case Method::Stabilized: return solve_stabilized(mesh, pb, c.k, opt);
  case Method::Hybrid: return solve_hybrid(mesh, pb, c.k, opt);
  case Method::LinearPair: {
    if (!is_linear(c.family))
      throw DomainError("linear-pair needs a linear family");
    const DispSpace ds = c.family == Family::LinearPhiSplit ? DispSpace::poly(1) : DispSpace::rm();
    return solve_mixed(mesh, pb, c.family, 1, ds, opt);
  }
  }
  throw DomainError("unknown method");
}

RateTable convergence_study(const StudyConfig& c)
{
  RateTable t;
  t.config = c;
  const ElasticityProblem pb = study_problem(c);
  ElementCache cache;
  std::vector<std::pair<int, Mesh>> meshes;
  if (c.mesh_file)
    meshes.emplace_back(0, read_mesh(*c.mesh_file));
  else
    for (int n : c.levels)
      meshes.emplace_back(n, uniform_box_mesh(c.d, n));
  for (const auto& [n, mesh] : meshes) {
    if (mesh.dim != c.d)
      throw DomainError("mesh dimension does not match d");
    RateRow row;
    row.level = n;
    row.h = mesh.max_diameter();
    DiscreteSolution sol;
    try {
      sol = study_solve(mesh, c, pb, &cache);
      if (c.method != Method::LinearPair)
        postprocess_displacement(sol, pb);
    } catch (const NumericalError& e) {
      throw NumericalError("level " + std::to_string(n) + ": " + e.what());
    }
    row.dofs = sol.dofs;
    row.err = error_norms(sol, pb);
    if (!t.rows.empty()) {
      const RateRow& p = t.rows.back();
      row.r_sigma_L2 = rate(p.err.sigma_L2, row.err.sigma_L2, p.h, row.h);
      row.r_sigma_Hdiv = rate(p.err.sigma_Hdiv, row.err.sigma_Hdiv, p.h, row.h);
      row.r_u_L2 = rate(p.err.u_L2, row.err.u_L2, p.h, row.h);
      row.r_super_1h = rate(p.err.super_1h, row.err.super_1h, p.h, row.h);
      row.r_post_eps = rate(p.err.post_eps, row.err.post_eps, p.h, row.h);
    }
    t.rows.push_back(row);
  }
  return t;
}

void RateTable::write_csv(std::ostream& os) const
{
  os << "level,h,dofs,err_sigma_L2,err_sigma_Hdiv,err_u_L2,err_super_1h,err_post_eps,"
        "rate_sigma_L2,rate_sigma_Hdiv,rate_u_L2,rate_super_1h,rate_post_eps\n";
  auto num = [](double v) {
    if (std::isnan(v))
      return std::string("nan");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10e", v);
    return std::string(buf);
  };
  for (const RateRow& r : rows)
    os << r.level << ',' << num(r.h) << ',' << r.dofs << ',' << num(r.err.sigma_L2) << ',' << num(r.err.sigma_Hdiv)
       << ',' << num(r.err.u_L2) << ',' << num(r.err.super_1h) << ',' << num(r.err.post_eps) << ','
       << num(r.r_sigma_L2) << ',' << num(r.r_sigma_Hdiv) << ',' << num(r.r_u_L2) << ',' << num(r.r_super_1h) << ','
       << num(r.r_post_eps) << '\n';
}

} // namespace alfeld
