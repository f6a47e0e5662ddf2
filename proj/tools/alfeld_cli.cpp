// SPDX-License-Identifier: MIT
//
// alfeld validate | infsup | solve | convergence
//
// Options may come from a JSON file (--config) and are overridden by flags.
// Exit status: 0 pass, 1 certification or numerical failure, 2 usage.
#include "alfeld/errors.hpp"
#include "alfeld/verify.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

using json = nlohmann::json;
using namespace alfeld;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;
  int d = 2;
  int k = 2;
  std::optional<std::string> family;
  std::string method = "hybrid";
  std::string pair;
  double mu = 1;
  double lambda = 1;
  std::optional<int> box;
  std::optional<std::string> mesh;
  int levels = 3;
  std::string problem = "manufactured";
  std::optional<std::string> out;
  int quad = -1;
};

// Flags seen on the command line; unset ones fall back to the config file.
struct Flags {
  std::optional<std::string> config;
  std::optional<int> d, k, box, levels, quad;
  std::optional<std::string> family, method, pair, mesh, out, problem;
  std::optional<double> mu, lambda;
};

template <class T>
void take(std::optional<T>& dst, const json& j, const char* key)
{
  if (!dst && j.contains(key))
    dst = j.at(key).get<T>();
}

RunConfig resolve(const std::string& command, Flags f)
{
  if (f.config) {
    std::ifstream in(*f.config);
    if (!in)
      throw UsageError("cannot open config " + *f.config);
    json j;
    try {
      in >> j;
      take(f.d, j, "d");
      take(f.k, j, "k");
      take(f.family, j, "family");
      take(f.method, j, "method");
      take(f.pair, j, "pair");
      take(f.mu, j, "mu");
      take(f.lambda, j, "lambda");
      take(f.levels, j, "levels");
      take(f.out, j, "out");
      take(f.problem, j, "problem");
      take(f.quad, j, "quad");
      if (j.contains("mesh")) {
        const std::string m = j.at("mesh").get<std::string>();
        if (m == "box")
          take(f.box, j, "box");
        else if (m == "file")
          take(f.mesh, j, "mesh_file");
        else
          throw UsageError("config: mesh must be \"box\" or \"file\"");
      }
    } catch (const json::exception& e) {
      throw UsageError(std::string("config: ") + e.what());
    }
  }
  RunConfig c;
  c.command = command;
  c.d = f.d.value_or(2);
  c.k = f.k.value_or(2);
  c.family = f.family;
  c.method = f.method.value_or("hybrid");
  c.pair = f.pair.value_or("");
  c.mu = f.mu.value_or(1.0);
  c.lambda = f.lambda.value_or(1.0);
  c.box = f.box;
  c.mesh = f.mesh;
  c.levels = f.levels.value_or(3);
  c.problem = f.problem.value_or("manufactured");
  c.out = f.out;
  c.quad = f.quad.value_or(-1);
  if (c.d != 2 && c.d != 3)
    throw UsageError("--d must be 2 or 3");
  if (c.k < 0)
    throw UsageError("--k must be non-negative");
  if (c.box && c.mesh)
    throw UsageError("--box and --mesh are exclusive");
  if (c.levels < 1)
    throw UsageError("--levels must be positive");
  if (!(c.mu > 0) || c.lambda < 0)
    throw UsageError("need mu > 0 and lambda >= 0");
  return c;
}

Family parse_family(const std::string& s)
{
  try {
    return family_from_string(s);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
}

void write_json(const RunConfig& c, const json& j, const std::string& default_suffix = "")
{
  if (!c.out)
    return;
  std::string path = *c.out;
  if (!default_suffix.empty()) {
    const auto dot = path.find_last_of('.');
    path = (dot == std::string::npos ? path : path.substr(0, dot)) + default_suffix;
  }
  std::ofstream os(path);
  if (!os)
    throw UsageError("cannot write " + path);
  os << j.dump(2) << '\n';
}

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// ---------------------------------------------------------------------------

int run_validate(const RunConfig& c)
{
  std::vector<Family> fams;
  if (c.family)
    fams.push_back(parse_family(*c.family));
  else
    for (Family f : all_families())
      if (admissible(f, c.d, c.k))
        fams.push_back(f);
  bool pass = true;
  json report = {{"command", "validate"}, {"d", c.d}, {"k", c.k}};
  const Mesh two = two_cell_mesh(c.d);
  for (Family f : fams) {
    if (!admissible(f, c.d, c.k))
      throw UsageError(to_string(f) + " is not defined for d=" + std::to_string(c.d) + ", k=" + std::to_string(c.k));
    const DimensionRow r = check_dimension(f, c.d, c.k);
    const ConformityReport cf = check_conformity(two, f, c.k);
    const bool ok = r.ok && cf.ok();
    pass = pass && ok;
    std::printf("%-15s dim %4d  formula %4lld  rank %4d  cond %.2e  jump %.1e/%.1e  %s%s%s\n", to_string(f).c_str(),
                r.constructed, r.formula, r.generator_rank, r.cond, cf.coarse_jump, cf.fine_jump, ok ? "PASS" : "FAIL",
                r.note.empty() ? "" : "  ", r.note.c_str());
    report["families"].push_back({{"family", to_string(f)},
                                  {"dim", r.constructed},
                                  {"formula", r.formula},
                                  {"generator_rank", r.generator_rank},
                                  {"cond", r.cond},
                                  {"coarse_jump", cf.coarse_jump},
                                  {"fine_jump", cf.fine_jump},
                                  {"pass", ok}});
  }
  const SplitCell ref(reference_simplex(c.d));
  if (c.k >= 2) {
    const DivRangeReport dr = check_div_range(ref, c.k);
    pass = pass && dr.ok;
    std::printf("div range       T %d/%lld  T^R %d/%lld  Ext trace %.1e/%.1e  div-RM %.1e/%.1e  %s\n", dr.coarse_rank,
                dr.coarse_expected, dr.split_rank, dr.split_expected, dr.nn_trace, dr.psi_trace, dr.nn_div_rm,
                dr.psi_div_rm, dr.ok ? "PASS" : "FAIL");
    report["div_range"] = {{"coarse_rank", dr.coarse_rank}, {"coarse_expected", dr.coarse_expected},
                           {"split_rank", dr.split_rank},   {"split_expected", dr.split_expected},
                           {"nn_trace", dr.nn_trace},       {"nn_div_rm", dr.nn_div_rm},
                           {"psi_trace", dr.psi_trace},     {"psi_div_rm", dr.psi_div_rm},
                           {"pass", dr.ok}};
  }
  if (c.k <= 3) {
    const IntersectionReport ir = brute_force_intersection(ref, c.k);
    std::string verdict = "report";
    if (c.k <= 1) {
      const long long want =
          c.k == 0 ? c.d * (c.d + 1) / 2 : static_cast<long long>(c.d) * (c.d + 1) * (2 * c.d + 1) / 2;
      verdict = ir.dim == want ? "PASS" : "FAIL";
      pass = pass && ir.dim == want;
    } else {
      verdict = ir.dim == dimension_formula(Family::HighPhiSplit, c.d, c.k) ? "matches the split space"
                                                                              : "differs from the split space";
    }
    std::printf("H(div) cap P%d^-1(T^R)  dim %d  %s\n", c.k, ir.dim, verdict.c_str());
    report["intersection"] = {{"dim", ir.dim}, {"verdict", verdict}};
  }
  report["pass"] = pass;
  write_json(c, report);
  std::printf("%s\n", pass ? "all checks passed" : "certification failed");
  return pass ? 0 : 1;
}

PairSpec pair_for(const RunConfig& c)
{
  const std::string p = c.pair.empty() ? (c.k == 1 ? "phi-split" : "psi") : c.pair;
  if (c.k == 1) {
    if (p == "phi-split")
      return linear_pair(Family::LinearPhiSplit);
    if (p == "reduced")
      return linear_pair(Family::LinearReduced);
    if (p == "rm")
      return linear_pair(Family::LinearRM);
    throw UsageError("for k = 1, --pair is phi-split, reduced or rm");
  }
  if (c.k < 2)
    throw UsageError("--k must be at least 1 for infsup");
  if (p == "psi")
    return psi_pair(c.k);
  if (p == "reduced")
    return reduced_projected_pair(c.k);
  if (p == "broken-pk")
    return broken_pk_pair(c.k);
  throw UsageError("for k >= 2, --pair is psi, reduced or broken-pk");
}

std::vector<int> box_levels(const RunConfig& c)
{
  // n = n0, 2 n0, 4 n0, ... in 2D; n0, n0 + 1, ... in 3D to stay at desk scale
  const int n0 = c.box.value_or(1);
  if (n0 < 1)
    throw UsageError("--box must be positive");
  std::vector<int> n;
  for (int l = 0; l < c.levels; ++l)
    n.push_back(c.d == 2 ? n0 << l : n0 + l);
  return n;
}

int run_infsup(const RunConfig& c)
{
  const PairSpec pair = pair_for(c);
  InfSupReport r;
  if (c.mesh) {
    std::vector<Mesh> m{read_mesh(*c.mesh)};
    r = infsup_constant(m, {0}, pair);
  } else {
    r = infsup_constant(c.d, box_levels(c), pair);
  }
  json report = {{"command", "infsup"}, {"pair", r.pair}, {"norm", r.norm}, {"d", c.d}};
  std::printf("pair %s, norm %s\n", r.pair.c_str(), r.norm.c_str());
  for (const auto& lv : r.levels) {
    std::printf("  n=%-3d h=%.4f  stress %6d  disp %6d  beta %.6f\n", lv.n, lv.h, lv.stress_dofs, lv.disp_dofs,
                lv.beta);
    report["levels"].push_back({{"n", lv.n},
                                {"h", lv.h},
                                {"stress_dofs", lv.stress_dofs},
                                {"disp_dofs", lv.disp_dofs},
                                {"beta", lv.beta}});
  }
  const bool pass = r.positive();
  std::printf("min beta %.6f  max/min %.4f  %s\n", r.min_beta, r.ratio, pass ? "PASS" : "FAIL");
  if (!pass)
    std::printf("kernel vector norm %.3e on the last level\n", r.kernel.norm());
  report["min_beta"] = r.min_beta;
  report["ratio"] = num(r.ratio);
  report["pass"] = pass;
  write_json(c, report);
  return pass ? 0 : 1;
}

StudyConfig study_config(const RunConfig& c)
{
  StudyConfig s;
  s.d = c.d;
  s.k = c.k;
  try {
    s.method = method_from_string(c.method);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  if (s.method == Method::LinearPair) {
    s.family = parse_family(c.family.value_or("linear-phi-split"));
    if (!is_linear(s.family))
      throw UsageError("linear-pair needs linear-phi-split, linear-reduced or linear-rm");
    s.k = 1;
  } else if (s.k < 2) {
    throw UsageError("--k must be at least 2 for " + c.method);
  }
  s.mu = c.mu;
  s.lambda = c.lambda;
  s.problem = c.problem;
  if (s.problem != "manufactured" && s.problem != "divergence-free")
    throw UsageError("--problem is manufactured or divergence-free");
  if (s.problem == "divergence-free" && s.d != 2)
    throw UsageError("the divergence-free problem needs --d 2");
  s.mesh_file = c.mesh;
  return s;
}

int run_solve(const RunConfig& c)
{
  StudyConfig s = study_config(c);
  const Mesh mesh = c.mesh ? read_mesh(*c.mesh) : uniform_box_mesh(c.d, c.box.value_or(4));
  if (mesh.dim != c.d)
    throw UsageError("mesh dimension does not match --d");
  const ElasticityProblem pb = study_problem(s);
  ElementCache cache;
  DiscreteSolution sol = study_solve(mesh, s, pb, &cache);
  if (s.method != Method::LinearPair)
    postprocess_displacement(sol, pb, c.quad);
  const ErrorNorms e = error_norms(sol, pb, c.quad);
  std::printf("%s  cells %d  unknowns %d  backward error %.2e\n", sol.report.method.c_str(), mesh.num_cells(),
              sol.dofs, sol.report.residual);
  std::printf("  |sigma - sigma_h|      %.6e\n  |sigma - sigma_h|_div  %.6e\n  |u - u_h|              %.6e\n",
              e.sigma_L2, e.sigma_Hdiv, e.u_L2);
  if (!std::isnan(e.super_1h))
    std::printf("  |Qu - u_h|_1,h         %.6e\n", e.super_1h);
  if (!std::isnan(e.post_eps))
    std::printf("  |eps(u - u*)|          %.6e\n", e.post_eps);
  write_json(c, {{"command", "solve"},
                 {"method", sol.report.method},
                 {"cells", mesh.num_cells()},
                 {"unknowns", sol.dofs},
                 {"backward_error", sol.report.residual},
                 {"min_pivot", sol.report.min_pivot},
                 {"err_sigma_L2", num(e.sigma_L2)},
                 {"err_sigma_Hdiv", num(e.sigma_Hdiv)},
                 {"err_u_L2", num(e.u_L2)},
                 {"err_super_1h", num(e.super_1h)},
                 {"err_post_eps", num(e.post_eps)}});
  return 0;
}

int run_convergence(const RunConfig& c)
{
  StudyConfig s = study_config(c);
  if (!c.mesh)
    s.levels = box_levels(c);
  const RateTable t = convergence_study(s);
  if (c.out) {
    std::ofstream os(*c.out);
    if (!os)
      throw UsageError("cannot write " + *c.out);
    t.write_csv(os);
  } else {
    t.write_csv(std::cout);
  }
  json report = {{"command", "convergence"}, {"method", to_string(s.method)}, {"d", s.d}, {"k", s.k}};
  if (s.method == Method::LinearPair)
    report["family"] = to_string(s.family);
  for (const RateRow& r : t.rows)
    report["levels"].push_back({{"n", r.level},
                                {"h", r.h},
                                {"dofs", r.dofs},
                                {"rate_sigma_L2", num(r.r_sigma_L2)},
                                {"rate_sigma_Hdiv", num(r.r_sigma_Hdiv)},
                                {"rate_u_L2", num(r.r_u_L2)}});
  write_json(c, report, ".json");
  return 0;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Symmetric-stress mixed elements on Alfeld splits"};
  app.require_subcommand(1);
  Flags f;
  auto common = [&f](CLI::App* s) {
    s->add_option("--config", f.config, "JSON config; flags take precedence");
    s->add_option("--d", f.d, "space dimension (2 or 3)");
    s->add_option("--k", f.k, "polynomial degree");
    s->add_option("--family", f.family, "element family, e.g. high-psi");
    s->add_option("--mu", f.mu, "shear modulus");
    s->add_option("--lambda", f.lambda, "Lame parameter");
    s->add_option("--box", f.box, "box mesh with N subdivisions (coarsest level for studies)");
    s->add_option("--mesh", f.mesh, "mesh file");
    s->add_option("--levels", f.levels, "number of mesh levels");
    s->add_option("--out", f.out, "output path");
    s->add_option("--quad", f.quad, "quadrature degree override");
  };
  CLI::App* validate = app.add_subcommand("validate", "dimension, conformity and rank certificates");
  CLI::App* infsup = app.add_subcommand("infsup", "discrete inf-sup constants");
  CLI::App* solve = app.add_subcommand("solve", "one solve with error norms");
  CLI::App* conv = app.add_subcommand("convergence", "error table over refined box meshes");
  for (CLI::App* s : {validate, infsup, solve, conv})
    common(s);
  infsup->add_option("--pair", f.pair, "phi-split | reduced | rm (k=1); psi | reduced | broken-pk (k>=2)");
  for (CLI::App* s : {solve, conv}) {
    s->add_option("--method", f.method, "stabilized | hybrid | linear-pair");
    s->add_option("--problem", f.problem, "manufactured | divergence-free");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const std::string cmd = app.get_subcommands().front()->get_name();
    const RunConfig c = resolve(cmd, f);
    if (cmd == "validate")
      return run_validate(c);
    if (cmd == "infsup")
      return run_infsup(c);
    if (cmd == "solve")
      return run_solve(c);
    return run_convergence(c);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const DomainError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
