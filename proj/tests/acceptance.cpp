// Acceptance run: one [PASS]/[FAIL] line per criterion, details indented
// above it. Exit status 1 if any criterion fails.
#include "alfeld/errors.hpp"
#include "alfeld/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

using namespace alfeld;

namespace {

struct Outcome {
  bool pass = true;
  std::string summary;
};

void note(const char* fmt, auto... args)
{
  std::printf("    ");
  std::printf(fmt, args...);
  std::printf("\n");
  std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool within(double v, double lo, double hi) { return std::isfinite(v) && v >= lo && v <= hi; }

std::vector<Mesh> crisscross_mesh_levels() { return {crisscross_mesh(2), crisscross_mesh(4)}; }

// ---------------------------------------------------------------------------

Outcome dimensions()
{
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  int rows = 0, bad = 0;
  const long long paper[3][2] = {{15, 42}, {12, 36}, {9, 24}};
  const Family linear[3] = {Family::LinearPhiSplit, Family::LinearReduced, Family::LinearRM};
  for (int d = 2; d <= 3; ++d) {
    for (int f = 0; f < 3; ++f)
      if (dimension_formula(linear[f], d, 1) != paper[f][d - 2]) {
        note("%s d=%d: formula %lld, expected %lld", to_string(linear[f]).c_str(), d,
             dimension_formula(linear[f], d, 1), paper[f][d - 2]);
        ++bad;
      }
    if (dimension_formula(Family::HighPhiSplit, d, 1) != d * (d + 1) * (2 * d + 1) / 2) {
      note("split formula at k=1 disagrees with the linear count, d=%d", d);
      ++bad;
    }
    for (int k = 1; k <= 4; ++k)
      for (const DimensionRow& r : check_dimensions(d, k)) {
        ++rows;
        if (!r.ok) {
          ++bad;
          note("%-14s d=%d k=%d  constructed %d  formula %lld  span rank %d  %s", to_string(r.family).c_str(), d, k,
               r.constructed, r.formula, r.generator_rank, r.note.c_str());
        }
      }
  }
  const double t = seconds_since(t0);
  o.pass = bad == 0 && t < 60;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d family/degree rows, %d mismatches, %.1f s", rows, bad, t);
  o.summary = buf;
  return o;
}

Outcome rigidity()
{
  Outcome o;
  for (int d = 2; d <= 3; ++d) {
    const SplitCell cell(reference_simplex(d));
    const int want0 = d * (d + 1) / 2, want1 = d * (d + 1) * (2 * d + 1) / 2;
    const int got0 = brute_force_intersection(cell, 0).dim, got1 = brute_force_intersection(cell, 1).dim;
    note("d=%d: k=0 -> %d (want %d), k=1 -> %d (want %d)", d, got0, want0, got1, want1);
    o.pass = o.pass && got0 == want0 && got1 == want1;
    // report only: the k=2 intersection against the split space
    const int got2 = brute_force_intersection(cell, 2).dim;
    note("d=%d: k=2 -> %d, split space %lld (report only)", d, got2, dimension_formula(Family::HighPhiSplit, d, 2));
  }
  o.summary = "jump null spaces of P_0 and P_1 on the split";
  return o;
}

Outcome unisolvence()
{
  Outcome o;
  double worst = 0;
  int built = 0;
  for (int d = 2; d <= 3; ++d)
    for (Family f : all_families())
      for (int k = 1; k <= 4; ++k) {
        if (!admissible(f, d, k))
          continue;
        for (std::uint64_t seed = 0; seed <= 5; ++seed) {
          const Eigen::MatrixXd V = seed == 0 ? reference_simplex(d) : random_affine_simplex(d, seed);
          try {
            const ElementSpace e = build_element(f, V, k);
            worst = std::max(worst, e.report.cond);
            ++built;
            if (!(e.report.cond < 1e8)) {
              o.pass = false;
              note("%s d=%d k=%d seed %llu: cond %.3e", to_string(f).c_str(), d, k,
                   static_cast<unsigned long long>(seed), e.report.cond);
            }
          } catch (const std::exception& ex) {
            o.pass = false;
            note("%s d=%d k=%d seed %llu: %s", to_string(f).c_str(), d, k, static_cast<unsigned long long>(seed),
                 ex.what());
          }
        }
      }
  char buf[120];
  std::snprintf(buf, sizeof buf, "%d elements, worst cond %.3e", built, worst);
  o.summary = buf;
  return o;
}

Outcome conformity()
{
  Outcome o;
  double worst = 0;
  for (int d = 2; d <= 3; ++d) {
    const Mesh m = two_cell_mesh(d);
    for (Family f : all_families())
      for (int k = 1; k <= (d == 2 ? 3 : 2); ++k) {
        if (!admissible(f, d, k))
          continue;
        const ConformityReport r = check_conformity(m, f, k);
        worst = std::max({worst, r.coarse_jump, r.fine_jump});
        if (!r.ok()) {
          o.pass = false;
          note("%s d=%d k=%d: coarse %.2e fine %.2e", to_string(f).c_str(), d, k, r.coarse_jump, r.fine_jump);
        }
      }
  }
  char buf[80];
  std::snprintf(buf, sizeof buf, "max normal jump %.2e", worst);
  o.summary = buf;
  return o;
}

Outcome div_range()
{
  Outcome o;
  for (int d = 2; d <= 3; ++d)
    for (int k = 2; k <= 3; ++k) {
      const DivRangeReport r = check_div_range(SplitCell(random_affine_simplex(d, 40 + d * 10 + k)), k);
      const bool ok = r.coarse_rank == r.coarse_expected && r.split_rank == r.split_expected &&
                      r.coarse_rm_moment <= 1e-11 && r.split_rm_moment <= 1e-11 && r.nn_trace <= 1e-12 &&
                      r.psi_trace <= 1e-12 && r.nn_div_rm <= 1e-11 && r.psi_div_rm <= 1e-11;
      note("d=%d k=%d: T %d/%lld  T^R %d/%lld  RM moments %.1e/%.1e  trace %.1e/%.1e  div-RM %.1e/%.1e", d, k,
           r.coarse_rank, r.coarse_expected, r.split_rank, r.split_expected, r.coarse_rm_moment, r.split_rm_moment,
           r.nn_trace, r.psi_trace, r.nn_div_rm, r.psi_div_rm);
      o.pass = o.pass && ok && r.ok;
    }
  o.summary = "div ranks on bubble spaces, Ext trace and RM residuals";
  return o;
}

Outcome infsup()
{
  Outcome o;
  struct Case {
    PairSpec pair;
    int d;
    std::vector<int> levels;
  };
  const std::vector<Case> cases{
      {psi_pair(2), 2, {1, 2, 4}},
      {psi_pair(3), 2, {1, 2, 4}},
      {psi_pair(2), 3, {1, 2, 3}},
      {linear_pair(Family::LinearPhiSplit), 2, {1, 2, 4}},
      {linear_pair(Family::LinearReduced), 2, {1, 2, 4}},
      {linear_pair(Family::LinearRM), 2, {1, 2, 4}},
      {reduced_projected_pair(2), 2, {1, 2, 4}},
  };
  for (const Case& c : cases) {
    const auto t0 = std::chrono::steady_clock::now();
    const InfSupReport r = infsup_constant(c.d, c.levels, c.pair);
    std::string betas;
    for (const auto& lv : r.levels) {
      char b[32];
      std::snprintf(b, sizeof b, " %.4f", lv.beta);
      betas += b;
    }
    const bool ok = r.positive() && r.ratio < 1.5;
    note("d=%d %-38s beta%s  max/min %.3f  %.0f s", c.d, r.pair.c_str(), betas.c_str(), r.ratio, seconds_since(t0));
    o.pass = o.pass && ok;
  }
  // control without the Phi enrichment, reported only
  const InfSupReport psi = infsup_constant(crisscross_mesh_levels(), {2, 4}, psi_pair(2));
  const InfSupReport ctl = infsup_constant(crisscross_mesh_levels(), {2, 4}, broken_pk_pair(2));
  note("control on criss-cross meshes n=2,4: %s beta %.4f %.4f vs %s beta %.4f %.4f (report only)", ctl.pair.c_str(),
       ctl.levels[0].beta, ctl.levels[1].beta, psi.pair.c_str(), psi.levels[0].beta, psi.levels[1].beta);
  o.summary = "beta > 1e-8 and max/min < 1.5 for every certified pair";
  return o;
}

// ---------------------------------------------------------------------------

struct Studies {
  RateTable stabilized, hybrid2, hybrid3, hybrid3d;
  std::vector<RateTable> linear;
};

RateTable study(int d, int k, Method m, std::vector<int> levels, Family f = Family::LinearPhiSplit)
{
  StudyConfig c;
  c.d = d;
  c.k = k;
  c.method = m;
  c.family = f;
  c.levels = std::move(levels);
  const auto t0 = std::chrono::steady_clock::now();
  RateTable t = convergence_study(c);
  note("%s d=%d k=%d%s%s: %.0f s", to_string(m).c_str(), d, k, m == Method::LinearPair ? " " : "",
       m == Method::LinearPair ? to_string(f).c_str() : "", seconds_since(t0));
  for (const RateRow& r : t.rows)
    note("  n=%-3d dofs %7d  sigma %.3e (%.2f)  div %.3e (%.2f)  u %.3e (%.2f)  1h %.3e (%.2f)  post %.3e (%.2f)",
         r.level, r.dofs, r.err.sigma_L2, r.r_sigma_L2, r.err.sigma_Hdiv, r.r_sigma_Hdiv, r.err.u_L2, r.r_u_L2,
         r.err.super_1h, r.r_super_1h, r.err.post_eps, r.r_post_eps);
  return t;
}

Outcome rates(Studies& s)
{
  Outcome o;
  s.stabilized = study(2, 2, Method::Stabilized, {2, 4, 8, 16});
  s.hybrid2 = study(2, 2, Method::Hybrid, {2, 4, 8, 16});
  s.hybrid3 = study(2, 3, Method::Hybrid, {2, 4, 8, 16});
  s.hybrid3d = study(3, 2, Method::Hybrid, {1, 2, 4});
  for (Family f : {Family::LinearPhiSplit, Family::LinearReduced, Family::LinearRM})
    s.linear.push_back(study(2, 1, Method::LinearPair, {2, 4, 8, 16, 32}, f));

  auto check = [&](const char* what, double r, double lo, double hi) {
    const bool ok = within(r, lo, hi);
    note("%-40s rate %.3f in [%.1f, %.1f]: %s", what, r, lo, hi, ok ? "yes" : "no");
    o.pass = o.pass && ok;
  };
  check("stabilized d=2 k=2 |sigma|_div", s.stabilized.rows.back().r_sigma_Hdiv, 1.7, 2.3);
  check("hybrid d=2 k=2 |sigma|", s.hybrid2.rows.back().r_sigma_L2, 2.7, 3.3);
  check("hybrid d=2 k=3 |sigma|", s.hybrid3.rows.back().r_sigma_L2, 3.6, 4.4);
  check("hybrid d=3 k=2 |sigma|", s.hybrid3d.rows.back().r_sigma_L2, 2.5, 3.5);
  // linear pairs: |sigma - sigma_h| + |u - u_h|
  const double want[3] = {2, 1, 1};
  for (std::size_t i = 0; i < s.linear.size(); ++i) {
    const auto& rows = s.linear[i].rows;
    const RateRow& a = rows[rows.size() - 2];
    const RateRow& b = rows.back();
    const double r = rate(a.err.sigma_L2 + a.err.u_L2, b.err.sigma_L2 + b.err.u_L2, a.h, b.h);
    const std::string what = to_string(s.linear[i].config.family) + " |sigma| + |u|";
    check(what.c_str(), r, want[i] - 0.3, want[i] + 0.3);
  }
  o.summary = "finest consecutive pair against the predicted orders";
  return o;
}

Outcome superconvergence(const Studies& s)
{
  Outcome o;
  if (s.hybrid2.rows.empty())
    throw std::runtime_error("the hybrid study did not run");
  const RateRow& r = s.hybrid2.rows.back();
  note("hybrid d=2 k=2: |Q u - u_h|_1,h rate %.3f, |eps(u - u*)| rate %.3f", r.r_super_1h, r.r_post_eps);
  o.pass = within(r.r_super_1h, 2.7, 3.3) && within(r.r_post_eps, 2.7, 3.3);
  o.summary = "both rates in [2.7, 3.3]";
  return o;
}

Outcome lambda_robustness()
{
  Outcome o;
  const Mesh mesh = uniform_box_mesh(2, 8);
  double lo = INFINITY, hi = 0;
  for (double lambda : {1.0, 1e4, 1e6}) {
    const ElasticityProblem pb = divergence_free_problem(1, lambda);
    const ErrorNorms e = error_norms(solve_hybrid(mesh, pb, 2), pb);
    lo = std::min(lo, e.sigma_L2);
    hi = std::max(hi, e.sigma_L2);
    const ElasticityProblem pm = manufactured_problem(2, 1, lambda);
    const ErrorNorms em = error_norms(solve_hybrid(mesh, pm, 2), pm);
    note("lambda %.0e: |sigma - sigma_h| %.4e (relative, manufactured: %.4e)", lambda, e.sigma_L2,
         em.sigma_L2 / em.sigma_norm);
  }
  o.pass = std::isfinite(hi) && lo > 0 && hi / lo <= 5;
  char buf[80];
  std::snprintf(buf, sizeof buf, "max/min stress error %.3f over lambda in {1, 1e4, 1e6}", hi / lo);
  o.summary = buf;
  return o;
}

Outcome equivalence()
{
  Outcome o;
  for (int d = 2; d <= 3; ++d) {
    const double diff = hybrid_mixed_difference(two_cell_mesh(d), manufactured_problem(d, 1, 1), 2);
    note("d=%d: max DoF difference %.2e", d, diff);
    o.pass = o.pass && diff <= 1e-9;
  }
  o.summary = "hybridized and mixed solutions agree to 1e-9";
  return o;
}

} // namespace

int main()
{
  Studies studies;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 dimension certification", dimensions},
      {"2 rigidity oracles", rigidity},
      {"3 unisolvence", unisolvence},
      {"4 conformity", conformity},
      {"5 div-range ranks", div_range},
      {"6 inf-sup surjectivity", infsup},
      {"7 convergence rates", [&] { return rates(studies); }},
      {"8 superconvergence and postprocessing", [&] { return superconvergence(studies); }},
      {"9 lambda-robustness", lambda_robustness},
      {"10 hybrid/mixed equivalence", equivalence},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.summary = std::string("exception: ") + e.what();
    }
    std::printf("[%s] %s: %s (%.0f s)\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.summary.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
