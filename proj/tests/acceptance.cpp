// Copyright 2026 The ECH Collocation Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "changepoint_oracle.hpp"
#include "ech/activity.hpp"
#include "ech/afp.hpp"
#include "ech/bench.hpp"
#include "ech/ech.hpp"
#include "ech/report.hpp"
#include "fixtures.hpp"

using namespace ech;
using fixtures::vec;

namespace {

// Tolerances of the criteria.
constexpr double kObjectiveRel = 1e-4;
constexpr double kPipelineBudget = 60.0;  // s
constexpr double kRowFraction = 0.5;
constexpr double kAfpJ = 1e-6;
constexpr double kRowTol = 1e-8;
constexpr double kPrimalTol = 1e-6;
constexpr double kDualTol = 1e-5;
constexpr double kFdTol = 1e-6;
constexpr double kExpDefect = 1e-6;
constexpr double kPolyDefect = 1e-12;

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
  std::printf("%s %2d %s: %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

template <class... A>
std::string fmt(const char* f, A... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

// Runs a criterion body; exceptions count as failures.
void criterion(int id, const std::string& name, const std::function<std::pair<bool, std::string>()>& body) {
  try {
    const auto [ok, detail] = body();
    report(id, name, ok, detail);
  } catch (const std::exception& e) {
    report(id, name, false, std::string("exception: ") + e.what());
  }
}

// Segment-circle oracle by dense sampling of the distance to the centre.
std::vector<int> crossed_zones(const BenchProblemSpec& s) {
  std::vector<int> out;
  for (int l = 0; l < static_cast<int>(s.zones.size()); ++l) {
    const auto& z = s.zones[l];
    double best = 1e300;
    for (int i = 0; i <= 200000; ++i) {
      const double a = i / 200000.0;
      best = std::min(best, std::hypot(s.start_north + a * (s.goal_north - s.start_north) - z.north,
                                       s.start_east + a * (s.goal_east - s.start_east) - z.east));
    }
    if (best < z.radius) out.push_back(l);
  }
  return out;
}

// Time the constant-speed straight path spends inside zone l.
double chord_time(const BenchProblemSpec& s, const NoFlyZone& z) {
  const double dn = s.goal_north - s.start_north, de = s.goal_east - s.start_east;
  const double len = std::hypot(dn, de);
  const double dist = std::abs((z.north - s.start_north) * de - (z.east - s.start_east) * dn) / len;
  if (dist >= z.radius) return 0.0;
  return 2.0 * std::sqrt(z.radius * z.radius - dist * dist) / len * (s.tf - s.t0);
}

double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

// ---------------------------------------------------------------- NLP examples

struct KktExample {
  std::string name;
  DenseNlp nlp;
  Vec start, z, eq, ineq, lower, upper;
};

std::vector<KktExample> kkt_examples() {
  std::vector<KktExample> out;
  {
    KktExample e;
    e.name = "x^2, x >= 1";
    e.nlp.variables = 1;
    e.nlp.inequality_count = 1;
    e.nlp.f = [](const Vec& z) { return z[0] * z[0]; };
    e.nlp.grad = [](const Vec& z) { return vec({2 * z[0]}); };
    e.nlp.g = [](const Vec& z) { return vec({1 - z[0]}); };
    e.nlp.g_jac = [](const Vec&) { return Mat(Mat::Constant(1, 1, -1.0)); };
    e.nlp.hess = [](const Vec&, double s, const Vec&, const Vec&) { return Mat(Mat::Constant(1, 1, 2 * s)); };
    e.start = vec({5.0});
    e.z = vec({1.0});
    e.ineq = vec({2.0});
    out.push_back(e);
  }
  {
    KktExample e;
    e.name = "unconstrained quadratic";
    e.nlp.variables = 2;
    e.nlp.f = [](const Vec& z) { return std::pow(z[0] - 2, 2) + std::pow(z[1] - 1, 2); };
    e.nlp.grad = [](const Vec& z) { return vec({2 * (z[0] - 2), 2 * (z[1] - 1)}); };
    e.nlp.hess = [](const Vec&, double s, const Vec&, const Vec&) { return Mat(2 * s * Mat::Identity(2, 2)); };
    e.start = vec({0.0, 0.0});
    e.z = vec({2.0, 1.0});
    out.push_back(e);
  }
  {
    KktExample e;
    e.name = "-x on [0, 3]";
    e.nlp.variables = 1;
    e.nlp.lower = vec({0.0});
    e.nlp.upper = vec({3.0});
    e.nlp.f = [](const Vec& z) { return -z[0]; };
    e.nlp.grad = [](const Vec&) { return vec({-1.0}); };
    e.nlp.hess = [](const Vec&, double, const Vec&, const Vec&) { return Mat(Mat::Zero(1, 1)); };
    e.start = vec({1.0});
    e.z = vec({3.0});
    e.lower = vec({0.0});
    e.upper = vec({1.0});
    out.push_back(e);
  }
  {
    KktExample e;
    e.name = "x^2 + y^2, x + y = 1";
    e.nlp.variables = 2;
    e.nlp.equality_count = 1;
    e.nlp.f = [](const Vec& z) { return z.squaredNorm(); };
    e.nlp.grad = [](const Vec& z) { return Vec(2 * z); };
    e.nlp.h = [](const Vec& z) { return vec({z[0] + z[1] - 1}); };
    e.nlp.h_jac = [](const Vec&) { return Mat(Mat::Ones(1, 2)); };
    e.nlp.hess = [](const Vec&, double s, const Vec&, const Vec&) { return Mat(2 * s * Mat::Identity(2, 2)); };
    e.start = vec({3.0, -2.0});
    e.z = vec({0.5, 0.5});
    e.eq = vec({-1.0});
    out.push_back(e);
  }
  return out;
}

double diff_or_zero(const Vec& expected, const Vec& got) {
  if (expected.size() == 0) return 0.0;
  if (got.size() != expected.size()) return 1e300;
  return (expected - got).cwiseAbs().maxCoeff();
}

struct FdError {
  double jacobian = 0.0;  // absolute, constraint Jacobians
  double gradient = 0.0;  // objective gradient, relative to max(1, |grad|)
};

// Analytic first derivatives against central differences.
FdError nlp_fd_error(const Nlp& nlp, const Vec& z) {
  FdError e;
  const Mat fd_grad = fixtures::fd_jacobian([&](const Vec& w) { return vec({nlp.objective(w)}); }, z);
  const Mat grad = nlp.objective_gradient(z).transpose();
  e.gradient = max_abs(grad - fd_grad) / std::max(1.0, max_abs(grad));
  if (nlp.num_equalities())
    e.jacobian = max_abs(Mat(nlp.equality_jacobian(z)) -
                         fixtures::fd_jacobian([&](const Vec& w) { return nlp.equalities(w); }, z));
  if (nlp.num_inequalities())
    e.jacobian = std::max(e.jacobian, max_abs(Mat(nlp.inequality_jacobian(z)) -
                                              fixtures::fd_jacobian([&](const Vec& w) { return nlp.inequalities(w); }, z)));
  return e;
}

// Uniform point inside the variable bounds.
Vec random_in_bounds(std::mt19937& rng, const Nlp& nlp) {
  const Vec lo = nlp.lower_bounds(), hi = nlp.upper_bounds();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vec z(lo.size());
  for (int i = 0; i < z.size(); ++i) {
    const double a = std::isfinite(lo[i]) ? lo[i] : -50.0;
    const double b = std::isfinite(hi[i]) ? hi[i] : 50.0;
    z[i] = a + (b - a) * unit(rng);
  }
  return z;
}

// Node values of closed-form trajectories on a transcription.
template <class Xf, class Uf>
Vec sample(const DiscretizedNlp& nlp, double tf, Xf xfun, Uf ufun) {
  const int N = nlp.num_nodes();
  const auto& prob = nlp.problem();
  NodeValues v{Mat(N, prob.state_dim()), Mat(N, prob.input_dim()), Vec::Zero(prob.param_dim()), tf};
  for (int i = 0; i < N; ++i) {
    const double t = nlp.node_time(i, tf);
    v.X.row(i) = xfun(t).transpose();
    v.U.row(i) = ufun(t).transpose();
  }
  return nlp.pack(v);
}

}  // namespace

int main() {
  const BenchProblem bench = bench_nfz5();
  const BenchProblemSpec& spec = bench.spec;
  const OcpProblem& prob = *bench.problem;
  const double T = spec.tf - spec.t0;
  const int sets = static_cast<int>(spec.zones.size());

  EchConfig cfg;
  cfg.recompute_repeats = 7;
  RunOptions opts;
  opts.timing_repeats = 3;
  opts.trajectory_samples = 51;
  const RunReport cmp = run_comparison(bench, cfg, opts);
  const PipelineReport& S = cmp.standard;
  const PipelineReport& E = cmp.ech;
  const bool both_ok = S.ok && E.ok && S.converged && E.converged;

  criterion(1, "optimality invariance", [&] {
    const bool ok = both_ok && cmp.objective_rel_diff <= kObjectiveRel && S.total_time <= kPipelineBudget &&
                    E.total_time <= kPipelineBudget;
    return std::make_pair(ok, fmt("J_std %.9g, J_ech %.9g, rel diff %.2e (<= %.0e); wall %.3f s / %.3f s (<= %.0f s)",
                                  S.objective, E.objective, cmp.objective_rel_diff, kObjectiveRel, S.total_time,
                                  E.total_time, kPipelineBudget));
  });

  criterion(2, "redundant-set identification", [&] {
    const auto crossed = crossed_zones(spec);
    std::set<int> expected;
    for (int l = 0; l < sets; ++l)
      if (std::find(crossed.begin(), crossed.end(), l) == crossed.end()) expected.insert(l);
    std::set<int> got;
    if (!E.history.empty())
      for (int l = 0; l < static_cast<int>(E.history[0].verdicts.size()); ++l)
        if (E.history[0].verdicts[l] == SetVerdict::PotentiallyRedundant) got.insert(l);
    std::string names;
    for (int l : got) names += " " + std::to_string(l + 1);
    const bool ok = E.ok && expected.size() == 3 && got == expected;
    return std::make_pair(ok, fmt("redundant after iteration 1:%s; oracle expects %zu untouched zones",
                                  names.c_str(), expected.size()));
  });

  criterion(3, "problem-size reduction", [&] {
    // Predicted share of rows: crossed zones keep their chord time plus two
    // buffers, the rest is removed.
    const double beta = cfg.beta < 0 ? 0.1 * T : cfg.beta;
    double kept = 0.0;
    for (int l : crossed_zones(spec)) kept += std::min(T, chord_time(spec, spec.zones[l]) + 2.0 * beta);
    const double predicted = kept / (sets * T);
    const double threshold = kRowFraction * S.final_inequality_rows;
    const bool ok = both_ok && predicted <= kRowFraction && E.final_inequality_rows <= threshold;
    return std::make_pair(ok, fmt("ECH %d rows vs standard %d (threshold %.1f); oracle-predicted share %.3f, actual %.3f",
                                  E.final_inequality_rows, S.final_inequality_rows, threshold, predicted,
                                  S.final_inequality_rows ? double(E.final_inequality_rows) / S.final_inequality_rows
                                                          : 0.0));
  });

  criterion(4, "relative speed", [&] {
    const bool ok = both_ok && E.total_time < S.total_time && E.recompute_time < S.recompute_time;
    return std::make_pair(ok, fmt("total %.4f s < %.4f s (%.0f%% lower); re-computation %.4f s < %.4f s (%.0f%% lower)",
                                  E.total_time, S.total_time, 100 * (1 - E.total_time / S.total_time),
                                  E.recompute_time, S.recompute_time, 100 * (1 - E.recompute_time / S.recompute_time)));
  });

  // Criteria 5 and 6 share the randomized AFP instances.
  std::vector<double> margins, jstars, rows;
  std::string afp_error;
  {
    std::mt19937 rng(20261018);
    std::uniform_int_distribution<int> kdist(6, 28);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    DiscretizedNlp solved(prob, bench.mesh, ActivationFilter::all(sets));
    const NlpSolution ref = solve(solved, WarmStart{solved.pack(straight_line_guess(spec, bench.mesh)), {}, {}, {}, {}, {}});
    const Interpolant ref_interp(discrete_solution(solved, ref));
    try {
      for (int trial = 0; trial < 20; ++trial) {
        const Mesh mesh = Mesh::uniform(kdist(rng));
        // Even trials start near the optimum, odd ones from the straight line
        // through zones 1 and 4; all get random perturbations.
        NodeValues warm = trial % 2 == 0 ? resample(prob, ref_interp, mesh) : straight_line_guess(spec, mesh);
        const double amp = 0.5 + 4.0 * unit(rng);
        for (int i = 1; i < warm.X.rows(); ++i) {
          warm.X(i, 0) += amp * gauss(rng);
          warm.X(i, 1) += amp * gauss(rng);
          warm.X(i, 2) += 0.2 * amp * gauss(rng);
          warm.X(i, 3) += 0.2 * amp * gauss(rng);
          warm.U(i, 0) += 0.1 * amp * gauss(rng);
          warm.U(i, 1) += 0.1 * amp * gauss(rng);
        }
        ActivationFilter filter = ActivationFilter::all(sets);
        if (trial % 4 == 3) {
          // ECH-style filter: redundant zones off, crossed zones on a window.
          for (int l = 0; l < sets; ++l) filter.rows[l] = RowFilter::none();
          filter.rows[0] = RowFilter::within({{25.0, 50.0}});
          filter.rows[3] = RowFilter::within({{0.0, 20.0}});
        }
        const AfpProblem afp = build_afp(prob, mesh, filter, warm);
        margins.push_back(afp_initial_margin(afp));
        const AfpResult r = solve_afp(afp);
        jstars.push_back(r.j_star);
        rows.push_back(r.max_row);
      }
    } catch (const std::exception& e) {
      afp_error = e.what();
    }
  }

  criterion(5, "AFP optimum is zero on feasible meshes", [&] {
    const double worst_j = jstars.empty() ? 1e300 : *std::max_element(jstars.begin(), jstars.end());
    const double worst_row = rows.empty() ? 1e300 : *std::max_element(rows.begin(), rows.end());
    const bool ok = afp_error.empty() && jstars.size() == 20 && worst_j <= kAfpJ && worst_row <= kRowTol;
    return std::make_pair(ok, afp_error.empty()
                                  ? fmt("%zu instances; max J* %.2e (<= %.0e), max row %.2e (<= %.0e)", jstars.size(),
                                        worst_j, kAfpJ, worst_row, kRowTol)
                                  : "build failed: " + afp_error);
  });

  criterion(6, "AFP start is strictly feasible", [&] {
    const double worst = margins.empty() ? 1e300 : *std::max_element(margins.begin(), margins.end());
    const bool ok = afp_error.empty() && margins.size() == 20 && worst < 0.0;
    return std::make_pair(ok, fmt("%zu instances; max (c_l - s_bar_l) at the start %.3e (< 0)", margins.size(), worst));
  });

  criterion(7, "feasible warm starts under the strict policy", [&] {
    EchConfig strict = cfg;
    strict.afp_policy = AfpPolicy::Strict;
    strict.constraint_handling = true;
    const EchResult r = run(prob, bench.mesh, straight_line_guess(spec, bench.mesh), strict);
    int checked = 0, violations = 0, afps = 0;
    double worst = -1e300;
    for (std::size_t k = 1; k < r.state.history.size(); ++k) {
      const auto& h = r.state.history[k];
      if (!h.warm_start_checked) {
        ++violations;
        continue;
      }
      ++checked;
      worst = std::max(worst, h.warm_start_violation);
      if (h.warm_start_violation > kRowTol) ++violations;
      if (h.afp_invoked) {
        ++afps;
        if (!(h.afp_start_margin < 0.0)) ++violations;
      }
    }
    const bool ok = r.state.converged && checked > 0 && violations == 0;
    return std::make_pair(ok, fmt("%d OCP warm starts checked (max row %.2e <= %.0e), %d AFP starts, %d violations",
                                  checked, worst, kRowTol, afps, violations));
  });

  criterion(8, "IPM correctness", [&] {
    double worst_z = 0.0, worst_m = 0.0;
    bool all_optimal = true;
    for (const auto& e : kkt_examples()) {
      const NlpSolution s = solve(e.nlp, WarmStart{e.start, {}, {}, {}, {}, {}});
      all_optimal = all_optimal && s.status == SolveStatus::Optimal;
      worst_z = std::max(worst_z, (s.z - e.z).cwiseAbs().maxCoeff());
      worst_m = std::max({worst_m, diff_or_zero(e.eq, s.eq_multipliers), diff_or_zero(e.ineq, s.ineq_multipliers),
                          diff_or_zero(e.lower, s.lower_bound_multipliers),
                          diff_or_zero(e.upper, s.upper_bound_multipliers)});
    }
    // Jacobians of bench transcriptions at random points.
    std::vector<BenchProblemSpec> specs{spec};
    specs.push_back(spec);
    specs.back().zones.clear();
    specs.push_back(spec);
    specs.back().zones = {{15.0, 20.0, 5.0}};
    std::mt19937 rng(8);
    FdError worst_fd;
    int points = 0;
    for (const auto& s : specs) {
      const BenchProblem b = bench_nfz5(s);
      const int ng = static_cast<int>(s.zones.size());
      DiscretizedNlp nlp(*b.problem, Mesh::uniform(6), ActivationFilter::all(ng));
      for (int k = 0; k < 10; ++k, ++points) {
        const FdError e = nlp_fd_error(nlp, random_in_bounds(rng, nlp));
        worst_fd.jacobian = std::max(worst_fd.jacobian, e.jacobian);
        worst_fd.gradient = std::max(worst_fd.gradient, e.gradient);
      }
    }
    const bool ok = all_optimal && worst_z <= kPrimalTol && worst_m <= kDualTol && worst_fd.jacobian <= kFdTol &&
                    worst_fd.gradient <= kFdTol;
    return std::make_pair(ok, fmt("4 KKT examples: max |z - z*| %.1e (<= %.0e), max |mult - mult*| %.1e (<= %.0e); "
                                  "%d random points on 3 bench problems: max Jacobian FD error %.1e (<= %.0e), "
                                  "objective gradient %.1e relative (<= %.0e)",
                                  worst_z, kPrimalTol, worst_m, kDualTol, points, worst_fd.jacobian, kFdTol,
                                  worst_fd.gradient, kFdTol));
  });

  criterion(9, "changepoint oracle", [&] {
    std::mt19937 rng(99);
    std::uniform_int_distribution<int> len(2, 30);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int bad = 0;
    double worst_gap = -1e300;
    for (int trial = 0; trial < 100; ++trial) {
      const int n = len(rng);
      std::vector<double> v(n);
      double level = unit(rng);
      for (int i = 0; i < n; ++i) {
        if (unit(rng) < 0.2) level = unit(rng);
        v[i] = std::clamp(level + 0.05 * (unit(rng) - 0.5), 0.0, 1.0);
      }
      const double pen = trial % 2 ? default_changepoint_penalty(v) : 0.02 + 0.5 * unit(rng);
      const double ours = segmentation_cost(v, detect_changepoints(v, pen), pen);
      const double opt = n <= 16 ? oracle::brute_force_cost(v, pen) : oracle::optimal_cost(v, pen);
      worst_gap = std::max(worst_gap, (ours - opt) / pen);
      if (ours > opt + pen + 1e-12) ++bad;
    }
    std::vector<double> step(100, 0.0);
    std::fill(step.begin() + 50, step.end(), 1.0);
    std::vector<double> stairs;
    for (double level : {0.0, 0.5, 1.0}) stairs.insert(stairs.end(), 40, level);
    const bool step_ok = detect_changepoints(step, 0.5) == std::vector<int>{50};
    const bool stairs_ok = detect_changepoints(stairs, 0.5) == std::vector<int>{40, 80};
    const bool ok = bad == 0 && step_ok && stairs_ok;
    return std::make_pair(ok, fmt("100 random sequences: %d above optimum + penalty (worst gap %.3f penalties); "
                                  "step %s, staircase %s",
                                  bad, worst_gap, step_ok ? "exact" : "wrong", stairs_ok ? "exact" : "wrong"));
  });

  criterion(10, "transcription accuracy", [&] {
    const auto growth = fixtures::scalar_linear(1.0, 0.0);
    const DiscretizedNlp exp_nlp(growth, Mesh::uniform(10), ActivationFilter::all(0));
    const double exp_defect = defect_residuals(
        exp_nlp, sample(exp_nlp, 1.0, [](double t) { return vec({std::exp(t)}); }, [](double) { return vec({0.0}); }))
                                  .cwiseAbs()
                                  .maxCoeff();
    double poly = 0.0;
    const auto di = fixtures::double_integrator(0, 3.0);
    for (const Mesh& mesh : {Mesh({0.0, 0.07, 0.3, 0.31, 0.55, 0.8, 1.0}), Mesh::uniform(1), Mesh::uniform(9)}) {
      const DiscretizedNlp nlp(di, mesh, ActivationFilter::all(0));
      const Vec z = sample(
          nlp, 3.0, [](double t) { return vec({t * t * t / 3 - t * t / 2 + t, t * t - t + 1}); },
          [](double t) { return vec({2 * t - 1}); });
      poly = std::max(poly, defect_residuals(nlp, z).cwiseAbs().maxCoeff());
    }
    const bool ok = exp_defect <= kExpDefect && poly <= kPolyDefect;
    return std::make_pair(ok, fmt("e^t on K = 10: max defect %.2e (<= %.0e); cubic/quadratic fixtures: %.2e (<= %.0e)",
                                  exp_defect, kExpDefect, poly, kPolyDefect));
  });

  criterion(11, "beta safety", [&] {
    int compared = 0, mismatches = 0;
    for (double beta : {T, 2.0 * T}) {
      EchConfig c = cfg;
      c.beta = beta;
      c.constraint_handling = true;
      const EchResult e = run(prob, bench.mesh, straight_line_guess(spec, bench.mesh), c);
      c.constraint_handling = false;
      const EchResult s = run(prob, bench.mesh, straight_line_guess(spec, bench.mesh), c);
      if (e.state.history.size() != s.state.history.size()) ++mismatches;
      for (std::size_t k = 0; k < std::min(e.state.history.size(), s.state.history.size()); ++k, ++compared) {
        const auto& he = e.state.history[k];
        const auto& hs = s.state.history[k];
        if (he.filter != hs.filter || he.inequality_rows != hs.inequality_rows || he.intervals != hs.intervals)
          ++mismatches;
      }
    }
    return std::make_pair(mismatches == 0 && compared > 0,
                          fmt("beta = T and 2T: %d iterations compared, %d differ from the standard rows", compared,
                              mismatches));
  });

  std::printf("%s: %d of 11 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
