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

#include "ech/ech.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>

#include "ech/errors.hpp"

namespace ech {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

double max_or(const Vec& v, double fallback) { return v.size() ? v.maxCoeff() : fallback; }

std::string format_time(double t, double t0, double tf) {
  const double tol = 1e-9 * std::max(1.0, tf - t0);
  if (std::abs(t - t0) <= tol) return "t0";
  if (std::abs(t - tf) <= tol) return "tf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", t);
  return buf;
}

}  // namespace

std::string to_string(AfpPolicy policy) { return policy == AfpPolicy::Strict ? "strict" : "practical"; }

std::string to_string(BetaMode mode) { return mode == BetaMode::Fixed ? "fixed" : "adaptive"; }

AfpPolicy afp_policy_from_string(const std::string& text) {
  if (text == "strict") return AfpPolicy::Strict;
  if (text == "practical") return AfpPolicy::Practical;
  throw InvalidArgument("unknown AFP policy '" + text + "'");
}

BetaMode beta_mode_from_string(const std::string& text) {
  if (text == "fixed") return BetaMode::Fixed;
  if (text == "adaptive") return BetaMode::Adaptive;
  throw InvalidArgument("unknown beta mode '" + text + "'");
}

void EchConfig::validate() const {
  if (!(zeta > 0)) throw InvalidArgument("zeta must be positive");
  if (!(eps_tol > 0) || !(eta_tol > 0)) throw InvalidArgument("error tolerances must be positive");
  if (max_mr_iterations < 1) throw InvalidArgument("max_mr_iterations must be at least 1");
  if (samples_per_interval < 1) throw InvalidArgument("samples_per_interval must be positive");
  if (recompute_repeats < 1) throw InvalidArgument("recompute_repeats must be positive");
  if (!(solver.tol_kkt > 0) || !(solver.tol_primal > 0)) throw InvalidArgument("solver tolerances must be positive");
  if (!(afp.feas_tol > 0)) throw InvalidArgument("AFP feasibility tolerance must be positive");
  if (std::isnan(beta)) throw InvalidArgument("beta is NaN");
}

bool EchConfig::operator==(const EchConfig& o) const {
  return constraint_handling == o.constraint_handling && zeta == o.zeta && beta == o.beta &&
         beta_mode == o.beta_mode && eps_tol == o.eps_tol && eta_tol == o.eta_tol &&
         max_mr_iterations == o.max_mr_iterations && afp_policy == o.afp_policy &&
         samples_per_interval == o.samples_per_interval && penalty == o.penalty &&
         refine.max_split == o.refine.max_split &&
         refine.max_total_intervals == o.refine.max_total_intervals &&
         solver.tol_kkt == o.solver.tol_kkt && solver.tol_primal == o.solver.tol_primal &&
         solver.max_iter == o.solver.max_iter && solver.mu_init == o.solver.mu_init &&
         afp.push == o.afp.push && afp.padding == o.afp.padding &&
         afp.proximal == o.afp.proximal && afp.feas_tol == o.afp.feas_tol &&
         recompute_repeats == o.recompute_repeats;
}

std::string history_cell(const ActivationFilter& filter, const OcpProblem& prob, int set, double t0,
                         double tf) {
  const RowFilter rf = set_filter(filter, prob, set);
  if (rf.kind == RowFilter::Kind::All) return "[t0, tf]";
  if (rf.kind == RowFilter::Kind::None) return "∅";
  std::string out;
  for (const auto& iv : rf.intervals) {
    if (!out.empty()) out += ' ';
    out += '[' + format_time(iv.start, t0, tf) + ' ' + format_time(iv.end, t0, tf) + ']';
  }
  return out;
}

EchResult run(const OcpProblem& prob, const Mesh& initial_mesh, const NodeValues& guess,
              const EchConfig& cfg) {
  cfg.validate();
  const auto t_start = Clock::now();
  const int ng = prob.num_path_constraints();
  const double t0 = prob.time().t0;

  EchState st;
  st.mesh = initial_mesh;
  st.filter = ActivationFilter::all(ng);
  st.previous_filter = st.filter;

  const ErrorOptions eopts{cfg.samples_per_interval, cfg.eta_tol, cfg.eps_tol};
  ActivityOptions aopts;
  aopts.zeta = cfg.zeta;
  aopts.eps_tol = cfg.eps_tol;
  aopts.penalty = cfg.penalty;
  aopts.samples_per_interval = cfg.samples_per_interval;

  auto nlp = std::make_unique<DiscretizedNlp>(prob, st.mesh, st.filter);
  Vec warm = nlp->pack(guess);
  IterationRecord pending;

  for (st.iteration = 1;; ++st.iteration) {
    st.final_warm_start = warm;
    const NlpSolution sol = solve(*nlp, WarmStart{warm, {}, {}, {}, {}, {}}, cfg.solver);

    IterationRecord rec = pending;
    rec.iteration = st.iteration;
    rec.intervals = st.mesh.num_intervals();
    rec.nodes = st.mesh.num_nodes();
    rec.filter = st.filter;
    rec.inequality_rows = nlp->num_inequalities();
    rec.status = sol.status;
    rec.nlp_iterations = sol.iterations;
    rec.nlp_time = sol.wall_time;
    rec.objective = sol.objective;
    if (sol.status != SolveStatus::Optimal) {
      st.history.push_back(rec);
      throw PipelineError("NLP solve in iteration " + std::to_string(st.iteration) + " ended with status " +
                              to_string(sol.status),
                          std::move(st));
    }

    st.solution = discrete_solution(*nlp, sol);
    const Interpolant interp(st.solution);
    st.errors = error_analysis(prob, st.solution, interp, eopts);
    st.activity = classify(prob, st.solution, interp, aopts);
    if (st.iteration == 1) {
      const double T = st.solution.tf - t0;
      st.beta = cfg.beta < 0 ? 0.1 * T : cfg.beta;
    }
    rec.max_eta = st.errors.max_eta();
    rec.max_violation = st.errors.max_violation();
    rec.verdicts = st.activity.verdicts;
    rec.beta = st.beta;
    st.history.push_back(rec);

    if (st.errors.passes()) {
      st.converged = true;
      break;
    }
    if (st.iteration >= cfg.max_mr_iterations) break;

    Mesh next_mesh = refine_mesh(st.mesh, st.errors, cfg.refine);
    ActivationFilter next_filter = ActivationFilter::all(ng);
    pending = IterationRecord{};
    if (cfg.constraint_handling) {
      Reactivation re = detect_reactivation(st.filter, st.activity, st.beta);
      if (cfg.beta_mode == BetaMode::Adaptive && re.kind == ReactivationKind::AfpRequired) st.beta *= 2.0;
      next_filter = buffer_intervals(st.activity, st.beta);
      pending.reactivation = re.kind;
      pending.reactivation_reasons = std::move(re.reasons);
    }

    const NodeValues resampled = resample(prob, interp, next_mesh);
    nlp = std::make_unique<DiscretizedNlp>(prob, next_mesh, next_filter);
    warm = nlp->pack(resampled);
    const double violation = max_or(nlp->inequalities(warm), -std::numeric_limits<double>::infinity());

    pending.warm_start_checked = true;
    bool need_afp = false;
    if (cfg.constraint_handling) {
      need_afp = cfg.afp_policy == AfpPolicy::Strict ? violation > cfg.solver.tol_primal
                                                      : pending.reactivation == ReactivationKind::AfpRequired;
    }
    if (need_afp) {
      const AfpProblem afp = build_afp(prob, next_mesh, next_filter, resampled, cfg.afp);
      pending.afp_invoked = true;
      pending.afp_start_margin = afp_initial_margin(afp);
      const AfpResult res = solve_afp(afp, cfg.solver);
      ++st.afp_invocations;
      pending.afp_j_star = res.j_star;
      pending.afp_iterations = res.solution.iterations;
      if (!res.feasible) {
        st.previous_filter = st.filter;
        st.filter = next_filter;
        st.mesh = std::move(next_mesh);
        throw PipelineError("auxiliary feasibility problem in iteration " + std::to_string(st.iteration + 1) +
                                " ended with J* = " + std::to_string(res.j_star) + " (" +
                                to_string(res.solution.status) + "); the mesh admits no feasible point",
                            std::move(st));
      }
      warm = nlp->pack(res.values);
      pending.warm_start_violation = max_or(nlp->inequalities(warm), -std::numeric_limits<double>::infinity());
    } else {
      pending.warm_start_violation = violation;
    }

    st.previous_filter = st.filter;
    st.filter = std::move(next_filter);
    st.mesh = std::move(next_mesh);
  }

  EchResult out;
  out.solution = st.solution;
  out.total_time = seconds_since(t_start);
  out.state = std::move(st);
  return out;
}

double recompute_time(const OcpProblem& prob, const EchState& state, const EchConfig& cfg) {
  const DiscretizedNlp nlp(prob, state.mesh, state.filter);
  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < cfg.recompute_repeats; ++r) {
    const auto t = Clock::now();
    const NlpSolution sol = solve(nlp, WarmStart{state.final_warm_start, {}, {}, {}, {}, {}}, cfg.solver);
    best = std::min(best, seconds_since(t));
    if (sol.status != SolveStatus::Optimal) throw Error("re-computation solve did not converge");
  }
  return best;
}

}  // namespace ech
