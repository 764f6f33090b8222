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

#include "ech/activity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "ech/errors.hpp"

namespace ech {

namespace {

struct PrefixSums {
  std::vector<double> s, q;
  explicit PrefixSums(const std::vector<double>& v) : s(v.size() + 1, 0.0), q(v.size() + 1, 0.0) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      s[i + 1] = s[i] + v[i];
      q[i + 1] = q[i] + v[i] * v[i];
    }
  }
  double sse(int b, int e) const {
    if (e - b < 2) return 0.0;
    const double sum = s[e] - s[b];
    return std::max(0.0, q[e] - q[b] - sum * sum / (e - b));
  }
};

struct Split {
  int begin, end, at;
  double gain;
};

Split best_split(const PrefixSums& ps, int b, int e) {
  Split best{b, e, -1, 0.0};
  const double whole = ps.sse(b, e);
  for (int p = b + 1; p < e; ++p) {
    const double gain = whole - ps.sse(b, p) - ps.sse(p, e);
    if (gain > best.gain) best = {b, e, p, gain};
  }
  return best;
}

std::vector<TimeInterval> merge(std::vector<TimeInterval> ivs) {
  std::sort(ivs.begin(), ivs.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
  std::vector<TimeInterval> out;
  for (const auto& iv : ivs) {
    if (!out.empty() && iv.start <= out.back().end) {
      out.back().end = std::max(out.back().end, iv.end);
    } else {
      out.push_back(iv);
    }
  }
  return out;
}

bool covered(const std::vector<TimeInterval>& ivs, double t, double tol) {
  return std::any_of(ivs.begin(), ivs.end(),
                     [&](const TimeInterval& iv) { return t >= iv.start - tol && t <= iv.end + tol; });
}

std::string format_time(double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", t);
  return buf;
}

}  // namespace

std::vector<double> normalize(const std::vector<double>& values) {
  if (values.empty()) return {};
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double mn = *lo, mx = *hi;
  std::vector<double> out(values.size(), 0.0);
  if (mx - mn <= 1e-12 * (1.0 + std::abs(mx))) return out;
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - mn) / (mx - mn);
  return out;
}

MultiplierField normalize(const MultiplierField& field) {
  MultiplierField out = field;
  for (auto& seq : out.constraints) {
    std::vector<double> v;
    for (const auto& s : seq) v.push_back(s.value);
    const auto nv = normalize(v);
    for (std::size_t i = 0; i < seq.size(); ++i) seq[i].value = nv[i];
  }
  return out;
}

double segment_sse(const std::vector<double>& values, int begin, int end) {
  return PrefixSums(values).sse(begin, end);
}

double segmentation_cost(const std::vector<double>& values, const std::vector<int>& changepoints,
                         double penalty) {
  const PrefixSums ps(values);
  double cost = 0.0;
  int b = 0;
  for (int cp : changepoints) {
    cost += ps.sse(b, cp);
    b = cp;
  }
  cost += ps.sse(b, static_cast<int>(values.size()));
  return cost + penalty * static_cast<double>(changepoints.size());
}

std::vector<int> detect_changepoints(const std::vector<double>& values, double penalty) {
  const int n = static_cast<int>(values.size());
  if (n < 2) return {};
  const PrefixSums ps(values);
  std::vector<Split> open{best_split(ps, 0, n)};
  std::vector<int> order;
  double cost = ps.sse(0, n);
  double best_cost = cost;
  std::size_t best_k = 0;
  while (true) {
    auto it = std::max_element(open.begin(), open.end(),
                               [](const Split& a, const Split& b) { return a.gain < b.gain; });
    if (it == open.end() || it->at < 0 || !(it->gain > 0.0)) break;
    const Split s = *it;
    open.erase(it);
    order.push_back(s.at);
    cost -= s.gain;
    open.push_back(best_split(ps, s.begin, s.at));
    open.push_back(best_split(ps, s.at, s.end));
    const double total = cost + penalty * static_cast<double>(order.size());
    if (total < best_cost - 1e-12 * (1.0 + std::abs(best_cost))) {
      best_cost = total;
      best_k = order.size();
    }
  }
  std::vector<int> out(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(best_k));
  std::sort(out.begin(), out.end());
  return out;
}

double default_changepoint_penalty(const std::vector<double>& values) {
  const double n = static_cast<double>(values.size());
  if (n < 2) return 0.0;
  return 0.1 * PrefixSums(values).sse(0, static_cast<int>(values.size()));
}

int ActivityReport::num_active_nodes(int set) const {
  int count = 0;
  for (std::size_t l = 0; l < active.size(); ++l)
    if (set_of_row[l] == set) count += static_cast<int>(std::count(active[l].begin(), active[l].end(), true));
  return count;
}

ActivityReport classify(const OcpProblem& prob, const DiscreteSolution& sol, const Interpolant& interp,
                        const ActivityOptions& opts) {
  const int ng = prob.num_path_constraints();
  const int N = sol.mesh.num_nodes();
  const int K = sol.mesh.num_intervals();
  if (static_cast<int>(sol.multipliers.constraints.size()) != ng)
    throw InvalidArgument("solution carries no multipliers for some path constraints");
  if (opts.zeta < 0 || opts.eps_tol < 0 || opts.samples_per_interval < 1)
    throw InvalidArgument("invalid activity options");

  ActivityReport rep;
  rep.t0 = sol.t0;
  rep.tf = sol.tf;
  rep.fixed_terminal_time = prob.time().fixed_terminal_time;
  for (int i = 0; i < N; ++i) rep.node_times.push_back(sol.node_time(i));
  for (int l = 0; l < ng; ++l) rep.set_of_row.push_back(prob.set_of_row(l));

  // Dense constraint samples on the same grid as the error analysis.
  const int M = opts.samples_per_interval + (opts.samples_per_interval % 2);
  std::vector<double> times;
  std::vector<Vec> values;
  for (int k = 0; k < K; ++k) {
    const double a = interp.interval_start(k), b = interp.interval_end(k);
    for (int q = (k == 0 ? 0 : 1); q <= M; ++q) {
      const double t = q == M ? b : a + (b - a) * q / M;
      times.push_back(t);
      values.push_back(evaluate_path_constraints(prob, interp.state(t), interp.input(t), t, sol.p));
    }
  }
  const double tol = 1e-12 * std::max(1.0, std::abs(sol.tf - sol.t0));

  double largest = 0.0;
  for (const auto& seq : sol.multipliers.constraints)
    for (const auto& s : seq) largest = std::max(largest, s.value);
  const double floor = std::max(opts.multiplier_floor_abs, opts.multiplier_floor_rel * largest);

  rep.active.assign(ng, std::vector<bool>(N, false));
  rep.active_by_violation.assign(ng, std::vector<bool>(N, false));
  rep.active_by_multiplier.assign(ng, std::vector<bool>(N, false));
  rep.intervals.assign(ng, {});
  rep.profiles.assign(ng, {});

  for (int l = 0; l < ng; ++l) {
    // Criterion (a): near-violation anywhere between the neighbouring nodes.
    for (int i = 0; i < N; ++i) {
      const double lo = rep.node_times[std::max(0, i - 1)] - tol;
      const double hi = rep.node_times[std::min(N - 1, i + 1)] + tol;
      auto first = std::lower_bound(times.begin(), times.end(), lo);
      for (auto it = first; it != times.end() && *it <= hi; ++it) {
        if (values[static_cast<std::size_t>(it - times.begin())][l] >= -opts.eps_tol) {
          rep.active_by_violation[l][i] = true;
          break;
        }
      }
    }

    // Criterion (b): segment means of normalized multipliers.
    SegmentedProfile& prof = rep.profiles[l];
    double last_t = -std::numeric_limits<double>::infinity();
    for (const auto& s : sol.multipliers.constraints[l]) {
      if (s.node < 0 || s.node >= N) throw InvalidArgument("multiplier node index out of range");
      if (!(s.t > last_t)) throw InvalidArgument("multiplier times must be strictly increasing");
      if (!(s.value >= 0.0) && !(s.value > -1e-12)) throw InvalidArgument("negative path multiplier");
      last_t = s.t;
      prof.nodes.push_back(s.node);
      prof.raw.push_back(s.value);
    }
    std::vector<double> cleaned = prof.raw;
    for (double& v : cleaned) v = v < floor ? 0.0 : v;
    prof.normalized = normalize(cleaned);
    const double pen = opts.penalty >= 0 ? opts.penalty : default_changepoint_penalty(prof.normalized);
    prof.changepoints = detect_changepoints(prof.normalized, pen);
    std::vector<int> bounds{0};
    bounds.insert(bounds.end(), prof.changepoints.begin(), prof.changepoints.end());
    bounds.push_back(static_cast<int>(prof.normalized.size()));
    for (std::size_t j = 0; j + 1 < bounds.size(); ++j) {
      const int b = bounds[j], e = bounds[j + 1];
      if (e <= b) continue;
      double mean = 0.0;
      for (int q = b; q < e; ++q) mean += prof.normalized[q];
      mean /= (e - b);
      prof.segment_means.push_back(mean);
      prof.segment_active.push_back(mean >= opts.zeta);
      if (mean >= opts.zeta)
        for (int q = b; q < e; ++q) rep.active_by_multiplier[l][prof.nodes[q]] = true;
    }

    for (int i = 0; i < N; ++i) rep.active[l][i] = rep.active_by_violation[l][i] || rep.active_by_multiplier[l][i];
    for (int i = 0; i < N;) {
      if (!rep.active[l][i]) {
        ++i;
        continue;
      }
      int j = i;
      while (j + 1 < N && rep.active[l][j + 1]) ++j;
      rep.intervals[l].push_back({rep.node_times[i], rep.node_times[j]});
      i = j + 1;
    }
  }

  const int sets = static_cast<int>(prob.constraint_sets().size());
  rep.verdicts.assign(sets, SetVerdict::PotentiallyRedundant);
  for (int l = 0; l < ng; ++l)
    if (std::find(rep.active[l].begin(), rep.active[l].end(), true) != rep.active[l].end())
      rep.verdicts[rep.set_of_row[l]] = SetVerdict::PotentiallyEnforced;
  return rep;
}

ActivationFilter buffer_intervals(const ActivityReport& report, double beta) {
  if (!(beta >= 0.0)) throw InvalidArgument("buffer beta must be non-negative");
  const int ng = static_cast<int>(report.intervals.size());
  const double t0 = report.t0, tf = report.tf;
  if (beta >= tf - t0) return ActivationFilter::all(ng);
  ActivationFilter f = ActivationFilter::none(ng);
  for (int l = 0; l < ng; ++l) {
    if (report.verdicts[report.set_of_row[l]] == SetVerdict::PotentiallyRedundant) continue;
    if (!report.fixed_terminal_time) {
      f.rows[l] = RowFilter::all();
      continue;
    }
    std::vector<TimeInterval> grown;
    for (const auto& iv : report.intervals[l])
      grown.push_back({std::max(t0, iv.start - beta), std::min(tf, iv.end + beta)});
    grown = merge(std::move(grown));
    if (!grown.empty()) f.rows[l] = RowFilter::within(std::move(grown));
  }
  return f;
}

RowFilter set_filter(const ActivationFilter& filter, const OcpProblem& prob, int set) {
  std::vector<TimeInterval> all;
  for (int row : prob.constraint_sets()[set].rows) {
    const auto& rf = filter.rows[row];
    if (rf.kind == RowFilter::Kind::All) return RowFilter::all();
    if (rf.kind == RowFilter::Kind::Intervals) all.insert(all.end(), rf.intervals.begin(), rf.intervals.end());
  }
  if (all.empty()) return RowFilter::none();
  return RowFilter::within(merge(std::move(all)));
}

Reactivation detect_reactivation(const ActivationFilter& previous, const ActivityReport& report,
                                 double beta) {
  const int ng = static_cast<int>(report.intervals.size());
  if (static_cast<int>(previous.rows.size()) != ng) throw InvalidArgument("filter size mismatch");
  Reactivation out;
  const double tol = 1e-9 * std::max(1.0, report.tf - report.t0);
  const int sets = static_cast<int>(report.verdicts.size());

  std::vector<bool> was_removed(sets, true);
  for (int l = 0; l < ng; ++l)
    if (previous.rows[l].kind != RowFilter::Kind::None) was_removed[report.set_of_row[l]] = false;
  for (int s = 0; s < sets; ++s) {
    if (was_removed[s] && report.verdicts[s] == SetVerdict::PotentiallyEnforced)
      out.reasons.push_back("set " + std::to_string(s) + " was removed and is now potentially enforced");
  }
  for (int l = 0; l < ng; ++l) {
    const int s = report.set_of_row[l];
    if (was_removed[s] || report.verdicts[s] == SetVerdict::PotentiallyRedundant) continue;
    const auto& prev = previous.rows[l];
    if (prev.kind == RowFilter::Kind::All) continue;
    for (const auto& iv : report.intervals[l]) {
      for (double e : {iv.start, iv.end}) {
        if (!covered(prev.intervals, e, tol)) {
          out.reasons.push_back("constraint " + std::to_string(l) + " activation endpoint " + format_time(e) +
                                " lies outside the buffered intervals");
        }
      }
    }
  }
  if (!out.reasons.empty()) {
    out.kind = ReactivationKind::AfpRequired;
  } else {
    out.kind = buffer_intervals(report, beta) == previous ? ReactivationKind::NoChange
                                                          : ReactivationKind::WithinBuffer;
  }
  return out;
}

}  // namespace ech
