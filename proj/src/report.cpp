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

#include "ech/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "ech/errors.hpp"
#include "json.hpp"

namespace ech {

namespace {

using nlohmann::json;

// ---------------------------------------------------------------- numbers

json num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double get_num(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw InvalidArgument("malformed number '" + s + "' in run record");
  }
  return j.get<double>();
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* b = text.data();
  const char* e = b + text.size();
  while (b < e && std::isspace(static_cast<unsigned char>(*b))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(e[-1]))) --e;
  const auto r = std::from_chars(b, e, v);
  if (r.ec != std::errc() || r.ptr != e) throw InvalidArgument("setting " + key + ": '" + text + "' is not a number");
  return v;
}

int parse_int(const std::string& key, const std::string& text) {
  const double v = parse_double(key, text);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw InvalidArgument("setting " + key + ": '" + text + "' is not an integer");
  return static_cast<int>(v);
}

// ---------------------------------------------------------------- text layout

std::size_t display_width(const std::string& s) {
  std::size_t n = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++n;
  return n;
}

std::string pad(const std::string& s, std::size_t width) {
  const std::size_t w = display_width(s);
  return s + std::string(width > w ? width - w : 0, ' ');
}

std::string render(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths;
  for (const auto& r : rows) {
    if (widths.size() < r.size()) widths.resize(r.size(), 0);
    for (std::size_t c = 0; c < r.size(); ++c) widths[c] = std::max(widths[c], display_width(r[c]));
  }
  std::string out;
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t c = 0; c < r.size(); ++c) line += (c + 1 < r.size()) ? pad(r[c], widths[c] + 2) : r[c];
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + '\n';
  }
  return out;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---------------------------------------------------------------- JSON pieces

json filter_to_json(const ActivationFilter& f) {
  json rows = json::array();
  for (const auto& r : f.rows) {
    json jr;
    jr["kind"] = r.kind == RowFilter::Kind::All ? "all" : r.kind == RowFilter::Kind::None ? "none" : "intervals";
    json iv = json::array();
    for (const auto& t : r.intervals) iv.push_back({num(t.start), num(t.end)});
    jr["intervals"] = iv;
    rows.push_back(jr);
  }
  return rows;
}

ActivationFilter filter_from_json(const json& j) {
  ActivationFilter f;
  for (const auto& jr : j) {
    RowFilter r;
    const auto kind = jr.at("kind").get<std::string>();
    r.kind = kind == "all" ? RowFilter::Kind::All : kind == "none" ? RowFilter::Kind::None : RowFilter::Kind::Intervals;
    for (const auto& iv : jr.at("intervals")) r.intervals.push_back({get_num(iv.at(0)), get_num(iv.at(1))});
    f.rows.push_back(std::move(r));
  }
  return f;
}

SolveStatus status_from_string(const std::string& s) {
  for (auto st : {SolveStatus::Optimal, SolveStatus::MaxIter, SolveStatus::RestorationFailed,
                  SolveStatus::InfeasibleDetected})
    if (to_string(st) == s) return st;
  throw InvalidArgument("unknown solve status '" + s + "' in run record");
}

json record_to_json(const IterationRecord& r) {
  json j;
  j["iteration"] = r.iteration;
  j["intervals"] = r.intervals;
  j["nodes"] = r.nodes;
  j["filter"] = filter_to_json(r.filter);
  j["inequality_rows"] = r.inequality_rows;
  j["status"] = to_string(r.status);
  j["nlp_iterations"] = r.nlp_iterations;
  j["nlp_time"] = num(r.nlp_time);
  j["objective"] = num(r.objective);
  j["max_eta"] = num(r.max_eta);
  j["max_violation"] = num(r.max_violation);
  json v = json::array();
  for (auto x : r.verdicts) v.push_back(x == SetVerdict::PotentiallyEnforced ? "enforced" : "redundant");
  j["verdicts"] = v;
  j["reactivation"] = static_cast<int>(r.reactivation);
  j["reactivation_reasons"] = r.reactivation_reasons;
  j["beta"] = num(r.beta);
  j["afp_invoked"] = r.afp_invoked;
  j["afp_j_star"] = num(r.afp_j_star);
  j["afp_iterations"] = r.afp_iterations;
  j["afp_start_margin"] = num(r.afp_start_margin);
  j["warm_start_checked"] = r.warm_start_checked;
  j["warm_start_violation"] = num(r.warm_start_violation);
  return j;
}

IterationRecord record_from_json(const json& j) {
  IterationRecord r;
  r.iteration = j.at("iteration");
  r.intervals = j.at("intervals");
  r.nodes = j.at("nodes");
  r.filter = filter_from_json(j.at("filter"));
  r.inequality_rows = j.at("inequality_rows");
  r.status = status_from_string(j.at("status"));
  r.nlp_iterations = j.at("nlp_iterations");
  r.nlp_time = get_num(j.at("nlp_time"));
  r.objective = get_num(j.at("objective"));
  r.max_eta = get_num(j.at("max_eta"));
  r.max_violation = get_num(j.at("max_violation"));
  for (const auto& v : j.at("verdicts"))
    r.verdicts.push_back(v == "enforced" ? SetVerdict::PotentiallyEnforced : SetVerdict::PotentiallyRedundant);
  r.reactivation = static_cast<ReactivationKind>(j.at("reactivation").get<int>());
  r.reactivation_reasons = j.at("reactivation_reasons").get<std::vector<std::string>>();
  r.beta = get_num(j.at("beta"));
  r.afp_invoked = j.at("afp_invoked");
  r.afp_j_star = get_num(j.at("afp_j_star"));
  r.afp_iterations = j.at("afp_iterations");
  r.afp_start_margin = get_num(j.at("afp_start_margin"));
  r.warm_start_checked = j.at("warm_start_checked");
  r.warm_start_violation = get_num(j.at("warm_start_violation"));
  return r;
}

json matrix_to_json(const Mat& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(num(m(i, c)));
    rows.push_back(row);
  }
  return rows;
}

Mat matrix_from_json(const json& j, int cols) {
  Mat m(static_cast<int>(j.size()), cols);
  for (int i = 0; i < m.rows(); ++i) {
    if (static_cast<int>(j[i].size()) != cols) throw InvalidArgument("ragged matrix in run record");
    for (int c = 0; c < cols; ++c) m(i, c) = get_num(j[i][c]);
  }
  return m;
}

json pipeline_to_json(const PipelineReport& p) {
  json j;
  j["name"] = p.name;
  j["ok"] = p.ok;
  j["message"] = p.message;
  j["converged"] = p.converged;
  j["total_time"] = num(p.total_time);
  j["recompute_time"] = num(p.recompute_time);
  j["mr_iterations"] = p.mr_iterations;
  j["objective"] = num(p.objective);
  j["final_intervals"] = p.final_intervals;
  j["final_inequality_rows"] = p.final_inequality_rows;
  j["afp_invocations"] = p.afp_invocations;
  json h = json::array();
  for (const auto& r : p.history) h.push_back(record_to_json(r));
  j["history"] = h;
  j["cells"] = p.cells;
  j["trajectory_columns"] = p.trajectory.cols();
  j["trajectory"] = matrix_to_json(p.trajectory);
  return j;
}

PipelineReport pipeline_from_json(const json& j) {
  PipelineReport p;
  p.name = j.at("name");
  p.ok = j.at("ok");
  p.message = j.at("message");
  p.converged = j.at("converged");
  p.total_time = get_num(j.at("total_time"));
  p.recompute_time = get_num(j.at("recompute_time"));
  p.mr_iterations = j.at("mr_iterations");
  p.objective = get_num(j.at("objective"));
  p.final_intervals = j.at("final_intervals");
  p.final_inequality_rows = j.at("final_inequality_rows");
  p.afp_invocations = j.at("afp_invocations");
  for (const auto& r : j.at("history")) p.history.push_back(record_from_json(r));
  p.cells = j.at("cells").get<std::vector<std::vector<std::string>>>();
  p.trajectory = matrix_from_json(j.at("trajectory"), j.at("trajectory_columns"));
  return p;
}

json spec_to_json(const BenchProblemSpec& s) {
  json j;
  j["name"] = s.name;
  j["t0"] = num(s.t0);
  j["tf"] = num(s.tf);
  j["start"] = {num(s.start_north), num(s.start_east), num(s.start_vnorth), num(s.start_veast)};
  j["goal"] = {num(s.goal_north), num(s.goal_east)};
  json z = json::array();
  for (const auto& nz : s.zones) z.push_back({num(nz.north), num(nz.east), num(nz.radius)});
  j["zones"] = z;
  j["position_bound"] = num(s.position_bound);
  j["velocity_bound"] = num(s.velocity_bound);
  j["accel_bound"] = num(s.accel_bound);
  j["effort_weight"] = num(s.effort_weight);
  j["initial_intervals"] = s.initial_intervals;
  return j;
}

BenchProblemSpec spec_from_json(const json& j) {
  BenchProblemSpec s;
  s.name = j.at("name");
  s.t0 = get_num(j.at("t0"));
  s.tf = get_num(j.at("tf"));
  const auto& st = j.at("start");
  s.start_north = get_num(st.at(0));
  s.start_east = get_num(st.at(1));
  s.start_vnorth = get_num(st.at(2));
  s.start_veast = get_num(st.at(3));
  s.goal_north = get_num(j.at("goal").at(0));
  s.goal_east = get_num(j.at("goal").at(1));
  for (const auto& z : j.at("zones")) s.zones.push_back({get_num(z.at(0)), get_num(z.at(1)), get_num(z.at(2))});
  s.position_bound = get_num(j.at("position_bound"));
  s.velocity_bound = get_num(j.at("velocity_bound"));
  s.accel_bound = get_num(j.at("accel_bound"));
  s.effort_weight = get_num(j.at("effort_weight"));
  s.initial_intervals = j.at("initial_intervals");
  return s;
}

json config_to_json(const EchConfig& c) {
  json j;
  j["zeta"] = num(c.zeta);
  j["beta"] = num(c.beta);
  j["beta_mode"] = to_string(c.beta_mode);
  j["eps_tol"] = num(c.eps_tol);
  j["eta_tol"] = num(c.eta_tol);
  j["max_mr_iterations"] = c.max_mr_iterations;
  j["afp_policy"] = to_string(c.afp_policy);
  j["samples_per_interval"] = c.samples_per_interval;
  j["penalty"] = num(c.penalty);
  j["max_split"] = c.refine.max_split;
  j["max_total_intervals"] = c.refine.max_total_intervals;
  j["tol_kkt"] = num(c.solver.tol_kkt);
  j["tol_primal"] = num(c.solver.tol_primal);
  j["max_iter"] = c.solver.max_iter;
  j["mu_init"] = num(c.solver.mu_init);
  j["afp_push"] = num(c.afp.push);
  j["afp_padding"] = num(c.afp.padding);
  j["afp_proximal"] = num(c.afp.proximal);
  j["afp_feas_tol"] = num(c.afp.feas_tol);
  j["recompute_repeats"] = c.recompute_repeats;
  return j;
}

EchConfig config_from_json(const json& j) {
  EchConfig c;
  c.zeta = get_num(j.at("zeta"));
  c.beta = get_num(j.at("beta"));
  c.beta_mode = beta_mode_from_string(j.at("beta_mode"));
  c.eps_tol = get_num(j.at("eps_tol"));
  c.eta_tol = get_num(j.at("eta_tol"));
  c.max_mr_iterations = j.at("max_mr_iterations");
  c.afp_policy = afp_policy_from_string(j.at("afp_policy"));
  c.samples_per_interval = j.at("samples_per_interval");
  c.penalty = get_num(j.at("penalty"));
  c.refine.max_split = j.at("max_split");
  c.refine.max_total_intervals = j.at("max_total_intervals");
  c.solver.tol_kkt = get_num(j.at("tol_kkt"));
  c.solver.tol_primal = get_num(j.at("tol_primal"));
  c.solver.max_iter = j.at("max_iter");
  c.solver.mu_init = get_num(j.at("mu_init"));
  c.afp.push = get_num(j.at("afp_push"));
  c.afp.padding = get_num(j.at("afp_padding"));
  c.afp.proximal = get_num(j.at("afp_proximal"));
  c.afp.feas_tol = get_num(j.at("afp_feas_tol"));
  c.recompute_repeats = j.at("recompute_repeats");
  return c;
}


void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write to " + path.string() + " failed");
}

std::string trajectory_csv(const RunReport& report, const PipelineReport& p) {
  std::string out;
  for (std::size_t c = 0; c < report.trajectory_columns.size(); ++c)
    out += (c ? "," : "") + report.trajectory_columns[c];
  out += '\n';
  for (int i = 0; i < p.trajectory.rows(); ++i) {
    for (int c = 0; c < p.trajectory.cols(); ++c) out += (c ? "," : "") + fmt("%.10g", p.trajectory(i, c));
    out += '\n';
  }
  return out;
}

}  // namespace

bool PipelineReport::operator==(const PipelineReport& o) const {
  auto same_bits = [](double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); };
  if (trajectory.rows() != o.trajectory.rows() || trajectory.cols() != o.trajectory.cols()) return false;
  for (int i = 0; i < trajectory.size(); ++i)
    if (!same_bits(trajectory.data()[i], o.trajectory.data()[i])) return false;
  return name == o.name && ok == o.ok && message == o.message && converged == o.converged &&
         same_bits(total_time, o.total_time) && same_bits(recompute_time, o.recompute_time) &&
         mr_iterations == o.mr_iterations && same_bits(objective, o.objective) &&
         final_intervals == o.final_intervals && final_inequality_rows == o.final_inequality_rows &&
         afp_invocations == o.afp_invocations && history == o.history && cells == o.cells;
}

bool RunReport::operator==(const RunReport& o) const {
  return spec == o.spec && config == o.config && set_names == o.set_names &&
         trajectory_columns == o.trajectory_columns && has_standard == o.has_standard &&
         has_ech == o.has_ech && standard == o.standard && ech == o.ech &&
         objective_rel_diff == o.objective_rel_diff && objectives_agree == o.objectives_agree;
}

PipelineReport run_pipeline(const BenchProblem& bench, const EchConfig& cfg, bool constraint_handling,
                            const RunOptions& opts) {
  PipelineReport rep;
  rep.name = constraint_handling ? "ech" : "standard";
  EchConfig c = cfg;
  c.constraint_handling = constraint_handling;
  const OcpProblem& prob = *bench.problem;
  const NodeValues guess = straight_line_guess(bench.spec, bench.mesh);
  const int sets = static_cast<int>(prob.constraint_sets().size());

  auto fill_history = [&](const EchState& st) {
    rep.history = st.history;
    rep.mr_iterations = static_cast<int>(st.history.size());
    rep.afp_invocations = st.afp_invocations;
    rep.cells.assign(sets, {});
    for (const auto& h : st.history)
      for (int s = 0; s < sets; ++s)
        rep.cells[s].push_back(history_cell(h.filter, prob, s, prob.time().t0, bench.spec.tf));
  };

  std::optional<EchResult> first;
  double best = std::numeric_limits<double>::infinity();
  try {
    for (int r = 0; r < std::max(1, opts.timing_repeats); ++r) {
      EchResult res = run(prob, bench.mesh, guess, c);
      best = std::min(best, res.total_time);
      if (!first) first = std::move(res);
    }
    rep.recompute_time = recompute_time(prob, first->state, c);
  } catch (const PipelineError& e) {
    rep.ok = false;
    rep.message = e.what();
    fill_history(e.state());
    return rep;
  } catch (const Error& e) {
    rep.ok = false;
    rep.message = e.what();
    if (first) fill_history(first->state);
    return rep;
  }

  const EchState& st = first->state;
  rep.ok = true;
  rep.message = st.converged ? "converged" : "iteration limit reached";
  rep.converged = st.converged;
  rep.total_time = best;
  fill_history(st);
  rep.objective = st.history.back().objective;
  rep.final_intervals = st.mesh.num_intervals();
  rep.final_inequality_rows = st.history.back().inequality_rows;

  const Interpolant interp(first->solution);
  const int S = std::max(2, opts.trajectory_samples);
  const int n = prob.state_dim(), m = prob.input_dim();
  rep.trajectory.resize(S, 1 + n + m);
  for (int i = 0; i < S; ++i) {
    const double t = interp.t0() + (interp.tf() - interp.t0()) * i / (S - 1);
    rep.trajectory(i, 0) = t;
    rep.trajectory.row(i).segment(1, n) = interp.state(t).transpose();
    rep.trajectory.row(i).segment(1 + n, m) = interp.input(t).transpose();
  }
  return rep;
}

RunReport run_comparison(const BenchProblem& bench, const EchConfig& cfg, const RunOptions& opts) {
  RunReport out;
  out.spec = bench.spec;
  out.config = cfg;
  const OcpProblem& prob = *bench.problem;
  for (const auto& s : prob.constraint_sets()) out.set_names.push_back(s.id);
  out.trajectory_columns.push_back("t");
  for (const auto& n : prob.state_names()) out.trajectory_columns.push_back(n);
  for (const auto& n : prob.input_names()) out.trajectory_columns.push_back(n);
  if (opts.run_standard) {
    out.standard = run_pipeline(bench, cfg, false, opts);
    out.has_standard = true;
  }
  if (opts.run_ech) {
    out.ech = run_pipeline(bench, cfg, true, opts);
    out.has_ech = true;
  }
  if (out.has_standard && out.has_ech && out.standard.ok && out.ech.ok) {
    out.objective_rel_diff = std::abs(out.ech.objective - out.standard.objective) /
                             std::max(std::abs(out.standard.objective), std::numeric_limits<double>::min());
    out.objectives_agree = out.objective_rel_diff <= kObjectiveAgreementTol;
  }
  return out;
}

std::string history_table(const RunReport& report, const PipelineReport& p) {
  std::string out = "Constraint activation intervals implemented in the OCP [s] (" + p.name + ", t0 = " +
                    fmt("%g", report.spec.t0) + ", tf = " + fmt("%g", report.spec.tf) + ")\n";
  std::vector<std::vector<std::string>> rows(2);
  rows[0].push_back("");
  rows[1].push_back("");
  for (const auto& h : p.history) {
    rows[0].push_back("MR Iteration " + std::to_string(h.iteration));
    rows[1].push_back("(K = " + std::to_string(h.intervals) + ")");
  }
  if (!p.history.empty()) {
    for (std::size_t s = 0; s < report.set_names.size(); ++s) {
      std::vector<std::string> row{report.set_names[s]};
      if (s < p.cells.size()) row.insert(row.end(), p.cells[s].begin(), p.cells[s].end());
      rows.push_back(std::move(row));
    }
  }
  return out + render(rows);
}

std::string comparison_table(const RunReport& report) {
  const PipelineReport& a = report.standard;
  const PipelineReport& b = report.ech;
  auto lower = [](double base, double v) {
    if (!(base > 0)) return std::string();
    const double pct = 100.0 * (base - v) / base;
    return fmt(pct >= 0 ? " (%.0f%% lower)" : " (%.0f%% higher)", std::abs(pct));
  };
  auto cell = [](const PipelineReport& p, const std::string& v) { return p.ok ? v : "failed"; };
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"", "Standard Solve", "With External Constraint Handling"});
  rows.push_back({"Total Computation Time [s]", cell(a, fmt("%.4f", a.total_time)),
                  cell(b, fmt("%.4f", b.total_time) + (a.ok ? lower(a.total_time, b.total_time) : ""))});
  rows.push_back({"No. of Mesh Refinement Iterations", cell(a, std::to_string(a.mr_iterations)),
                  cell(b, std::to_string(b.mr_iterations))});
  rows.push_back({"Re-computation Time [s]", cell(a, fmt("%.4f", a.recompute_time)),
                  cell(b, fmt("%.4f", b.recompute_time) + (a.ok ? lower(a.recompute_time, b.recompute_time) : ""))});
  rows.push_back({"Objective", cell(a, fmt("%.6f", a.objective)), cell(b, fmt("%.6f", b.objective))});
  rows.push_back({"Final Inequality Rows", cell(a, std::to_string(a.final_inequality_rows)),
                  cell(b, std::to_string(b.final_inequality_rows))});
  rows.push_back({"AFP Solves", cell(a, std::to_string(a.afp_invocations)), cell(b, std::to_string(b.afp_invocations))});
  std::string out = "Computational performance comparison\n" + render(rows);
  if (report.objective_rel_diff >= 0)
    out += "Relative objective difference: " + fmt("%.3e", report.objective_rel_diff) +
           (report.objectives_agree ? " (agree)\n" : " (DISAGREE)\n");
  return out;
}

void emit_reports(const RunReport& report, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) throw IoError("cannot create output directory " + out_dir);
  const fs::path dir(out_dir);

  std::string history;
  if (report.has_standard) history += history_table(report, report.standard);
  if (report.has_ech) history += (history.empty() ? "" : "\n") + history_table(report, report.ech);
  write_file(dir / "history.txt", history);
  if (report.has_standard && report.has_ech) write_file(dir / "comparison.txt", comparison_table(report));
  if (report.has_standard) write_file(dir / "trajectory_standard.csv", trajectory_csv(report, report.standard));
  if (report.has_ech) write_file(dir / "trajectory_ech.csv", trajectory_csv(report, report.ech));
  std::string nfz = "zone,north,east,radius\n";
  for (std::size_t l = 0; l < report.spec.zones.size(); ++l) {
    const auto& z = report.spec.zones[l];
    nfz += std::to_string(l + 1) + "," + fmt("%.10g", z.north) + "," + fmt("%.10g", z.east) + "," +
           fmt("%.10g", z.radius) + "\n";
  }
  write_file(dir / "nfz.csv", nfz);
  save_run_record(report, (dir / "run_record.json").string());
}

std::string to_json(const RunReport& r) {
  json j;
  j["format"] = "ech-run-record";
  j["version"] = 1;
  j["spec"] = spec_to_json(r.spec);
  j["config"] = config_to_json(r.config);
  j["set_names"] = r.set_names;
  j["trajectory_columns"] = r.trajectory_columns;
  j["has_standard"] = r.has_standard;
  j["has_ech"] = r.has_ech;
  if (r.has_standard) j["standard"] = pipeline_to_json(r.standard);
  if (r.has_ech) j["ech"] = pipeline_to_json(r.ech);
  j["objective_rel_diff"] = num(r.objective_rel_diff);
  j["objectives_agree"] = r.objectives_agree;
  return j.dump(1);
}

RunReport run_report_from_json(const std::string& text) {
  RunReport r;
  try {
    const json j = json::parse(text);
    if (j.value("format", "") != "ech-run-record") throw InvalidArgument("not a run record");
    r.spec = spec_from_json(j.at("spec"));
    r.config = config_from_json(j.at("config"));
    r.set_names = j.at("set_names").get<std::vector<std::string>>();
    r.trajectory_columns = j.at("trajectory_columns").get<std::vector<std::string>>();
    r.has_standard = j.at("has_standard");
    r.has_ech = j.at("has_ech");
    if (r.has_standard) r.standard = pipeline_from_json(j.at("standard"));
    if (r.has_ech) r.ech = pipeline_from_json(j.at("ech"));
    r.objective_rel_diff = get_num(j.at("objective_rel_diff"));
    r.objectives_agree = j.at("objectives_agree");
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed run record: ") + e.what());
  }
  return r;
}

void save_run_record(const RunReport& report, const std::string& path) {
  write_file(path, to_json(report) + "\n");
}

RunReport load_run_record(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return run_report_from_json(ss.str());
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    if (!std::filesystem::exists(path)) throw IoError("cannot read " + path);
    throw InvalidArgument(std::string("malformed config file: ") + e.what());
  }
  std::map<std::string, std::string> out;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw InvalidArgument("config key '" + section + "' is outside a [section]");
    for (const auto& [key, value] : body) out[section + "." + key] = value.get_value<std::string>();
  }
  return out;
}

namespace {

struct Setting {
  const char* key;
  std::function<void(const std::string&, const std::string&, BenchProblemSpec&, EchConfig&, RunOptions&)> apply;
};

#define ECH_NUM(field) [](const std::string& k, const std::string& v, BenchProblemSpec& s, EchConfig& c, RunOptions& o) { (void)s; (void)c; (void)o; field = parse_double(k, v); }
#define ECH_INT(field) [](const std::string& k, const std::string& v, BenchProblemSpec& s, EchConfig& c, RunOptions& o) { (void)s; (void)c; (void)o; field = parse_int(k, v); }

std::vector<NoFlyZone> parse_zones(const std::string& key, const std::string& text) {
  std::vector<NoFlyZone> zones;
  std::stringstream all(text);
  std::string item;
  while (std::getline(all, item, ';')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    if (item.find("none") != std::string::npos) continue;
    std::stringstream ss(item);
    std::string a, b, r, extra;
    if (!(ss >> a >> b >> r) || (ss >> extra)) throw InvalidArgument("setting " + key + ": zone '" + item + "' needs 'north east radius'");
    zones.push_back({parse_double(key, a), parse_double(key, b), parse_double(key, r)});
  }
  return zones;
}

const std::vector<Setting>& settings() {
  static const std::vector<Setting> table = {
      {"problem.name", [](const std::string&, const std::string& v, BenchProblemSpec& s, EchConfig&, RunOptions&) { s.name = v; }},
      {"problem.t0", ECH_NUM(s.t0)},
      {"problem.tf", ECH_NUM(s.tf)},
      {"problem.start_north", ECH_NUM(s.start_north)},
      {"problem.start_east", ECH_NUM(s.start_east)},
      {"problem.start_vnorth", ECH_NUM(s.start_vnorth)},
      {"problem.start_veast", ECH_NUM(s.start_veast)},
      {"problem.goal_north", ECH_NUM(s.goal_north)},
      {"problem.goal_east", ECH_NUM(s.goal_east)},
      {"problem.position_bound", ECH_NUM(s.position_bound)},
      {"problem.velocity_bound", ECH_NUM(s.velocity_bound)},
      {"problem.accel_bound", ECH_NUM(s.accel_bound)},
      {"problem.effort_weight", ECH_NUM(s.effort_weight)},
      {"problem.initial_intervals", ECH_INT(s.initial_intervals)},
      {"problem.zones", [](const std::string& k, const std::string& v, BenchProblemSpec& s, EchConfig&, RunOptions&) { s.zones = parse_zones(k, v); }},
      {"ech.zeta", ECH_NUM(c.zeta)},
      {"ech.beta", ECH_NUM(c.beta)},
      {"ech.beta_mode", [](const std::string&, const std::string& v, BenchProblemSpec&, EchConfig& c, RunOptions&) { c.beta_mode = beta_mode_from_string(v); }},
      {"ech.eps_tol", ECH_NUM(c.eps_tol)},
      {"ech.eta_tol", ECH_NUM(c.eta_tol)},
      {"ech.max_mr_iterations", ECH_INT(c.max_mr_iterations)},
      {"ech.afp_policy", [](const std::string&, const std::string& v, BenchProblemSpec&, EchConfig& c, RunOptions&) { c.afp_policy = afp_policy_from_string(v); }},
      {"ech.samples_per_interval", ECH_INT(c.samples_per_interval)},
      {"ech.penalty", ECH_NUM(c.penalty)},
      {"ech.max_split", ECH_INT(c.refine.max_split)},
      {"ech.max_total_intervals", ECH_INT(c.refine.max_total_intervals)},
      {"ech.recompute_repeats", ECH_INT(c.recompute_repeats)},
      {"solver.tol_kkt", ECH_NUM(c.solver.tol_kkt)},
      {"solver.tol_primal", ECH_NUM(c.solver.tol_primal)},
      {"solver.max_iter", ECH_INT(c.solver.max_iter)},
      {"solver.mu_init", ECH_NUM(c.solver.mu_init)},
      {"afp.padding", ECH_NUM(c.afp.padding)},
      {"afp.proximal", ECH_NUM(c.afp.proximal)},
      {"afp.feas_tol", ECH_NUM(c.afp.feas_tol)},
      {"report.timing_repeats", ECH_INT(o.timing_repeats)},
      {"report.trajectory_samples", ECH_INT(o.trajectory_samples)},
  };
  return table;
}

#undef ECH_NUM
#undef ECH_INT

}  // namespace

void apply_setting(const std::string& key, const std::string& value, BenchProblemSpec& spec, EchConfig& cfg,
                   RunOptions& opts) {
  for (const auto& s : settings()) {
    if (key == s.key) {
      s.apply(key, value, spec, cfg, opts);
      return;
    }
  }
  throw InvalidArgument("unknown setting '" + key + "'");
}

std::vector<std::string> setting_keys() {
  std::vector<std::string> out;
  for (const auto& s : settings()) out.emplace_back(s.key);
  return out;
}

}  // namespace ech
