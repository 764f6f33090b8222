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

#include "ech/interp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "ech/errors.hpp"

namespace ech {

namespace {

// Rows c0..c3 of the polynomial in s through (a, c, b) at s = 0, 1/2, 1.
Mat quadratic_through(const Vec& a, const Vec& c, const Vec& b) {
  Mat out = Mat::Zero(4, a.size());
  out.row(0) = a.transpose();
  out.row(1) = (-3 * a + 4 * c - b).transpose();
  out.row(2) = (2 * a - 4 * c + 2 * b).transpose();
  return out;
}

Vec horner(const Mat& c, double s) {
  return ((c.row(3) * s + c.row(2)) * s + c.row(1)).transpose() * s + c.row(0).transpose();
}

Vec horner_derivative(const Mat& c, double s) {
  return ((3 * s * c.row(3) + 2 * c.row(2)) * s + c.row(1)).transpose();
}

}  // namespace

DiscreteSolution discrete_solution(const DiscretizedNlp& nlp, const NlpSolution& sol) {
  const OcpProblem& prob = nlp.problem();
  const NodeValues v = nlp.unpack(sol.z);
  DiscreteSolution out;
  out.mesh = nlp.mesh();
  out.t0 = prob.time().t0;
  out.tf = v.tf;
  out.X = v.X;
  out.U = v.U;
  out.p = v.p;
  const int N = nlp.num_nodes();
  out.state_derivatives.resize(N, prob.state_dim());
  for (int i = 0; i < N; ++i) {
    out.state_derivatives.row(i) =
        evaluate_dynamics(prob, v.X.row(i).transpose(), v.U.row(i).transpose(), out.node_time(i), v.p)
            .transpose();
  }
  out.multipliers.constraints.assign(prob.num_path_constraints(), {});
  const auto& rows = nlp.row_map();
  if (sol.ineq_multipliers.size() != static_cast<int>(rows.size()))
    throw DimensionError("multiplier count does not match the row map");
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.multipliers.constraints[rows[r].constraint].push_back(
        {rows[r].node, out.node_time(rows[r].node), sol.ineq_multipliers[static_cast<int>(r)]});
  }
  return out;
}

Interpolant::Interpolant(const DiscreteSolution& sol)
    : t0_(sol.t0), tf_(sol.tf), p_(sol.p) {
  const int K = sol.mesh.num_intervals();
  const int N = sol.mesh.num_nodes();
  if (!(tf_ > t0_)) throw InvalidArgument("interpolation needs tf > t0");
  if (sol.X.rows() != N || sol.U.rows() != N) throw DimensionError("node arrays do not match the mesh");
  const bool slopes = sol.state_derivatives.rows() == N && sol.state_derivatives.cols() == sol.X.cols();
  const double T = tf_ - t0_;
  for (int k = 0; k < K; ++k) {
    const double h = sol.mesh.interval_width(k) * T;
    if (!(h > 0)) throw InvalidArgument("zero-length mesh interval");
    starts_.push_back(t0_ + sol.mesh.boundaries()[k] * T);
    h_.push_back(h);
    const int a = 2 * k, c = 2 * k + 1, b = 2 * k + 2;
    Mat xc = quadratic_through(sol.X.row(a).transpose(), sol.X.row(c).transpose(), sol.X.row(b).transpose());
    if (slopes) {
      // Cubic term gamma * s (s - 1/2) (s - 1) keeps the three node values;
      // its slope is gamma / 2 at both ends.
      const Vec q0 = xc.row(1).transpose();
      const Vec q1 = (xc.row(1) + 2 * xc.row(2)).transpose();
      const Vec gamma = (h * sol.state_derivatives.row(a).transpose() - q0) +
                        (h * sol.state_derivatives.row(b).transpose() - q1);
      xc.row(3) += gamma.transpose();
      xc.row(2) -= 1.5 * gamma.transpose();
      xc.row(1) += 0.5 * gamma.transpose();
    }
    xc_.push_back(std::move(xc));
    uc_.push_back(quadratic_through(sol.U.row(a).transpose(), sol.U.row(c).transpose(), sol.U.row(b).transpose()));
  }
}

int Interpolant::locate(double t) const {
  auto it = std::upper_bound(starts_.begin(), starts_.end(), t);
  int k = static_cast<int>(it - starts_.begin()) - 1;
  return std::clamp(k, 0, num_intervals() - 1);
}

Vec Interpolant::state(double t) const {
  const int k = locate(t);
  return horner(xc_[k], (t - starts_[k]) / h_[k]);
}

Vec Interpolant::state_derivative(double t) const {
  const int k = locate(t);
  return horner_derivative(xc_[k], (t - starts_[k]) / h_[k]) / h_[k];
}

Vec Interpolant::input(double t) const {
  const int k = locate(t);
  return horner(uc_[k], (t - starts_[k]) / h_[k]);
}

Interpolant interpolate(const DiscreteSolution& sol) { return Interpolant(sol); }

double ErrorReport::interval_eta(int k) const { return eta.cols() ? eta.row(k).maxCoeff() : 0.0; }

double ErrorReport::interval_max_violation(int k) const {
  return interval_violation.cols() ? interval_violation.row(k).maxCoeff() : 0.0;
}

double ErrorReport::max_eta() const { return eta.size() ? eta.maxCoeff() : 0.0; }

double ErrorReport::max_violation() const {
  return interval_violation.size() ? interval_violation.maxCoeff() : 0.0;
}

ErrorReport error_analysis(const OcpProblem& prob, const DiscreteSolution& sol,
                           const Interpolant& interp, const ErrorOptions& opts) {
  if (opts.samples_per_interval < 1) throw InvalidArgument("samples_per_interval must be positive");
  const int K = interp.num_intervals();
  const int n = prob.state_dim();
  const int ng = prob.num_path_constraints();
  // Composite Simpson needs an even number of subintervals.
  const int M = opts.samples_per_interval + (opts.samples_per_interval % 2);

  ErrorReport rep;
  rep.eta_tol = opts.eta_tol;
  rep.eps_tol = opts.eps_tol;
  rep.samples_per_interval = M;
  rep.eta = Mat::Zero(K, n);
  rep.interval_violation = Mat::Zero(K, ng);
  rep.constraint_samples.resize(ng, K * M + 1);
  const Vec& p = sol.p;

  int col = 0;
  for (int k = 0; k < K; ++k) {
    const double a = interp.interval_start(k), h = interp.interval_end(k) - a;
    Vec integral = Vec::Zero(n);
    for (int q = 0; q <= M; ++q) {
      const double t = (q == M) ? interp.interval_end(k) : a + h * q / M;
      const Vec x = interp.state(t), u = interp.input(t);
      const Vec resid = (interp.state_derivative(t) - evaluate_dynamics(prob, x, u, t, p)).cwiseAbs();
      const double w = (q == 0 || q == M) ? 1.0 : (q % 2 ? 4.0 : 2.0);
      integral += w * resid;
      if (ng > 0) {
        const Vec c = evaluate_path_constraints(prob, x, u, t, p);
        rep.interval_violation.row(k) = rep.interval_violation.row(k).cwiseMax(c.cwiseMax(0.0).transpose());
        if (q > 0 || k == 0) rep.constraint_samples.col(col) = c;
      }
      if (q > 0 || k == 0) {
        rep.sample_times.push_back(t);
        rep.sample_interval.push_back(k);
        ++col;
      }
    }
    rep.eta.row(k) = (integral * h / (3.0 * M)).transpose();
  }
  return rep;
}

void write_error_report(std::ostream& out, const ErrorReport& report) {
  out << "interval\tt_start\tt_end\teta\tviolation\teta_ok\tviolation_ok\n";
  char buf[200];
  for (int k = 0; k < report.num_intervals(); ++k) {
    // Sample times of interval k run from index k*M to (k+1)*M.
    const int M = report.samples_per_interval;
    std::snprintf(buf, sizeof buf, "%d\t%.9g\t%.9g\t%.6e\t%.6e\t%d\t%d\n", k,
                  report.sample_times[k * M], report.sample_times[(k + 1) * M], report.interval_eta(k),
                  report.interval_max_violation(k), report.eta_ok(k) ? 1 : 0,
                  report.violation_ok(k) ? 1 : 0);
    out << buf;
  }
}

Mesh refine_mesh(const Mesh& mesh, const ErrorReport& report, const RefineOptions& opts) {
  const int K = mesh.num_intervals();
  if (report.num_intervals() != K) throw DimensionError("error report does not match the mesh");
  if (opts.max_split < 2) throw InvalidArgument("max_split must be at least 2");
  std::vector<double> b{0.0};
  for (int k = 0; k < K; ++k) {
    int parts = 1;
    const double eta = report.interval_eta(k);
    if (eta > report.eta_tol) {
      // Small guard so that exact powers such as 32^(1/5) are not rounded up.
      const double ratio = std::pow(eta / report.eta_tol, 0.2);
      parts = std::max(2, static_cast<int>(std::ceil(ratio - 1e-9)));
      parts = std::min(parts, opts.max_split);
    }
    if (!report.violation_ok(k)) {
      // Violation between nodes shrinks roughly with h^2.
      const double ratio = std::sqrt(report.interval_max_violation(k) / report.eps_tol);
      parts = std::max(parts, std::min(std::max(2, static_cast<int>(std::ceil(ratio - 1e-9))), opts.max_split));
    }
    const double lo = mesh.boundaries()[k], hi = mesh.boundaries()[k + 1];
    for (int j = 1; j < parts; ++j) b.push_back(lo + (hi - lo) * j / parts);
    b.push_back(hi);
  }
  b.back() = 1.0;
  if (static_cast<int>(b.size()) - 1 > opts.max_total_intervals)
    throw RefinementOverflow("mesh refinement exceeded " + std::to_string(opts.max_total_intervals) +
                             " intervals");
  return Mesh(std::move(b));
}

NodeValues resample(const OcpProblem& prob, const Interpolant& interp, const Mesh& mesh) {
  const int N = mesh.num_nodes();
  NodeValues v{Mat(N, prob.state_dim()), Mat(N, prob.input_dim()), interp.parameters(), interp.tf()};
  const double T = interp.tf() - interp.t0();
  const auto& xb = prob.state_bounds();
  const auto& ub = prob.input_bounds();
  for (int i = 0; i < N; ++i) {
    const double t = interp.t0() + mesh.node_tau(i) * T;
    v.X.row(i) = interp.state(t).cwiseMax(xb.lower).cwiseMin(xb.upper).transpose();
    v.U.row(i) = interp.input(t).cwiseMax(ub.lower).cwiseMin(ub.upper).transpose();
  }
  if (v.p.size()) v.p = v.p.cwiseMax(prob.param_bounds().lower).cwiseMin(prob.param_bounds().upper);
  return v;
}

}  // namespace ech
