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

#include "ech/transcription.hpp"

#include <algorithm>
#include <ostream>
#include <utility>

#include "ech/errors.hpp"

namespace ech {

using Triplets = std::vector<Eigen::Triplet<double>>;

RowFilter RowFilter::within(std::vector<TimeInterval> intervals) {
  return {Kind::Intervals, std::move(intervals)};
}

bool RowFilter::admits(double t) const {
  switch (kind) {
    case Kind::All:
      return true;
    case Kind::None:
      return false;
    case Kind::Intervals:
      return std::any_of(intervals.begin(), intervals.end(),
                         [t](const TimeInterval& iv) { return iv.contains(t); });
  }
  return false;
}

ActivationFilter ActivationFilter::all(int constraints) {
  return {std::vector<RowFilter>(constraints, RowFilter::all())};
}

ActivationFilter ActivationFilter::none(int constraints) {
  return {std::vector<RowFilter>(constraints, RowFilter::none())};
}

void ActivationFilter::validate(int constraints, double t0, double tf) const {
  if (static_cast<int>(rows.size()) != constraints) {
    throw InvalidArgument("activation filter has " + std::to_string(rows.size()) +
                          " entries for " + std::to_string(constraints) + " constraints");
  }
  const double slack = 1e-9 * std::max(1.0, std::abs(tf - t0));
  for (const auto& row : rows) {
    if (row.kind != RowFilter::Kind::Intervals) continue;
    for (std::size_t j = 0; j < row.intervals.size(); ++j) {
      const auto& iv = row.intervals[j];
      if (!(iv.start <= iv.end)) throw InvalidArgument("filter interval is inverted");
      if (iv.start < t0 - slack || iv.end > tf + slack) {
        throw InvalidArgument("filter interval lies outside the horizon");
      }
      if (j > 0 && !(row.intervals[j - 1].end < iv.start)) {
        throw InvalidArgument("filter intervals must be sorted and disjoint");
      }
    }
  }
}

DiscretizedNlp::DiscretizedNlp(const OcpProblem& prob, Mesh mesh, ActivationFilter filter)
    : prob_(&prob),
      mesh_(std::move(mesh)),
      filter_(std::move(filter)),
      n_(prob.state_dim()),
      m_(prob.input_dim()),
      s_(prob.param_dim()),
      N_(mesh_.num_nodes()),
      K_(mesh_.num_intervals()),
      free_tf_(!prob.time().fixed_terminal_time),
      t0_(prob.time().t0) {
  const int ng = prob.num_path_constraints();
  filter_.validate(ng, t0_, free_tf_ ? prob.time().tf_upper : prob.time().tf);
  if (free_tf_) {
    for (const auto& row : filter_.rows) {
      if (row.kind == RowFilter::Kind::Intervals) {
        throw InvalidArgument("per-node row filtering requires a fixed terminal time");
      }
    }
  }
  num_vars_ = N_ * (n_ + m_) + s_ + (free_tf_ ? 1 : 0);
  num_eq_ = 2 * K_ * n_ + prob.num_boundary_conditions();

  weights_ = Vec::Zero(N_);
  for (int k = 0; k < K_; ++k) {
    const double w = mesh_.interval_width(k);
    weights_[2 * k] += w / 6.0;
    weights_[2 * k + 1] += 4.0 * w / 6.0;
    weights_[2 * k + 2] += w / 6.0;
  }

  const double tf_nominal = prob.time().tf;
  for (int l = 0; l < ng; ++l) {
    for (int i = 0; i < N_; ++i) {
      if (filter_.rows[l].admits(node_time(i, tf_nominal))) row_map_.push_back({l, i});
    }
  }
}

double DiscretizedNlp::node_time(int node, double tf) const {
  return t0_ + mesh_.node_tau(node) * (tf - t0_);
}

std::vector<double> DiscretizedNlp::nominal_node_times() const {
  std::vector<double> t(N_);
  for (int i = 0; i < N_; ++i) t[i] = node_time(i, prob_->time().tf);
  return t;
}

double DiscretizedNlp::terminal_time(const Vec& z) const {
  return free_tf_ ? z[tf_index()] : prob_->time().tf;
}

Vec DiscretizedNlp::pack(const NodeValues& v) const {
  if (v.X.rows() != N_ || v.X.cols() != n_ || v.U.rows() != N_ || v.U.cols() != m_ ||
      v.p.size() != s_) {
    throw DimensionError("node values do not match the transcription layout");
  }
  Vec z(num_vars_);
  for (int i = 0; i < N_; ++i) {
    for (int j = 0; j < n_; ++j) z[x_index(i, j)] = v.X(i, j);
    for (int j = 0; j < m_; ++j) z[u_index(i, j)] = v.U(i, j);
  }
  for (int j = 0; j < s_; ++j) z[p_index(j)] = v.p[j];
  if (free_tf_) z[tf_index()] = v.tf;
  return z;
}

NodeValues DiscretizedNlp::unpack(const Vec& z) const {
  if (z.size() != num_vars_) throw DimensionError("decision vector has the wrong length");
  NodeValues v;
  v.X.resize(N_, n_);
  v.U.resize(N_, m_);
  for (int i = 0; i < N_; ++i) {
    for (int j = 0; j < n_; ++j) v.X(i, j) = z[x_index(i, j)];
    for (int j = 0; j < m_; ++j) v.U(i, j) = z[u_index(i, j)];
  }
  v.p = z.segment(p_index(0), s_);
  v.tf = terminal_time(z);
  return v;
}

Vec DiscretizedNlp::lower_bounds() const {
  Vec lb(num_vars_);
  const auto& tm = prob_->time();
  for (int i = 0; i < N_; ++i) {
    for (int j = 0; j < n_; ++j) lb[x_index(i, j)] = prob_->state_bounds().lower[j];
    for (int j = 0; j < m_; ++j) lb[u_index(i, j)] = prob_->input_bounds().lower[j];
  }
  for (int j = 0; j < s_; ++j) lb[p_index(j)] = prob_->param_bounds().lower[j];
  if (free_tf_) lb[tf_index()] = tm.tf_lower;
  return lb;
}

Vec DiscretizedNlp::upper_bounds() const {
  Vec ub(num_vars_);
  const auto& tm = prob_->time();
  for (int i = 0; i < N_; ++i) {
    for (int j = 0; j < n_; ++j) ub[x_index(i, j)] = prob_->state_bounds().upper[j];
    for (int j = 0; j < m_; ++j) ub[u_index(i, j)] = prob_->input_bounds().upper[j];
  }
  for (int j = 0; j < s_; ++j) ub[p_index(j)] = prob_->param_bounds().upper[j];
  if (free_tf_) ub[tf_index()] = tm.tf_upper;
  return ub;
}

NodePoint DiscretizedNlp::node_point(const Vec& z, int node, double tf) const {
  NodePoint pt;
  pt.x = z.segment(x_index(node, 0), n_);
  pt.u = z.segment(u_index(node, 0), m_);
  pt.p = z.segment(N_ * (n_ + m_), s_);
  pt.t = node_time(node, tf);
  return pt;
}

BoundaryPoint DiscretizedNlp::boundary_point(const Vec& z, double tf) const {
  BoundaryPoint pt;
  pt.x0 = z.segment(x_index(0, 0), n_);
  pt.t0 = t0_;
  pt.xf = z.segment(x_index(N_ - 1, 0), n_);
  pt.tf = tf;
  pt.p = z.segment(N_ * (n_ + m_), s_);
  return pt;
}

int DiscretizedNlp::node_column(int node, int q) const {
  if (q < n_) return x_index(node, q);
  if (q < n_ + m_) return u_index(node, q - n_);
  if (q < n_ + m_ + s_) return p_index(q - n_ - m_);
  return free_tf_ ? tf_index() : -1;
}

int DiscretizedNlp::boundary_column(int q) const {
  if (q < n_) return x_index(0, q);
  if (q == n_) return -1;  // t0 is fixed
  if (q < 2 * n_ + 1) return x_index(N_ - 1, q - n_ - 1);
  if (q == 2 * n_ + 1) return free_tf_ ? tf_index() : -1;
  return p_index(q - 2 * n_ - 2);
}

double DiscretizedNlp::objective(const Vec& z) const {
  const double tf = terminal_time(z);
  const double T = tf - t0_;
  double value = evaluate(prob_->mayer_cost(), boundary_point(z, tf), "mayer cost")[0];
  for (int i = 0; i < N_; ++i) {
    value += weights_[i] * T *
             evaluate(prob_->lagrange_cost(), node_point(z, i, tf), "lagrange cost")[0];
  }
  return value;
}

Vec DiscretizedNlp::objective_gradient(const Vec& z) const {
  const double tf = terminal_time(z);
  const double T = tf - t0_;
  const int d = prob_->node_arg_size();
  Vec grad = Vec::Zero(num_vars_);
  const BoundaryPoint bp = boundary_point(z, tf);
  const Mat jm = jacobian(prob_->mayer_cost(), bp);
  for (int q = 0; q < jm.cols(); ++q) {
    const int col = boundary_column(q);
    if (col >= 0) grad[col] += jm(0, q);
  }
  for (int i = 0; i < N_; ++i) {
    const NodePoint pt = node_point(z, i, tf);
    const Mat jl = jacobian(prob_->lagrange_cost(), pt);
    const double tau = mesh_.node_tau(i);
    for (int q = 0; q < d - 1; ++q) grad[node_column(i, q)] += weights_[i] * T * jl(0, q);
    if (free_tf_) {
      const double L = evaluate(prob_->lagrange_cost(), pt, "lagrange cost")[0];
      grad[tf_index()] += weights_[i] * (L + T * jl(0, d - 1) * tau);
    }
  }
  return grad;
}

Vec DiscretizedNlp::defect_residuals(const Vec& z) const {
  if (z.size() != num_vars_) throw DimensionError("decision vector has the wrong length");
  const double tf = terminal_time(z);
  const double T = tf - t0_;
  std::vector<Vec> f(N_);
  for (int i = 0; i < N_; ++i) f[i] = evaluate(prob_->dynamics(), node_point(z, i, tf), "dynamics");
  Vec r(2 * K_ * n_);
  for (int k = 0; k < K_; ++k) {
    const int a = 2 * k, c = 2 * k + 1, b = 2 * k + 2;
    const double h = mesh_.interval_width(k) * T;
    const auto xa = z.segment(x_index(a, 0), n_);
    const auto xc = z.segment(x_index(c, 0), n_);
    const auto xb = z.segment(x_index(b, 0), n_);
    r.segment(2 * k * n_, n_) = xc - 0.5 * (xa + xb) - (h / 8.0) * (f[a] - f[b]);
    r.segment((2 * k + 1) * n_, n_) = xb - xa - (h / 6.0) * (f[a] + 4.0 * f[c] + f[b]);
  }
  return r;
}

Vec DiscretizedNlp::equalities(const Vec& z) const {
  Vec out(num_eq_);
  out.head(2 * K_ * n_) = defect_residuals(z);
  const int nb = prob_->num_boundary_conditions();
  if (nb > 0) {
    out.tail(nb) = evaluate(prob_->boundary(), boundary_point(z, terminal_time(z)), "boundary");
  }
  return out;
}

Vec DiscretizedNlp::inequalities(const Vec& z) const {
  const double tf = terminal_time(z);
  Vec out(row_map_.size());
  int last_node = -1;
  Vec c;
  for (std::size_t r = 0; r < row_map_.size(); ++r) {
    const auto& row = row_map_[r];
    if (row.node != last_node) {
      c = evaluate(prob_->path_constraints(), node_point(z, row.node, tf), "path constraints");
      last_node = row.node;
    }
    out[r] = c[row.constraint];
  }
  return out;
}

SpMat DiscretizedNlp::equality_jacobian(const Vec& z) const {
  const double tf = terminal_time(z);
  const double T = tf - t0_;
  const int d = prob_->node_arg_size();
  std::vector<Vec> f(N_);
  std::vector<Mat> J(N_);
  for (int i = 0; i < N_; ++i) {
    const NodePoint pt = node_point(z, i, tf);
    f[i] = evaluate(prob_->dynamics(), pt, "dynamics");
    J[i] = jacobian(prob_->dynamics(), pt);
  }
  Triplets trips;
  trips.reserve(static_cast<std::size_t>(2 * K_ * n_) * (3 * d + 4));
  // Adds coef * d f_j(node) / d(node arguments) to `row`.
  auto add_dyn = [&](int row, double coef, int node, int j) {
    const double tau = mesh_.node_tau(node);
    for (int q = 0; q < d; ++q) {
      const int col = node_column(node, q);
      if (col < 0) continue;
      const double scale = (q == d - 1) ? tau : 1.0;
      trips.emplace_back(row, col, coef * J[node](j, q) * scale);
    }
  };
  for (int k = 0; k < K_; ++k) {
    const int a = 2 * k, c = 2 * k + 1, b = 2 * k + 2;
    const double dtau = mesh_.interval_width(k);
    const double h = dtau * T;
    for (int j = 0; j < n_; ++j) {
      const int rh = 2 * k * n_ + j;
      trips.emplace_back(rh, x_index(c, j), 1.0);
      trips.emplace_back(rh, x_index(a, j), -0.5);
      trips.emplace_back(rh, x_index(b, j), -0.5);
      add_dyn(rh, -h / 8.0, a, j);
      add_dyn(rh, h / 8.0, b, j);
      if (free_tf_) trips.emplace_back(rh, tf_index(), -(dtau / 8.0) * (f[a][j] - f[b][j]));

      const int rs = (2 * k + 1) * n_ + j;
      trips.emplace_back(rs, x_index(b, j), 1.0);
      trips.emplace_back(rs, x_index(a, j), -1.0);
      add_dyn(rs, -h / 6.0, a, j);
      add_dyn(rs, -4.0 * h / 6.0, c, j);
      add_dyn(rs, -h / 6.0, b, j);
      if (free_tf_) {
        trips.emplace_back(rs, tf_index(), -(dtau / 6.0) * (f[a][j] + 4.0 * f[c][j] + f[b][j]));
      }
    }
  }
  const int nb = prob_->num_boundary_conditions();
  if (nb > 0) {
    const Mat jb = jacobian(prob_->boundary(), boundary_point(z, tf));
    for (int r = 0; r < nb; ++r) {
      for (int q = 0; q < jb.cols(); ++q) {
        const int col = boundary_column(q);
        if (col >= 0) trips.emplace_back(2 * K_ * n_ + r, col, jb(r, q));
      }
    }
  }
  SpMat out(num_eq_, num_vars_);
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

SpMat DiscretizedNlp::inequality_jacobian(const Vec& z) const {
  const double tf = terminal_time(z);
  const int d = prob_->node_arg_size();
  Triplets trips;
  trips.reserve(row_map_.size() * d);
  int last_node = -1;
  Mat jc;
  for (std::size_t r = 0; r < row_map_.size(); ++r) {
    const auto& row = row_map_[r];
    if (row.node != last_node) {
      jc = jacobian(prob_->path_constraints(), node_point(z, row.node, tf));
      last_node = row.node;
    }
    const double tau = mesh_.node_tau(row.node);
    for (int q = 0; q < d; ++q) {
      const int col = node_column(row.node, q);
      if (col < 0) continue;
      const double scale = (q == d - 1) ? tau : 1.0;
      trips.emplace_back(static_cast<int>(r), col, jc(row.constraint, q) * scale);
    }
  }
  SpMat out(static_cast<int>(row_map_.size()), num_vars_);
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

SpMat DiscretizedNlp::lagrangian_hessian(const Vec& z, double obj_factor, const Vec& eq_mult,
                                         const Vec& ineq_mult) const {
  if (eq_mult.size() != num_eq_ || ineq_mult.size() != num_inequalities()) {
    throw DimensionError("multiplier vectors do not match the transcription");
  }
  const double tf = terminal_time(z);
  const double T = tf - t0_;
  const int d = prob_->node_arg_size();
  const int ng = prob_->num_path_constraints();

  // Coefficient of f(node) in the Lagrangian, divided by T.
  Mat dyn_weight = Mat::Zero(N_, n_);
  for (int k = 0; k < K_; ++k) {
    const int a = 2 * k, c = 2 * k + 1, b = 2 * k + 2;
    const double dtau = mesh_.interval_width(k);
    const auto lh = eq_mult.segment(2 * k * n_, n_);
    const auto ls = eq_mult.segment((2 * k + 1) * n_, n_);
    dyn_weight.row(a) += (-(dtau / 8.0) * lh - (dtau / 6.0) * ls).transpose();
    dyn_weight.row(b) += ((dtau / 8.0) * lh - (dtau / 6.0) * ls).transpose();
    dyn_weight.row(c) += (-(4.0 * dtau / 6.0) * ls).transpose();
  }
  Mat path_weight = Mat::Zero(N_, ng);
  for (std::size_t r = 0; r < row_map_.size(); ++r) {
    path_weight(row_map_[r].node, row_map_[r].constraint) += ineq_mult[r];
  }

  Triplets trips;
  const int local = free_tf_ ? d : d - 1;
  trips.reserve(static_cast<std::size_t>(N_) * local * local);
  for (int i = 0; i < N_; ++i) {
    const NodePoint pt = node_point(z, i, tf);
    const double tau = mesh_.node_tau(i);
    const double lw = obj_factor * weights_[i];
    const Vec bw = dyn_weight.row(i).transpose();
    Mat H = T * (lw * weighted_hessian(prob_->lagrange_cost(), pt, Vec::Constant(1, 1.0)) +
                 weighted_hessian(prob_->dynamics(), pt, bw));
    if (ng > 0 && !path_weight.row(i).isZero(0.0))
      H += weighted_hessian(prob_->path_constraints(), pt, path_weight.row(i).transpose());

    Mat Hy(local, local);
    Hy = H.topLeftCorner(local, local);
    if (free_tf_) {
      const Vec g = lw * jacobian(prob_->lagrange_cost(), pt).row(0).transpose() +
                    jacobian(prob_->dynamics(), pt).transpose() * bw;
      for (int q = 0; q < d - 1; ++q) {
        Hy(q, d - 1) = Hy(d - 1, q) = tau * H(q, d - 1) + g[q];
      }
      Hy(d - 1, d - 1) = tau * tau * H(d - 1, d - 1) + 2.0 * tau * g[d - 1];
    }
    for (int a = 0; a < local; ++a) {
      const int ga = node_column(i, a);
      for (int b = 0; b < local; ++b) {
        const int gb = node_column(i, b);
        if (ga > gb || (a == b)) trips.emplace_back(ga, gb, Hy(a, b));
      }
    }
  }

  const int nb = prob_->num_boundary_conditions();
  const BoundaryPoint bp = boundary_point(z, tf);
  Mat Hb = obj_factor * weighted_hessian(prob_->mayer_cost(), bp, Vec::Constant(1, 1.0));
  if (nb > 0) Hb += weighted_hessian(prob_->boundary(), bp, eq_mult.tail(nb));
  for (int a = 0; a < Hb.rows(); ++a) {
    const int ga = boundary_column(a);
    if (ga < 0) continue;
    for (int b = 0; b < Hb.cols(); ++b) {
      const int gb = boundary_column(b);
      if (gb < 0) continue;
      if (ga > gb || a == b) trips.emplace_back(ga, gb, Hb(a, b));
    }
  }
  SpMat out(num_vars_, num_vars_);
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

DiscretizedNlp transcribe(const OcpProblem& prob, const Mesh& mesh,
                          const ActivationFilter& filter) {
  return DiscretizedNlp(prob, mesh, filter);
}

Vec defect_residuals(const DiscretizedNlp& nlp, const Vec& z) { return nlp.defect_residuals(z); }

void write_sparsity(std::ostream& out, const SpMat& matrix) {
  for (int k = 0; k < matrix.outerSize(); ++k) {
    for (SpMat::InnerIterator it(matrix, k); it; ++it) {
      out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
    }
  }
}

}  // namespace ech
