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

#include "ech/ipm.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "ech/errors.hpp"

namespace ech {

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::MaxIter: return "MaxIter";
    case SolveStatus::RestorationFailed: return "RestorationFailed";
    case SolveStatus::InfeasibleDetected: return "InfeasibleDetected";
  }
  return "Unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSigmaBand = 1e10;
constexpr double kMultiplierResetLimit = 1e3;
constexpr double kScaleMax = 100.0;
constexpr int kMaxSoc = 4;
constexpr double kShortStep = 1e-2;
constexpr double kShortStepReg = 1e-6;
constexpr double kSocDecrease = 0.99;

using Triplets = std::vector<Eigen::Triplet<double>>;
using Ldlt = Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>>;

struct BoundInfo {
  Vec lower, upper;
  std::vector<int> lower_idx, upper_idx;
};

BoundInfo bound_info(const Nlp& nlp) {
  BoundInfo b;
  b.lower = nlp.lower_bounds();
  b.upper = nlp.upper_bounds();
  const int n = nlp.num_variables();
  if (b.lower.size() != n || b.upper.size() != n) throw DimensionError("bound vector size");
  for (int i = 0; i < n; ++i) {
    if (b.lower[i] > b.upper[i]) throw InvalidArgument("lower bound above upper bound");
    // Fixed variables get a tiny interior.
    if (b.lower[i] == b.upper[i]) {
      const double r = 1e-8 * std::max(1.0, std::abs(b.lower[i]));
      b.lower[i] -= r;
      b.upper[i] += r;
    }
    if (std::isfinite(b.lower[i])) b.lower_idx.push_back(i);
    if (std::isfinite(b.upper[i])) b.upper_idx.push_back(i);
  }
  return b;
}

double inf_norm(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

Vec positive_part(const Vec& v) { return v.cwiseMax(0.0); }

// Stacks [J_E; J_I].
SpMat stack_rows(const SpMat& a, const SpMat& b) {
  SpMat out(a.rows() + b.rows(), a.cols());
  Triplets t;
  t.reserve(a.nonZeros() + b.nonZeros());
  for (int k = 0; k < a.outerSize(); ++k)
    for (SpMat::InnerIterator it(a, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  for (int k = 0; k < b.outerSize(); ++k)
    for (SpMat::InnerIterator it(b, k); it; ++it)
      t.emplace_back(a.rows() + it.row(), it.col(), it.value());
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

// min 1/2 |h|^2 + 1/2 |v|^2 + rho/2 sum d_i (z_i - zr_i)^2  s.t.  g(z) - v <= 0, v >= 0.
class RestorationNlp : public Nlp {
 public:
  RestorationNlp(const Nlp& base, Vec reference, double rho)
      : base_(base), ref_(std::move(reference)), rho_(rho),
        n_(base.num_variables()), mi_(base.num_inequalities()) {
    scale_ = ref_.cwiseAbs().cwiseMax(1.0).cwiseInverse().cwiseAbs2();
  }

  int num_variables() const override { return n_ + mi_; }
  int num_equalities() const override { return 0; }
  int num_inequalities() const override { return mi_; }
  Vec lower_bounds() const override {
    Vec lb(n_ + mi_);
    lb << base_.lower_bounds(), Vec::Zero(mi_);
    return lb;
  }
  Vec upper_bounds() const override {
    Vec ub(n_ + mi_);
    ub << base_.upper_bounds(), Vec::Constant(mi_, kInf);
    return ub;
  }
  double objective(const Vec& w) const override {
    const Vec z = w.head(n_);
    const Vec d = z - ref_;
    return 0.5 * base_.equalities(z).squaredNorm() + 0.5 * w.tail(mi_).squaredNorm() +
           0.5 * rho_ * d.cwiseAbs2().dot(scale_);
  }
  Vec objective_gradient(const Vec& w) const override {
    const Vec z = w.head(n_);
    Vec g(n_ + mi_);
    g.head(n_) = rho_ * scale_.cwiseProduct(z - ref_);
    if (base_.num_equalities() > 0)
      g.head(n_) += base_.equality_jacobian(z).transpose() * base_.equalities(z);
    g.tail(mi_) = w.tail(mi_);
    return g;
  }
  Vec equalities(const Vec&) const override { return Vec(0); }
  Vec inequalities(const Vec& w) const override {
    return base_.inequalities(w.head(n_)) - w.tail(mi_);
  }
  SpMat equality_jacobian(const Vec&) const override { return SpMat(0, n_ + mi_); }
  SpMat inequality_jacobian(const Vec& w) const override {
    const SpMat ji = base_.inequality_jacobian(w.head(n_));
    Triplets t;
    for (int k = 0; k < ji.outerSize(); ++k)
      for (SpMat::InnerIterator it(ji, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
    for (int r = 0; r < mi_; ++r) t.emplace_back(r, n_ + r, -1.0);
    SpMat out(mi_, n_ + mi_);
    out.setFromTriplets(t.begin(), t.end());
    return out;
  }
  SpMat lagrangian_hessian(const Vec& w, double obj_factor, const Vec&,
                           const Vec& ineq_mult) const override {
    const Vec z = w.head(n_);
    const Vec h = base_.equalities(z);
    SpMat hb = base_.lagrangian_hessian(z, 0.0, obj_factor * h, ineq_mult);
    Triplets t;
    for (int k = 0; k < hb.outerSize(); ++k)
      for (SpMat::InnerIterator it(hb, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
    if (base_.num_equalities() > 0) {
      const SpMat je = base_.equality_jacobian(z);
      const SpMat gn = SpMat(je.transpose() * je).triangularView<Eigen::Lower>();
      for (int k = 0; k < gn.outerSize(); ++k)
        for (SpMat::InnerIterator it(gn, k); it; ++it)
          t.emplace_back(it.row(), it.col(), obj_factor * it.value());
    }
    for (int i = 0; i < n_; ++i) t.emplace_back(i, i, obj_factor * rho_ * scale_[i]);
    for (int r = 0; r < mi_; ++r) t.emplace_back(n_ + r, n_ + r, obj_factor);
    SpMat out(n_ + mi_, n_ + mi_);
    out.setFromTriplets(t.begin(), t.end());
    return out;
  }

 private:
  const Nlp& base_;
  Vec ref_;
  Vec scale_;
  double rho_;
  int n_, mi_;
};

class Solver {
 public:
  Solver(const Nlp& nlp, const SolverOptions& opts)
      : nlp_(nlp), opts_(opts), b_(bound_info(nlp)), n_(nlp.num_variables()),
        me_(nlp.num_equalities()), mi_(nlp.num_inequalities()),
        mu_min_(opts.tol_kkt / 10.0) {}

  NlpSolution run(InteriorPoint start);

 private:
  struct Residuals {
    double stationarity, primal, comp_mu, comp0, sd, sc;
    double e_mu() const { return std::max({stationarity / sd, primal, comp_mu / sc}); }
    double e0() const { return std::max({stationarity / sd, primal, comp0 / sc}); }
  };

  void evaluate();
  bool evaluate_trial(const Vec& x, double& f, Vec& ce, Vec& ci) const;
  Residuals residuals() const;
  double merit(double f, const Vec& ce, const Vec& ci, const Vec& x, const Vec& s) const;
  bool compute_direction(const SpMat& hess, Vec& dx, Vec& dlam, Vec& dLam);
  Vec kkt_solve(const Vec& rhs) const;
  void reset_multipliers();
  void check_interior() const;
  bool restoration(NlpSolution& out);
  void log_iteration(int iter, double alpha) const;
  NlpSolution package(SolveStatus status, int iterations) const;

  const Nlp& nlp_;
  SolverOptions opts_;
  BoundInfo b_;
  int n_, me_, mi_;
  double mu_min_;

  // Iterate.
  Vec x_, s_, lam_, Lam_, zl_, zu_;
  double mu_ = 0.1;
  double nu_ = 1.0;

  // Cached evaluations at x_.
  double f_ = 0.0;
  Vec g_, ce_, ci_;
  SpMat je_, ji_;

  // Linear algebra state.
  Ldlt ldlt_;
  SpMat kkt_;
  double last_dc_ = 0.0;
  Vec last_rhs_;
  bool pattern_ready_ = false;
  double last_dw_ = 0.0;
  double dw_floor_ = 0.0;
  double last_dw_used_ = 0.0;

  // Best iterate.
  double best_score_ = kInf;
  Vec best_x_, best_s_, best_lam_, best_Lam_, best_zl_, best_zu_;
  double best_f_ = 0.0;
  Residuals best_res_{};

  int restorations_ = 0;
  std::chrono::steady_clock::time_point t_start_;
};

void Solver::evaluate() {
  f_ = nlp_.objective(x_);
  g_ = nlp_.objective_gradient(x_);
  ce_ = nlp_.equalities(x_);
  ci_ = nlp_.inequalities(x_);
  je_ = nlp_.equality_jacobian(x_);
  ji_ = nlp_.inequality_jacobian(x_);
  if (!std::isfinite(f_) || !g_.allFinite() || !ce_.allFinite() || !ci_.allFinite())
    throw EvaluationError("non-finite NLP evaluation at the current iterate", -1);
}

bool Solver::evaluate_trial(const Vec& x, double& f, Vec& ce, Vec& ci) const {
  try {
    f = nlp_.objective(x);
    ce = nlp_.equalities(x);
    ci = nlp_.inequalities(x);
  } catch (const EvaluationError&) {
    return false;
  }
  return std::isfinite(f) && ce.allFinite() && ci.allFinite();
}

Solver::Residuals Solver::residuals() const {
  Vec grad_l = g_;
  if (me_) grad_l += je_.transpose() * lam_;
  if (mi_) grad_l += ji_.transpose() * Lam_;
  grad_l += zu_ - zl_;

  Residuals r{};
  r.stationarity = inf_norm(grad_l);
  r.primal = std::max(inf_norm(ce_), inf_norm(ci_ + s_));
  double c_mu = 0.0, c0 = 0.0;
  for (int j = 0; j < mi_; ++j) {
    const double p = s_[j] * Lam_[j];
    c_mu = std::max(c_mu, std::abs(p - mu_));
    c0 = std::max(c0, std::abs(p));
  }
  for (int i : b_.lower_idx) {
    const double p = (x_[i] - b_.lower[i]) * zl_[i];
    c_mu = std::max(c_mu, std::abs(p - mu_));
    c0 = std::max(c0, std::abs(p));
  }
  for (int i : b_.upper_idx) {
    const double p = (b_.upper[i] - x_[i]) * zu_[i];
    c_mu = std::max(c_mu, std::abs(p - mu_));
    c0 = std::max(c0, std::abs(p));
  }
  r.comp_mu = c_mu;
  r.comp0 = c0;

  const double nb = static_cast<double>(b_.lower_idx.size() + b_.upper_idx.size());
  const double zsum = zl_.lpNorm<1>() + zu_.lpNorm<1>();
  const double ysum = lam_.lpNorm<1>() + Lam_.lpNorm<1>() + zsum;
  const double m_all = me_ + mi_ + nb;
  const double m_c = mi_ + nb;
  r.sd = m_all > 0 ? std::max(kScaleMax, ysum / m_all) / kScaleMax : 1.0;
  r.sc = m_c > 0 ? std::max(kScaleMax, (Lam_.lpNorm<1>() + zsum) / m_c) / kScaleMax : 1.0;
  return r;
}

double Solver::merit(double f, const Vec& ce, const Vec& ci, const Vec& x, const Vec& s) const {
  double barrier = 0.0;
  for (int j = 0; j < mi_; ++j) barrier += std::log(s[j]);
  for (int i : b_.lower_idx) barrier += std::log(x[i] - b_.lower[i]);
  for (int i : b_.upper_idx) barrier += std::log(b_.upper[i] - x[i]);
  const double theta = ce.lpNorm<1>() + (ci + s).lpNorm<1>();
  return f - mu_ * barrier + nu_ * theta;
}

bool Solver::compute_direction(const SpMat& hess, Vec& dx, Vec& dlam, Vec& dLam) {
  const int dim = n_ + me_ + mi_;
  Vec sigma_x = Vec::Zero(n_);
  for (int i : b_.lower_idx) sigma_x[i] += zl_[i] / (x_[i] - b_.lower[i]);
  for (int i : b_.upper_idx) sigma_x[i] += zu_[i] / (b_.upper[i] - x_[i]);

  Vec rhs(dim);
  {
    Vec r1 = g_;
    if (me_) r1 += je_.transpose() * lam_;
    if (mi_) r1 += ji_.transpose() * Lam_;
    for (int i : b_.lower_idx) r1[i] -= mu_ / (x_[i] - b_.lower[i]);
    for (int i : b_.upper_idx) r1[i] += mu_ / (b_.upper[i] - x_[i]);
    rhs.head(n_) = -r1;
    rhs.segment(n_, me_) = -ce_;
    for (int j = 0; j < mi_; ++j) rhs[n_ + me_ + j] = -ci_[j] - mu_ / Lam_[j];
  }

  Triplets base;
  base.reserve(hess.nonZeros() + je_.nonZeros() + ji_.nonZeros() + dim);
  for (int k = 0; k < hess.outerSize(); ++k)
    for (SpMat::InnerIterator it(hess, k); it; ++it)
      if (it.row() >= it.col()) base.emplace_back(it.row(), it.col(), it.value());
  for (int k = 0; k < je_.outerSize(); ++k)
    for (SpMat::InnerIterator it(je_, k); it; ++it)
      base.emplace_back(n_ + it.row(), it.col(), it.value());
  for (int k = 0; k < ji_.outerSize(); ++k)
    for (SpMat::InnerIterator it(ji_, k); it; ++it)
      base.emplace_back(n_ + me_ + it.row(), it.col(), it.value());
  for (int j = 0; j < mi_; ++j) base.emplace_back(n_ + me_ + j, n_ + me_ + j, -s_[j] / Lam_[j]);

  double dw = dw_floor_;
  double dc = me_ ? 1e-10 : 0.0;
  bool raised_dc = false;
  SpMat kkt(dim, dim);
  for (int attempt = 0; attempt < 80; ++attempt) {
    Triplets t = base;
    for (int i = 0; i < n_; ++i) t.emplace_back(i, i, sigma_x[i] + dw);
    for (int r = 0; r < me_; ++r) t.emplace_back(n_ + r, n_ + r, -dc);
    kkt.setFromTriplets(t.begin(), t.end());
    if (!pattern_ready_) {
      ldlt_.analyzePattern(kkt);
      pattern_ready_ = true;
    }
    ldlt_.factorize(kkt);
    bool ok = ldlt_.info() == Eigen::Success;
    int pos = 0, neg = 0, zero = 0;
    if (ok) {
      const Vec d = ldlt_.vectorD();
      for (int i = 0; i < dim; ++i) {
        if (!std::isfinite(d[i])) ok = false;
        if (d[i] > 0) ++pos;
        else if (d[i] < 0) ++neg;
        else ++zero;
      }
    }
    if (ok && pos == n_ && neg == me_ + mi_) {
      if (dw > 0) last_dw_ = dw;
      last_dw_used_ = dw;
      kkt_ = kkt;
      last_dc_ = dc;
      last_rhs_ = rhs;
      const Vec sol = kkt_solve(rhs);
      if (!sol.allFinite()) return false;
      dx = sol.head(n_);
      dlam = sol.segment(n_, me_);
      dLam = sol.tail(mi_);
      return true;
    }
    if ((!ok || zero > 0) && me_ > 0 && !raised_dc) {
      dc = std::max(dc, 1e-8 * std::pow(mu_, 0.25));
      raised_dc = true;
      continue;
    }
    if (dw == 0.0) {
      dw = last_dw_ > 0 ? std::max(opts_.reg_init, last_dw_ / 3.0) : opts_.reg_init;
    } else {
      dw *= opts_.reg_growth;
    }
    if (dw > opts_.reg_max) return false;
  }
  return false;
}

Vec Solver::kkt_solve(const Vec& rhs) const {
  // Iterative refinement against the matrix without the dual regularization.
  Vec sol = ldlt_.solve(rhs);
  for (int step = 0; step < 3; ++step) {
    Vec kv = kkt_.selfadjointView<Eigen::Lower>() * sol;
    kv.segment(n_, me_) += last_dc_ * sol.segment(n_, me_);
    const Vec res = rhs - kv;
    if (inf_norm(res) <= 1e-14 * (1.0 + inf_norm(rhs))) break;
    sol += ldlt_.solve(res);
  }
  return sol;
}

void Solver::reset_multipliers() {
  for (int j = 0; j < mi_; ++j) {
    const double lo = mu_ / (kSigmaBand * s_[j]);
    const double hi = kSigmaBand * mu_ / s_[j];
    Lam_[j] = std::clamp(Lam_[j], lo, hi);
  }
  for (int i : b_.lower_idx) {
    const double d = x_[i] - b_.lower[i];
    zl_[i] = std::clamp(zl_[i], mu_ / (kSigmaBand * d), kSigmaBand * mu_ / d);
  }
  for (int i : b_.upper_idx) {
    const double d = b_.upper[i] - x_[i];
    zu_[i] = std::clamp(zu_[i], mu_ / (kSigmaBand * d), kSigmaBand * mu_ / d);
  }
}

void Solver::check_interior() const {
  for (int j = 0; j < mi_; ++j)
    if (!(s_[j] > 0.0) || !(Lam_[j] > 0.0)) throw Error("interior-point iterate left the interior");
  for (int i : b_.lower_idx)
    if (!(x_[i] > b_.lower[i]) || !(zl_[i] > 0.0)) throw Error("interior-point iterate left the interior");
  for (int i : b_.upper_idx)
    if (!(x_[i] < b_.upper[i]) || !(zu_[i] > 0.0)) throw Error("interior-point iterate left the interior");
}

void Solver::log_iteration(int iter, double alpha) const {
  if (!opts_.log) return;
  const Residuals r = residuals();
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d\t%.10e\t%.3e\t%.3e\t%.3e\t%.3e\n", iter, f_, r.primal,
                r.stationarity, mu_, alpha);
  *opts_.log << buf;
}

NlpSolution Solver::package(SolveStatus status, int iterations) const {
  NlpSolution out;
  const bool use_best = status != SolveStatus::Optimal && best_x_.size() == n_;
  out.z = use_best ? best_x_ : x_;
  out.slacks = use_best ? best_s_ : s_;
  out.eq_multipliers = use_best ? best_lam_ : lam_;
  out.ineq_multipliers = use_best ? best_Lam_ : Lam_;
  out.lower_bound_multipliers = use_best ? best_zl_ : zl_;
  out.upper_bound_multipliers = use_best ? best_zu_ : zu_;
  out.objective = use_best ? best_f_ : f_;
  const Residuals r = use_best ? best_res_ : residuals();
  out.kkt.stationarity = r.stationarity / r.sd;
  out.kkt.primal = r.primal;
  double dual = 0.0;
  if (out.ineq_multipliers.size()) dual = std::max(dual, -out.ineq_multipliers.minCoeff());
  if (n_) dual = std::max({dual, -out.lower_bound_multipliers.minCoeff(),
                           -out.upper_bound_multipliers.minCoeff()});
  out.kkt.dual = dual;
  out.kkt.complementarity = r.comp0 / r.sc;
  out.status = status;
  out.iterations = iterations;
  out.restorations = restorations_;
  out.final_mu = mu_;
  out.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start_).count();
  return out;
}

bool Solver::restoration(NlpSolution& out) {
  ++restorations_;
  const double theta_before = std::max(inf_norm(ce_), inf_norm(positive_part(ci_)));
  RestorationNlp rnlp(nlp_, x_, 1e-6);
  WarmStart ws;
  ws.primal.resize(n_ + mi_);
  ws.primal << x_, positive_part(ci_);
  SolverOptions ropts = opts_;
  ropts.enable_restoration = false;
  ropts.log = nullptr;
  ropts.max_iter = std::max(opts_.max_iter, 200);
  ropts.mu_init = std::max(mu_, 1e-4);
  const NlpSolution rs = solve(rnlp, ws, ropts);
  const Vec xr = rs.z.head(n_);

  double fr;
  Vec cer, cir;
  if (!evaluate_trial(xr, fr, cer, cir)) {
    out.status = SolveStatus::RestorationFailed;
    return false;
  }
  const double theta_after = std::max(inf_norm(cer), inf_norm(positive_part(cir)));
  if (rs.status == SolveStatus::Optimal && theta_after > std::sqrt(opts_.tol_primal)) {
    out.status = SolveStatus::InfeasibleDetected;
    return false;
  }
  if (rs.status != SolveStatus::Optimal && theta_after >= theta_before) {
    out.status = SolveStatus::RestorationFailed;
    return false;
  }

  x_ = xr;
  for (int i : b_.lower_idx) x_[i] = std::max(x_[i], b_.lower[i] + 1e-14 * (1.0 + std::abs(b_.lower[i])));
  for (int i : b_.upper_idx) x_[i] = std::min(x_[i], b_.upper[i] - 1e-14 * (1.0 + std::abs(b_.upper[i])));
  evaluate();
  s_ = (-ci_).cwiseMax(mu_);
  const Vec y = least_squares_multipliers(nlp_, x_, zl_, zu_);
  if (inf_norm(y) > kMultiplierResetLimit) {
    lam_.setZero();
    Lam_.setConstant(opts_.mult_min);
  } else {
    lam_ = y.head(me_);
    Lam_ = y.tail(mi_).cwiseMax(opts_.mult_min);
  }
  reset_multipliers();
  nu_ = 1.0;
  return true;
}

NlpSolution Solver::run(InteriorPoint start) {
  t_start_ = std::chrono::steady_clock::now();
  x_ = std::move(start.z);
  s_ = std::move(start.slacks);
  lam_ = std::move(start.eq_multipliers);
  Lam_ = std::move(start.ineq_multipliers);
  zl_ = std::move(start.lower_bound_multipliers);
  zu_ = std::move(start.upper_bound_multipliers);
  mu_ = start.mu;
  evaluate();
  check_interior();

  if (opts_.log) *opts_.log << kIpmLogHeader << '\n';

  int ls_failures = 0;
  double alpha_logged = 0.0;
  NlpSolution failure;
  for (int iter = 0;; ++iter) {
    Residuals res = residuals();
    log_iteration(iter, alpha_logged);

    const double score = res.e0();
    if (score < best_score_) {
      best_score_ = score;
      best_x_ = x_, best_s_ = s_, best_lam_ = lam_, best_Lam_ = Lam_;
      best_zl_ = zl_, best_zu_ = zu_, best_f_ = f_, best_res_ = res;
    }
    if (res.stationarity / res.sd <= opts_.tol_kkt && res.primal <= opts_.tol_primal &&
        res.comp0 / res.sc <= opts_.tol_kkt)
      return package(SolveStatus::Optimal, iter);
    if (iter >= opts_.max_iter) return package(SolveStatus::MaxIter, iter);

    while (mu_ > mu_min_ && res.e_mu() <= opts_.barrier_tol_factor * mu_) {
      mu_ = std::max(mu_min_, std::min(opts_.mu_linear_decrease * mu_,
                                       std::pow(mu_, opts_.mu_superlinear_power)));
      res = residuals();
    }

    const SpMat hess = nlp_.lagrangian_hessian(x_, 1.0, lam_, Lam_);
    Vec dx, dlam, dLam;
    bool have_dir = compute_direction(hess, dx, dlam, dLam);

    bool accepted = false;
    double alpha_p = 0.0;
    Vec ds, dzl, dzu;
    if (have_dir) {
      ds = mi_ ? Vec(-(ci_ + s_) - ji_ * dx) : Vec(0);
      dzl = Vec::Zero(n_);
      dzu = Vec::Zero(n_);
      for (int i : b_.lower_idx) {
        const double d = x_[i] - b_.lower[i];
        dzl[i] = mu_ / d - zl_[i] - zl_[i] / d * dx[i];
      }
      for (int i : b_.upper_idx) {
        const double d = b_.upper[i] - x_[i];
        dzu[i] = mu_ / d - zu_[i] + zu_[i] / d * dx[i];
      }

      const double tau = std::max(opts_.fraction_to_boundary, 1.0 - mu_);
      double a_p = 1.0, a_d = 1.0;
      for (int j = 0; j < mi_; ++j) {
        if (ds[j] < 0) a_p = std::min(a_p, -tau * s_[j] / ds[j]);
        if (dLam[j] < 0) a_d = std::min(a_d, -tau * Lam_[j] / dLam[j]);
      }
      for (int i : b_.lower_idx) {
        if (dx[i] < 0) a_p = std::min(a_p, -tau * (x_[i] - b_.lower[i]) / dx[i]);
        if (dzl[i] < 0) a_d = std::min(a_d, -tau * zl_[i] / dzl[i]);
      }
      for (int i : b_.upper_idx) {
        if (dx[i] > 0) a_p = std::min(a_p, tau * (b_.upper[i] - x_[i]) / dx[i]);
        if (dzu[i] < 0) a_d = std::min(a_d, -tau * zu_[i] / dzu[i]);
      }

      // Barrier gradient along the step and the curvature term for the penalty update.
      double grad_dir = g_.dot(dx);
      for (int j = 0; j < mi_; ++j) grad_dir -= mu_ * ds[j] / s_[j];
      for (int i : b_.lower_idx) grad_dir -= mu_ * dx[i] / (x_[i] - b_.lower[i]);
      for (int i : b_.upper_idx) grad_dir += mu_ * dx[i] / (b_.upper[i] - x_[i]);
      const double theta = ce_.lpNorm<1>() + (ci_ + s_).lpNorm<1>();
      // Round-off level of theta. Below it the penalty is left alone, and the
      // Armijo test tolerates merit noise of that size.
      const double theta_noise = 100.0 * std::numeric_limits<double>::epsilon() *
                                 (x_.lpNorm<1>() + s_.lpNorm<1>() + ci_.lpNorm<1>());
      if (theta > theta_noise) {
        double curv = dx.dot(hess.selfadjointView<Eigen::Lower>() * dx) + last_dw_used_ * dx.squaredNorm();
        for (int i : b_.lower_idx) curv += zl_[i] / (x_[i] - b_.lower[i]) * dx[i] * dx[i];
        for (int i : b_.upper_idx) curv += zu_[i] / (b_.upper[i] - x_[i]) * dx[i] * dx[i];
        for (int j = 0; j < mi_; ++j) curv += Lam_[j] / s_[j] * ds[j] * ds[j];
        const double nu_trial = (grad_dir + 0.5 * std::max(0.0, curv)) / (0.9 * theta);
        if (nu_ < nu_trial) nu_ = nu_trial + 1.0;
      }
      const double dphi = grad_dir - nu_ * theta;
      const double phi0 = merit(f_, ce_, ci_, x_, s_);

      bool tiny = true;
      for (int i = 0; i < n_ && tiny; ++i)
        if (std::abs(dx[i]) > 1e-15 * (1.0 + std::abs(x_[i]))) tiny = false;
      for (int j = 0; j < mi_ && tiny; ++j)
        if (std::abs(ds[j]) > 1e-15 * (1.0 + std::abs(s_[j]))) tiny = false;

      const double slop = 10.0 * std::numeric_limits<double>::epsilon() * std::abs(phi0) + nu_ * theta_noise;
      auto passes = [&](const Vec& xt, const Vec& st, double step, Vec* cet_out, Vec* cit_out) {
        double ft;
        Vec cet, cit;
        if (!evaluate_trial(xt, ft, cet, cit)) return false;
        const double phit = merit(ft, cet, cit, xt, st);
        if (cet_out) *cet_out = cet;
        if (cit_out) *cit_out = cit;
        return tiny || (std::isfinite(phit) && phit <= phi0 + opts_.armijo * step * std::min(dphi, 0.0) + slop);
      };

      double alpha = a_p;
      for (int trial = 0; trial < 50; ++trial) {
        Vec cet, cit;
        const Vec xt = x_ + alpha * dx;
        const Vec st = s_ + alpha * ds;
        if (passes(xt, st, alpha, &cet, &cit)) {
          accepted = true;
          alpha_p = alpha;
          break;
        }
        if (trial == 0 && cet.size() == me_ && cit.size() == mi_ &&
            cet.lpNorm<1>() + (cit + st).lpNorm<1>() >= theta) {
          // Second-order correction: re-solve with the constraint residual at the trial point.
          Vec soc_e = alpha * ce_ + cet;
          Vec soc_i = mi_ ? Vec(alpha * (ci_ + s_) + (cit + st)) : Vec(0);
          for (int k = 0; k < kMaxSoc && !accepted; ++k) {
            Vec rhs = last_rhs_;
            rhs.segment(n_, me_) = -soc_e;
            for (int j = 0; j < mi_; ++j) rhs[n_ + me_ + j] = -soc_i[j] + s_[j] - mu_ / Lam_[j];
            const Vec sol = kkt_solve(rhs);
            if (!sol.allFinite()) break;
            const Vec cdx = sol.head(n_);
            const Vec cds = mi_ ? Vec(-soc_i - ji_ * cdx) : Vec(0);
            double a_soc = 1.0;
            for (int j = 0; j < mi_; ++j)
              if (cds[j] < 0) a_soc = std::min(a_soc, -tau * s_[j] / cds[j]);
            for (int i : b_.lower_idx)
              if (cdx[i] < 0) a_soc = std::min(a_soc, -tau * (x_[i] - b_.lower[i]) / cdx[i]);
            for (int i : b_.upper_idx)
              if (cdx[i] > 0) a_soc = std::min(a_soc, tau * (b_.upper[i] - x_[i]) / cdx[i]);
            const Vec xs = x_ + a_soc * cdx;
            const Vec ss = s_ + a_soc * cds;
            Vec ces, cis;
            if (passes(xs, ss, alpha, &ces, &cis)) {
              accepted = true;
              alpha_p = a_soc;
              dx = cdx;
              ds = cds;
              dlam = sol.segment(n_, me_);
              dLam = sol.tail(mi_);
              for (int i : b_.lower_idx) {
                const double d = x_[i] - b_.lower[i];
                dzl[i] = mu_ / d - zl_[i] - zl_[i] / d * dx[i];
              }
              for (int i : b_.upper_idx) {
                const double d = b_.upper[i] - x_[i];
                dzu[i] = mu_ / d - zu_[i] + zu_[i] / d * dx[i];
              }
              a_d = 1.0;
              for (int j = 0; j < mi_; ++j)
                if (dLam[j] < 0) a_d = std::min(a_d, -tau * Lam_[j] / dLam[j]);
              for (int i : b_.lower_idx)
                if (dzl[i] < 0) a_d = std::min(a_d, -tau * zl_[i] / dzl[i]);
              for (int i : b_.upper_idx)
                if (dzu[i] < 0) a_d = std::min(a_d, -tau * zu_[i] / dzu[i]);
              break;
            }
            if (ces.size() != me_ || cis.size() != mi_) break;
            const double theta_soc = ces.lpNorm<1>() + (cis + ss).lpNorm<1>();
            if (theta_soc > kSocDecrease * (cet.lpNorm<1>() + (cit + st).lpNorm<1>())) break;
            soc_e = a_soc * soc_e + ces;
            soc_i = mi_ ? Vec(a_soc * soc_i + (cis + ss)) : Vec(0);
            cet = ces;
            cit = cis;
          }
          if (accepted) break;
        }
        alpha *= 0.5;
        if (alpha < 1e-14) break;
      }

      if (accepted) {
        x_ += alpha_p * dx;
        if (mi_) s_ += alpha_p * ds;
        lam_ += alpha_p * dlam;
        Lam_ += a_d * dLam;
        zl_ += a_d * dzl;
        zu_ += a_d * dzu;
        for (int i = 0; i < n_; ++i) {
          if (!std::isfinite(b_.lower[i])) zl_[i] = 0.0;
          if (!std::isfinite(b_.upper[i])) zu_[i] = 0.0;
        }
        reset_multipliers();
        check_interior();
        evaluate();
        alpha_logged = alpha_p;
        ls_failures = 0;
        // Heavy backtracking: regularize the next step more, as a trust region would.
        dw_floor_ = alpha_p < kShortStep * a_p ? std::max(kShortStepReg, opts_.reg_growth * last_dw_used_) : 0.0;
        continue;
      }
    }

    ++ls_failures;
    alpha_logged = 0.0;
    dw_floor_ = std::max(1e-4, 100.0 * std::max(dw_floor_, last_dw_used_));
    if (ls_failures >= opts_.line_search_failures_before_restoration || !have_dir) {
      if (!opts_.enable_restoration || restorations_ >= opts_.max_restorations)
        return package(SolveStatus::RestorationFailed, iter + 1);
      if (!restoration(failure)) return package(failure.status, iter + 1);
      ls_failures = 0;
      dw_floor_ = 0.0;
    }
  }
}

}  // namespace

Vec least_squares_multipliers(const Nlp& nlp, const Vec& z, const Vec& z_lower,
                              const Vec& z_upper, double damping) {
  const int me = nlp.num_equalities();
  const int mi = nlp.num_inequalities();
  const int m = me + mi;
  if (m == 0) return Vec(0);
  const SpMat j = stack_rows(nlp.equality_jacobian(z), nlp.inequality_jacobian(z));
  Vec r = nlp.objective_gradient(z);
  if (z_lower.size() == r.size()) r -= z_lower;
  if (z_upper.size() == r.size()) r += z_upper;
  SpMat jjt = j * SpMat(j.transpose());
  for (int i = 0; i < m; ++i) jjt.coeffRef(i, i) += damping;
  Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt(jjt);
  if (ldlt.info() != Eigen::Success) return Vec::Zero(m);
  Vec y = ldlt.solve(Vec(-(j * r)));
  if (!y.allFinite()) return Vec::Zero(m);
  return y;
}

Vec push_into_bounds(const Nlp& nlp, Vec z, double push) {
  const BoundInfo b = bound_info(nlp);
  for (int i = 0; i < z.size(); ++i) {
    const double lo = b.lower[i], hi = b.upper[i];
    const double range = hi - lo;
    if (std::isfinite(lo)) {
      double pl = push * std::max(1.0, std::abs(lo));
      if (std::isfinite(hi)) pl = std::min(pl, push * range);
      z[i] = std::max(z[i], lo + pl);
    }
    if (std::isfinite(hi)) {
      double pu = push * std::max(1.0, std::abs(hi));
      if (std::isfinite(lo)) pu = std::min(pu, push * range);
      z[i] = std::min(z[i], hi - pu);
    }
  }
  return z;
}

InteriorPoint initialize(const Nlp& nlp, const WarmStart& warm, const SolverOptions& opts) {
  const int n = nlp.num_variables();
  const int me = nlp.num_equalities();
  const int mi = nlp.num_inequalities();
  if (warm.primal.size() != n) throw DimensionError("warm-start primal has the wrong size");
  if (warm.eq_multipliers && warm.eq_multipliers->size() != me)
    throw DimensionError("warm-start equality multipliers have the wrong size");
  if (warm.ineq_multipliers && warm.ineq_multipliers->size() != mi)
    throw DimensionError("warm-start inequality multipliers have the wrong size");
  if (warm.slacks && warm.slacks->size() != mi)
    throw DimensionError("warm-start slacks have the wrong size");
  if (!warm.primal.allFinite()) throw InvalidArgument("warm-start primal is not finite");

  const BoundInfo b = bound_info(nlp);
  const bool dual_warm = warm.eq_multipliers.has_value() && warm.ineq_multipliers.has_value();
  const double push = dual_warm ? opts.warm_slack_min : opts.slack_min;

  InteriorPoint p;
  p.z = push_into_bounds(nlp, warm.primal, push);

  const Vec ci = nlp.inequalities(p.z);
  if (!ci.allFinite()) throw EvaluationError("non-finite inequality at the starting point", -1);
  p.slacks = (-ci).cwiseMax(push);

  const double mu_min = opts.tol_kkt / 10.0;
  p.lower_bound_multipliers = Vec::Zero(n);
  p.upper_bound_multipliers = Vec::Zero(n);
  if (dual_warm) {
    p.eq_multipliers = *warm.eq_multipliers;
    p.ineq_multipliers = warm.ineq_multipliers->cwiseMax(opts.mult_min);
    for (int i = 0; i < n; ++i) {
      if (std::isfinite(b.lower[i])) {
        const double given = warm.lower_bound_multipliers && warm.lower_bound_multipliers->size() == n
                                 ? (*warm.lower_bound_multipliers)[i] : 0.0;
        p.lower_bound_multipliers[i] = std::max(given, opts.mult_min);
      }
      if (std::isfinite(b.upper[i])) {
        const double given = warm.upper_bound_multipliers && warm.upper_bound_multipliers->size() == n
                                 ? (*warm.upper_bound_multipliers)[i] : 0.0;
        p.upper_bound_multipliers[i] = std::max(given, opts.mult_min);
      }
    }
    double sum = 0.0;
    int count = 0;
    for (int j = 0; j < mi; ++j, ++count) sum += p.slacks[j] * p.ineq_multipliers[j];
    for (int i = 0; i < n; ++i) {
      if (std::isfinite(b.lower[i])) sum += (p.z[i] - b.lower[i]) * p.lower_bound_multipliers[i], ++count;
      if (std::isfinite(b.upper[i])) sum += (b.upper[i] - p.z[i]) * p.upper_bound_multipliers[i], ++count;
    }
    p.mu = count ? std::clamp(sum / count, mu_min, opts.mu_init) : mu_min;
  } else {
    p.mu = opts.mu_init;
    for (int i = 0; i < n; ++i) {
      if (std::isfinite(b.lower[i]))
        p.lower_bound_multipliers[i] = std::clamp(p.mu / (p.z[i] - b.lower[i]), opts.mult_min, 1.0);
      if (std::isfinite(b.upper[i]))
        p.upper_bound_multipliers[i] = std::clamp(p.mu / (b.upper[i] - p.z[i]), opts.mult_min, 1.0);
    }
    const Vec y = least_squares_multipliers(nlp, p.z, p.lower_bound_multipliers,
                                            p.upper_bound_multipliers);
    if (y.size() && inf_norm(y) > kMultiplierResetLimit) {
      p.eq_multipliers = Vec::Zero(me);
      p.ineq_multipliers = Vec::Constant(mi, opts.mult_min);
    } else {
      p.eq_multipliers = y.head(me);
      p.ineq_multipliers = y.tail(mi).cwiseMax(opts.mult_min);
    }
  }
  return p;
}

NlpSolution solve(const Nlp& nlp, const WarmStart& warm, const SolverOptions& opts) {
  if (opts.tol_kkt <= 0 || opts.tol_primal <= 0 || opts.max_iter < 0)
    throw InvalidArgument("solver tolerances must be positive");
  Solver solver(nlp, opts);
  return solver.run(initialize(nlp, warm, opts));
}

}  // namespace ech
