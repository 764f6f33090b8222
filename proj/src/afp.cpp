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

#include "ech/afp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ech/errors.hpp"

namespace ech {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

SpMat widen(const SpMat& m, int cols, const Triplets& extra = {}) {
  Triplets t(extra);
  t.reserve(m.nonZeros() + extra.size());
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  SpMat out(m.rows(), cols);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

}  // namespace

AfpNlp::AfpNlp(const OcpProblem& prob, const Mesh& mesh, const ActivationFilter& filter, Vec anchor,
               double proximal)
    : base_(prob, mesh, filter), ng_(prob.num_path_constraints()), anchor_(std::move(anchor)),
      proximal_(proximal) {
  if (anchor_.size() != base_.num_variables()) throw DimensionError("AFP anchor has the wrong size");
  if (!(proximal_ >= 0)) throw InvalidArgument("AFP proximal weight must be non-negative");
}

Vec AfpNlp::join(const Vec& z, const Vec& s) const {
  Vec w(num_variables());
  w << z, s;
  return w;
}

Vec AfpNlp::lower_bounds() const { return join(base_.lower_bounds(), Vec::Zero(ng_)); }

Vec AfpNlp::upper_bounds() const {
  return join(base_.upper_bounds(), Vec::Constant(ng_, std::numeric_limits<double>::infinity()));
}

double AfpNlp::objective(const Vec& w) const {
  return slacks(w).sum() + 0.5 * proximal_ * (primal(w) - anchor_).squaredNorm();
}

Vec AfpNlp::objective_gradient(const Vec& w) const {
  return join(proximal_ * (primal(w) - anchor_), Vec::Ones(ng_));
}

Vec AfpNlp::equalities(const Vec& w) const { return base_.equalities(primal(w)); }

Vec AfpNlp::inequalities(const Vec& w) const {
  Vec c = base_.inequalities(primal(w));
  const Vec s = slacks(w);
  const auto& rows = base_.row_map();
  for (std::size_t r = 0; r < rows.size(); ++r) c[static_cast<int>(r)] -= s[rows[r].constraint];
  return c;
}

SpMat AfpNlp::equality_jacobian(const Vec& w) const {
  return widen(base_.equality_jacobian(primal(w)), num_variables());
}

SpMat AfpNlp::inequality_jacobian(const Vec& w) const {
  const int nz = base_.num_variables();
  Triplets t;
  const auto& rows = base_.row_map();
  for (std::size_t r = 0; r < rows.size(); ++r) t.emplace_back(static_cast<int>(r), nz + rows[r].constraint, -1.0);
  return widen(base_.inequality_jacobian(primal(w)), num_variables(), t);
}

SpMat AfpNlp::lagrangian_hessian(const Vec& w, double obj_factor, const Vec& eq_mult,
                                 const Vec& ineq_mult) const {
  const int nz = base_.num_variables();
  Triplets t;
  for (int i = 0; i < nz; ++i) t.emplace_back(i, i, obj_factor * proximal_);
  SpMat h = widen(base_.lagrangian_hessian(primal(w), 0.0, eq_mult, ineq_mult), num_variables(), t);
  h.conservativeResize(num_variables(), num_variables());
  return h;
}

AfpProblem build_afp(const OcpProblem& prob, const Mesh& mesh, const ActivationFilter& filter,
                     const NodeValues& warm, const AfpOptions& opts) {
  if (!(opts.padding > 0)) throw InvalidArgument("AFP slack padding must be positive");
  AfpProblem afp;
  afp.options = opts;
  const DiscretizedNlp probe(prob, mesh, filter);
  afp.start = push_into_bounds(probe, probe.pack(warm), opts.push);
  afp.nlp = std::make_shared<AfpNlp>(prob, mesh, filter, afp.start, opts.proximal);

  const int ng = prob.num_path_constraints();
  const Vec c = probe.inequalities(afp.start);
  afp.s_hat = Mat::Zero(probe.num_nodes(), ng);
  const auto& rows = probe.row_map();
  for (std::size_t r = 0; r < rows.size(); ++r)
    afp.s_hat(rows[r].node, rows[r].constraint) = std::abs(std::min(-c[static_cast<int>(r)], 0.0));
  afp.s_bar = Vec::Constant(ng, opts.padding);
  for (int l = 0; l < ng; ++l)
    if (afp.s_hat.rows()) afp.s_bar[l] += afp.s_hat.col(l).maxCoeff();

  if (!(afp_initial_margin(afp) < 0.0))
    throw Error("AFP starting point is not strictly feasible for the relaxed rows");
  return afp;
}

double afp_initial_margin(const AfpProblem& afp) {
  const Vec g = afp.nlp->inequalities(afp.nlp->join(afp.start, afp.s_bar));
  return g.size() ? g.maxCoeff() : -std::numeric_limits<double>::infinity();
}

AfpResult solve_afp(const AfpProblem& afp, const SolverOptions& opts) {
  SolverOptions o = opts;
  o.slack_min = afp.options.push;
  WarmStart warm;
  warm.primal = afp.nlp->join(afp.start, afp.s_bar);
  AfpResult out;
  out.solution = solve(*afp.nlp, warm, o);
  const Vec z = afp.nlp->primal(out.solution.z);
  out.slacks = afp.nlp->slacks(out.solution.z);
  out.j_star = out.slacks.sum();
  out.values = afp.nlp->base().unpack(z);
  const Vec c = afp.nlp->base().inequalities(z);
  out.max_row = c.size() ? c.maxCoeff() : -std::numeric_limits<double>::infinity();
  out.feasible = out.solution.status == SolveStatus::Optimal && out.j_star <= afp.options.feas_tol;
  return out;
}

}  // namespace ech
