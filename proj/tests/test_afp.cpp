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


#include <cmath>

#include "doctest.h"
#include "ech/afp.hpp"
#include "ech/bench.hpp"
#include "ech/errors.hpp"
#include "fixtures.hpp"

using namespace ech;
using fixtures::vec;

namespace {

// xdot = u on [0, 1] with the single row c = x <= 0.
OcpProblem signed_state() {
  OcpDefinition d;
  d.state_dim = 1;
  d.input_dim = 1;
  d.dynamics.outputs = 1;
  d.dynamics.value = [](const NodePoint& p) { return p.u; };
  d.path_constraints.outputs = 1;
  d.path_constraints.value = [](const NodePoint& p) { return Vec(Vec::Constant(1, p.x[0])); };
  d.time.tf = 1.0;
  return OcpProblem(d);
}

NodeValues states(std::initializer_list<double> xs) {
  NodeValues v;
  v.X = Mat(static_cast<int>(xs.size()), 1);
  int i = 0;
  for (double x : xs) v.X(i++, 0) = x;
  v.U = Mat::Zero(v.X.rows(), 1);
  v.p = Vec(0);
  v.tf = 1.0;
  return v;
}

double max_row(const DiscretizedNlp& nlp, const NodeValues& v) {
  const Vec c = nlp.inequalities(nlp.pack(v));
  return c.size() ? c.maxCoeff() : -1e300;
}

}  // namespace

TEST_CASE("initial slacks follow the positive part of the rows") {
  const OcpProblem prob = signed_state();
  const Mesh mesh = Mesh::uniform(1);
  const AfpOptions opts;

  SUBCASE("feasible everywhere") {
    const AfpProblem afp = build_afp(prob, mesh, ActivationFilter::all(1), states({-1.0, -0.5, -0.2}), opts);
    CHECK(afp.s_hat.isZero(0.0));
    CHECK(afp.s_bar[0] == doctest::Approx(opts.padding));
    CHECK(afp_initial_margin(afp) < 0.0);
  }
  SUBCASE("one violated node") {
    const AfpProblem afp = build_afp(prob, mesh, ActivationFilter::all(1), states({-1.0, 0.3, -0.2}), opts);
    CHECK(afp.s_hat(1, 0) == doctest::Approx(0.3));
    CHECK(afp.s_hat(0, 0) == 0.0);
    CHECK(afp.s_bar[0] == doctest::Approx(0.3 + opts.padding));
    CHECK(afp_initial_margin(afp) < 0.0);
  }
  SUBCASE("mixed nodes") {
    const AfpProblem afp = build_afp(prob, mesh, ActivationFilter::all(1), states({-0.2, 0.0, 0.5}), opts);
    REQUIRE(afp.s_hat.rows() == 3);
    CHECK(afp.s_hat(0, 0) == 0.0);
    CHECK(afp.s_hat(1, 0) == 0.0);
    CHECK(afp.s_hat(2, 0) == doctest::Approx(0.5));
    CHECK(afp.s_bar[0] == doctest::Approx(0.5 + opts.padding));
  }
  SUBCASE("rows outside the filter do not count") {
    ActivationFilter f;
    f.rows = {RowFilter::within({{0.0, 0.25}})};
    const AfpProblem afp = build_afp(prob, mesh, f, states({-0.2, 0.0, 0.5}), opts);
    CHECK(afp.s_hat(2, 0) == 0.0);
    CHECK(afp.s_bar[0] == doctest::Approx(opts.padding));
  }
}

TEST_CASE("AFP layout: one slack per constraint function, no original cost") {
  const BenchProblem b = bench_nfz5();
  const AfpProblem afp =
      build_afp(*b.problem, b.mesh, ActivationFilter::all(5), straight_line_guess(b.spec, b.mesh));
  const AfpNlp& nlp = *afp.nlp;
  CHECK(nlp.num_slacks() == 5);
  CHECK(nlp.num_variables() == nlp.base().num_variables() + 5);
  CHECK(nlp.num_inequalities() == nlp.base().num_inequalities());
  CHECK(nlp.num_equalities() == nlp.base().num_equalities());
  // At the anchor the objective is the slack sum.
  const Vec w = nlp.join(afp.start, afp.s_bar);
  CHECK(nlp.objective(w) == doctest::Approx(afp.s_bar.sum()));
  CHECK(afp_initial_margin(afp) < 0.0);
}

TEST_CASE("AFP from a feasible warm start stays put") {
  const BenchProblem b = bench_nfz5();
  DiscretizedNlp ocp(*b.problem, b.mesh, ActivationFilter::all(5));
  const NlpSolution sol = solve(ocp, WarmStart{ocp.pack(straight_line_guess(b.spec, b.mesh)), {}, {}, {}, {}, {}});
  REQUIRE(sol.status == SolveStatus::Optimal);
  const NodeValues warm = ocp.unpack(sol.z);
  const AfpProblem afp = build_afp(*b.problem, b.mesh, ActivationFilter::all(5), warm);
  const AfpResult r = solve_afp(afp);
  CHECK(r.feasible);
  CHECK(r.j_star <= 1e-6);
  CHECK((ocp.pack(r.values) - sol.z).cwiseAbs().maxCoeff() <= 1e-3);
}

TEST_CASE("AFP repairs a path pushed through the zones") {
  const BenchProblem b = bench_nfz5();
  DiscretizedNlp ocp(*b.problem, b.mesh, ActivationFilter::all(5));
  const NodeValues warm = straight_line_guess(b.spec, b.mesh);
  REQUIRE(max_row(ocp, warm) > 1.0);
  const AfpProblem afp = build_afp(*b.problem, b.mesh, ActivationFilter::all(5), warm);
  CHECK(afp_initial_margin(afp) < 0.0);
  const AfpResult r = solve_afp(afp);
  REQUIRE(r.feasible);
  CHECK(r.j_star <= 1e-6);
  CHECK(max_row(ocp, r.values) <= 1e-8);
  CHECK(ocp.equalities(ocp.pack(r.values)).cwiseAbs().maxCoeff() <= 1e-6);
  for (int i = 0; i < r.values.X.rows(); ++i)
    for (const auto& z : b.spec.zones)
      CHECK(std::hypot(r.values.X(i, 0) - z.north, r.values.X(i, 1) - z.east) >= z.radius - 1e-8);
}

TEST_CASE("AFP reports an infeasible mesh") {
  // Two overlapping zones wall off every corridor inside the position bounds.
  BenchProblemSpec s = default_nfz5_spec();
  s.goal_north = 0.0;
  s.goal_east = 40.0;
  s.start_vnorth = 0.0;
  s.start_veast = 0.0;
  s.position_bound = 50.0;
  s.zones = {{-25.0, 20.0, 30.0}, {25.0, 20.0, 30.0}};
  const BenchProblem b = bench_nfz5(s);
  const AfpProblem afp =
      build_afp(*b.problem, b.mesh, ActivationFilter::all(2), straight_line_guess(s, b.mesh));
  CHECK(afp_initial_margin(afp) < 0.0);
  const AfpResult r = solve_afp(afp);
  CHECK_FALSE(r.feasible);
  CHECK(r.j_star > 1e-6);
}
