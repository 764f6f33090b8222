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
#include <random>

#include "doctest.h"
#include "ech/bench.hpp"
#include "ech/ech.hpp"
#include "ech/errors.hpp"
#include "fixtures.hpp"

using namespace ech;

namespace {

// Densely sampled distance from a segment to a zone centre.
bool sampled_crossing(const BenchProblemSpec& s, const NoFlyZone& z) {
  double best = 1e300;
  for (int i = 0; i <= 100000; ++i) {
    const double a = i / 100000.0;
    const double n = s.start_north + a * (s.goal_north - s.start_north);
    const double e = s.start_east + a * (s.goal_east - s.start_east);
    best = std::min(best, std::hypot(n - z.north, e - z.east));
  }
  return best < z.radius;
}

// Closed-form minimum effort for p' = v, v' = a, fixed p(T), free v(T):
// a(t) = c (T - t) per axis with c = 3 (D - v0 T) / T^3. Integrated numerically.
double free_end_effort(const BenchProblemSpec& s) {
  const double T = s.tf - s.t0;
  const double cn = 3.0 * (s.goal_north - s.start_north - s.start_vnorth * T) / (T * T * T);
  const double ce = 3.0 * (s.goal_east - s.start_east - s.start_veast * T) / (T * T * T);
  const int steps = 20000;
  double sum = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double t = (i + 0.5) * T / steps;
    sum += (cn * cn + ce * ce) * (T - t) * (T - t);
  }
  return s.effort_weight * sum * T / steps;
}

double min_clearance(const DiscreteSolution& sol, const NoFlyZone& z) {
  const Interpolant it(sol);
  double best = 1e300;
  for (int i = 0; i <= 5000; ++i) {
    const double t = it.t0() + (it.tf() - it.t0()) * i / 5000.0;
    const Vec x = it.state(t);
    best = std::min(best, std::hypot(x[0] - z.north, x[1] - z.east));
  }
  return best;
}

}  // namespace

TEST_CASE("default bench: the straight path crosses zones 1 and 4 only") {
  const BenchProblemSpec s = default_nfz5_spec();
  REQUIRE(s.zones.size() == 5);
  std::vector<int> oracle;
  for (int l = 0; l < 5; ++l)
    if (sampled_crossing(s, s.zones[l])) oracle.push_back(l);
  CHECK(oracle == std::vector<int>{0, 3});
  CHECK(zones_on_straight_path(s) == oracle);
}

TEST_CASE("segment-zone intersection") {
  const NoFlyZone z{0.0, 0.0, 1.0};
  CHECK(segment_intersects_zone(-2, 0, 2, 0, z));
  CHECK_FALSE(segment_intersects_zone(-2, 1.5, 2, 1.5, z));
  CHECK_FALSE(segment_intersects_zone(2, 0, 3, 0, z));  // beyond the disc along the line
  CHECK(segment_intersects_zone(0.5, 0, 3, 0, z));     // starts inside
  CHECK_FALSE(segment_intersects_zone(-2, 1.0, 2, 1.0, z));  // tangent: open disc
}

TEST_CASE("bench spec validation") {
  auto bad = [](auto mutate) {
    BenchProblemSpec s = default_nfz5_spec();
    mutate(s);
    CHECK_THROWS_AS(validate(s), InvalidArgument);
    CHECK_THROWS_AS(bench_nfz5(s), InvalidArgument);
  };
  bad([](BenchProblemSpec& s) { s.zones[2].radius = 0.0; });
  bad([](BenchProblemSpec& s) { s.zones[2].radius = -1.0; });
  bad([](BenchProblemSpec& s) { s.tf = s.t0; });
  bad([](BenchProblemSpec& s) { s.zones.push_back({0.5, 0.5, 2.0}); });    // start inside
  bad([](BenchProblemSpec& s) { s.zones.push_back({30.0, 41.0, 2.0}); });  // goal inside
  bad([](BenchProblemSpec& s) { s.initial_intervals = 0; });
  bad([](BenchProblemSpec& s) { s.accel_bound = 0.0; });
  CHECK_NOTHROW(validate(default_nfz5_spec()));
}

TEST_CASE("bench problem layout") {
  const BenchProblem b = bench_nfz5();
  const OcpProblem& p = *b.problem;
  CHECK(p.state_dim() == 4);
  CHECK(p.input_dim() == 2);
  CHECK(p.num_path_constraints() == 5);
  REQUIRE(p.constraint_sets().size() == 5);
  CHECK(p.constraint_sets()[0].id == "NFZ 1");
  CHECK(p.constraint_sets()[4].id == "NFZ 5");
  CHECK(p.time().fixed_terminal_time);
  CHECK(b.mesh.num_intervals() == 16);

  // p' = v, v' = a at a hand-picked point.
  const Vec f = evaluate_dynamics(p, fixtures::vec({0, 0, 10, 0}), fixtures::vec({0, 0}), 0.0, Vec());
  CHECK(f.isApprox(fixtures::vec({10, 0, 0, 0})));
}

TEST_CASE("bench analytic derivatives match finite differences") {
  BenchProblemSpec s = default_nfz5_spec();
  const BenchProblem b = bench_nfz5(s);
  const OcpProblem& p = *b.problem;
  std::mt19937 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const Vec packed = fixtures::random_vec(rng, p.node_arg_size(), -40.0, 40.0);
    auto at = [&](const NodeFunction& fn) {
      return [&fn](const Vec& z) { return evaluate(fn, unpack_node(z, 4, 2, 0), "fd"); };
    };
    const NodePoint pt = unpack_node(packed, 4, 2, 0);
    for (const NodeFunction* fn : {&p.dynamics(), &p.path_constraints(), &p.lagrange_cost()}) {
      REQUIRE(fn->jacobian);
      const Mat fd = fixtures::fd_jacobian(at(*fn), packed);
      const Mat an = jacobian(*fn, pt);
      CHECK((an - fd).cwiseAbs().maxCoeff() <= 1e-6 * std::max(1.0, fd.cwiseAbs().maxCoeff()));
      if (fn->hessian) {
        const Vec w = fixtures::random_vec(rng, fn->outputs, -1.0, 1.0);
        auto wj = [&](const Vec& z) -> Vec {
          return jacobian(*fn, unpack_node(z, 4, 2, 0)).transpose() * w;
        };
        const Mat fdh = fixtures::fd_jacobian(wj, packed);
        const Mat anh = weighted_hessian(*fn, pt, w);
        CHECK((anh - fdh).cwiseAbs().maxCoeff() <= 1e-6 * std::max(1.0, fdh.cwiseAbs().maxCoeff()));
      }
    }
    const Vec bpacked = fixtures::random_vec(rng, p.boundary_arg_size(), -40.0, 40.0);
    auto bval = [&](const Vec& z) { return evaluate(p.boundary(), unpack_boundary(z, 4, 0), "fd"); };
    const Mat fdb = fixtures::fd_jacobian(bval, bpacked);
    CHECK((jacobian(p.boundary(), unpack_boundary(bpacked, 4, 0)) - fdb).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("without zones the solver finds the closed-form minimum effort") {
  BenchProblemSpec s = default_nfz5_spec();
  s.zones.clear();
  const BenchProblem b = bench_nfz5(s);
  const double oracle = free_end_effort(s);
  CHECK(straight_line_min_effort(s) == doctest::Approx(oracle).epsilon(1e-6));

  DiscretizedNlp nlp(*b.problem, b.mesh, ActivationFilter::all(0));
  const NlpSolution sol = solve(nlp, WarmStart{nlp.pack(straight_line_guess(s, b.mesh)), {}, {}, {}, {}, {}});
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("a zone centred on the straight path is cleared") {
  BenchProblemSpec s = default_nfz5_spec();
  const NoFlyZone z{15.0, 20.0, 5.0};
  s.zones = {z};
  const BenchProblem b = bench_nfz5(s);
  EchConfig cfg;
  cfg.constraint_handling = false;
  const EchResult r = run(*b.problem, b.mesh, straight_line_guess(s, b.mesh), cfg);
  REQUIRE(r.state.converged);
  CHECK(min_clearance(r.solution, z) >= z.radius - std::sqrt(cfg.eps_tol));
  CHECK(r.state.history.back().objective > free_end_effort(s));
}
