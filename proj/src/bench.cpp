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

#include "ech/bench.hpp"

#include <algorithm>
#include <cmath>

#include "ech/errors.hpp"

namespace ech {

namespace {

// Packed node columns: pN pE vN vE aN aE t.
constexpr int kNodeCols = 7;
// Packed boundary columns: x0 (4), t0, xf (4), tf.
constexpr int kBoundaryCols = 10;

}  // namespace

BenchProblemSpec default_nfz5_spec() {
  BenchProblemSpec s;
  // Zones placed at (along, lateral) offsets from the start-goal line,
  // direction (0.6, 0.8) and left normal (-0.8, 0.6).
  auto at = [](double along, double lateral, double r) {
    return NoFlyZone{0.6 * along - 0.8 * lateral, 0.8 * along + 0.6 * lateral, r};
  };
  s.zones = {at(40, 1, 3), at(15, -12, 4), at(28, 11, 3), at(10, -1, 3), at(45, -10, 3)};
  return s;
}

void validate(const BenchProblemSpec& spec) {
  if (!(spec.tf > spec.t0)) throw InvalidArgument("bench horizon needs tf > t0");
  if (spec.initial_intervals < 1) throw InvalidArgument("bench needs at least one mesh interval");
  if (!(spec.position_bound > 0 && spec.velocity_bound > 0 && spec.accel_bound > 0))
    throw InvalidArgument("bench bounds must be positive");
  if (!(spec.effort_weight > 0)) throw InvalidArgument("effort weight must be positive");
  for (std::size_t l = 0; l < spec.zones.size(); ++l) {
    const auto& z = spec.zones[l];
    if (!(z.radius > 0)) throw InvalidArgument("zone " + std::to_string(l + 1) + " has a non-positive radius");
    const auto inside = [&](double n, double e) { return std::hypot(n - z.north, e - z.east) <= z.radius; };
    if (inside(spec.start_north, spec.start_east) || inside(spec.goal_north, spec.goal_east))
      throw InvalidArgument("start or goal lies inside zone " + std::to_string(l + 1));
  }
}

BenchProblem bench_nfz5(const BenchProblemSpec& spec) {
  validate(spec);
  const int nz = static_cast<int>(spec.zones.size());
  const double w = spec.effort_weight;
  const auto zones = spec.zones;

  OcpDefinition d;
  d.state_dim = 4;
  d.input_dim = 2;
  d.state_names = {"pN", "pE", "vN", "vE"};
  d.input_names = {"aN", "aE"};

  d.dynamics.outputs = 4;
  d.dynamics.value = [](const NodePoint& p) {
    Vec f(4);
    f << p.x[2], p.x[3], p.u[0], p.u[1];
    return f;
  };
  d.dynamics.jacobian = [](const NodePoint&) {
    Mat j = Mat::Zero(4, kNodeCols);
    j(0, 2) = j(1, 3) = j(2, 4) = j(3, 5) = 1.0;
    return j;
  };
  d.dynamics.hessian = [](const NodePoint&, const Vec&) { return Mat(Mat::Zero(kNodeCols, kNodeCols)); };

  d.path_constraints.outputs = nz;
  d.path_constraints.value = [zones](const NodePoint& p) {
    Vec c(static_cast<int>(zones.size()));
    for (int l = 0; l < c.size(); ++l) {
      const auto& z = zones[l];
      c[l] = z.radius * z.radius - std::pow(p.x[0] - z.north, 2) - std::pow(p.x[1] - z.east, 2);
    }
    return c;
  };
  d.path_constraints.jacobian = [zones](const NodePoint& p) {
    Mat j = Mat::Zero(static_cast<int>(zones.size()), kNodeCols);
    for (int l = 0; l < j.rows(); ++l) {
      j(l, 0) = -2 * (p.x[0] - zones[l].north);
      j(l, 1) = -2 * (p.x[1] - zones[l].east);
    }
    return j;
  };
  d.path_constraints.hessian = [](const NodePoint&, const Vec& weights) {
    Mat h = Mat::Zero(kNodeCols, kNodeCols);
    h(0, 0) = h(1, 1) = -2 * weights.sum();
    return h;
  };

  d.lagrange_cost.outputs = 1;
  d.lagrange_cost.value = [w](const NodePoint& p) {
    return Vec(Vec::Constant(1, w * (p.u[0] * p.u[0] + p.u[1] * p.u[1])));
  };
  d.lagrange_cost.jacobian = [w](const NodePoint& p) {
    Mat j = Mat::Zero(1, kNodeCols);
    j(0, 4) = 2 * w * p.u[0];
    j(0, 5) = 2 * w * p.u[1];
    return j;
  };
  d.lagrange_cost.hessian = [w](const NodePoint&, const Vec& weights) {
    Mat h = Mat::Zero(kNodeCols, kNodeCols);
    h(4, 4) = h(5, 5) = 2 * w * weights[0];
    return h;
  };

  const Vec start = (Vec(4) << spec.start_north, spec.start_east, spec.start_vnorth, spec.start_veast).finished();
  const double gn = spec.goal_north, ge = spec.goal_east;
  d.boundary.outputs = 6;
  d.boundary.value = [start, gn, ge](const BoundaryPoint& b) {
    Vec phi(6);
    phi.head(4) = b.x0 - start;
    phi[4] = b.xf[0] - gn;
    phi[5] = b.xf[1] - ge;
    return phi;
  };
  d.boundary.jacobian = [](const BoundaryPoint&) {
    Mat j = Mat::Zero(6, kBoundaryCols);
    for (int i = 0; i < 4; ++i) j(i, i) = 1.0;
    j(4, 5) = 1.0;
    j(5, 6) = 1.0;
    return j;
  };
  d.boundary.hessian = [](const BoundaryPoint&, const Vec&) { return Mat(Mat::Zero(kBoundaryCols, kBoundaryCols)); };

  const double pb = spec.position_bound, vb = spec.velocity_bound, ab = spec.accel_bound;
  d.state_bounds = {(Vec(4) << -pb, -pb, -vb, -vb).finished(), (Vec(4) << pb, pb, vb, vb).finished()};
  d.input_bounds = {Vec::Constant(2, -ab), Vec::Constant(2, ab)};
  d.time.fixed_terminal_time = true;
  d.time.t0 = spec.t0;
  d.time.tf = spec.tf;
  d.time.tf_lower = spec.tf;
  d.time.tf_upper = spec.tf;
  for (int l = 0; l < nz; ++l) d.constraint_sets.push_back({"NFZ " + std::to_string(l + 1), {l}, "no-fly zone"});

  BenchProblem out;
  out.spec = spec;
  out.problem = std::make_shared<const OcpProblem>(std::move(d));
  out.mesh = Mesh::uniform(spec.initial_intervals);
  return out;
}

NodeValues straight_line_guess(const BenchProblemSpec& spec, const Mesh& mesh) {
  const int N = mesh.num_nodes();
  const double T = spec.tf - spec.t0;
  const double vn = (spec.goal_north - spec.start_north) / T, ve = (spec.goal_east - spec.start_east) / T;
  NodeValues v{Mat(N, 4), Mat::Zero(N, 2), Vec(0), spec.tf};
  for (int i = 0; i < N; ++i) {
    const double s = mesh.node_tau(i);
    v.X.row(i) << spec.start_north + s * (spec.goal_north - spec.start_north),
        spec.start_east + s * (spec.goal_east - spec.start_east), vn, ve;
  }
  return v;
}

bool segment_intersects_zone(double an, double ae, double bn, double be, const NoFlyZone& zone) {
  const double dn = bn - an, de = be - ae;
  const double len2 = dn * dn + de * de;
  double s = len2 > 0 ? ((zone.north - an) * dn + (zone.east - ae) * de) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  const double cn = an + s * dn - zone.north, ce = ae + s * de - zone.east;
  return cn * cn + ce * ce < zone.radius * zone.radius;
}

std::vector<int> zones_on_straight_path(const BenchProblemSpec& spec) {
  std::vector<int> out;
  for (std::size_t l = 0; l < spec.zones.size(); ++l)
    if (segment_intersects_zone(spec.start_north, spec.start_east, spec.goal_north, spec.goal_east, spec.zones[l]))
      out.push_back(static_cast<int>(l));
  return out;
}

double straight_line_min_effort(const BenchProblemSpec& spec) {
  const double T = spec.tf - spec.t0;
  const double D = std::hypot(spec.goal_north - spec.start_north, spec.goal_east - spec.start_east);
  const double v0 = std::hypot(spec.start_vnorth, spec.start_veast);
  return 3.0 * spec.effort_weight * std::pow(D - v0 * T, 2) / std::pow(T, 3);
}

}  // namespace ech
