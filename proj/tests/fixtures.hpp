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

// Small OCPs shared by the unit tests.

#pragma once

#include <cmath>
#include <random>

#include "ech/ocp.hpp"
#include "ech/nlp.hpp"

namespace fixtures {

using ech::Mat;
using ech::NodePoint;
using ech::Vec;

inline Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

// xdot = a x + b u, scalar, on [0, tf]; u is penalized.
inline ech::OcpProblem scalar_linear(double a, double b, double tf = 1.0) {
  ech::OcpDefinition d;
  d.state_dim = 1;
  d.input_dim = 1;
  d.dynamics.outputs = 1;
  d.dynamics.value = [a, b](const NodePoint& p) { return Vec(Vec::Constant(1, a * p.x[0] + b * p.u[0])); };
  d.lagrange_cost.outputs = 1;
  d.lagrange_cost.value = [](const NodePoint& p) { return Vec(Vec::Constant(1, p.u[0] * p.u[0])); };
  d.time.tf = tf;
  return ech::OcpProblem(d);
}

// x1dot = x2, x2dot = u.
inline ech::OcpProblem double_integrator(int constraints = 0, double tf = 1.0) {
  ech::OcpDefinition d;
  d.state_dim = 2;
  d.input_dim = 1;
  d.dynamics.outputs = 2;
  d.dynamics.value = [](const NodePoint& p) { return vec({p.x[1], p.u[0]}); };
  d.dynamics.jacobian = [](const NodePoint&) {
    Mat j = Mat::Zero(2, 4);
    j(0, 1) = 1.0;
    j(1, 2) = 1.0;
    return j;
  };
  d.lagrange_cost.outputs = 1;
  d.lagrange_cost.value = [](const NodePoint& p) { return Vec(Vec::Constant(1, p.u[0] * p.u[0])); };
  if (constraints > 0) {
    d.path_constraints.outputs = constraints;
    d.path_constraints.value = [constraints](const NodePoint& p) {
      Vec c(constraints);
      for (int l = 0; l < constraints; ++l) c[l] = p.x[0] - 1.0 - l;
      return c;
    };
  }
  d.time.tf = tf;
  return ech::OcpProblem(d);
}

// Nonlinear problem exercising every term: time-dependent dynamics and
// constraints, a parameter, Mayer cost and boundary conditions. Derivatives
// come from finite differences inside the library.
inline ech::OcpProblem nonlinear_toy(bool free_tf, bool analytic = true) {
  ech::OcpDefinition d;
  d.state_dim = 2;
  d.input_dim = 1;
  d.param_dim = 1;
  d.dynamics.outputs = 2;
  d.dynamics.value = [](const NodePoint& p) {
    return vec({p.x[1] * std::cos(p.x[0]) + 0.1 * p.t, p.u[0] * p.x[0] - p.p[0] * std::sin(p.x[1])});
  };
  d.path_constraints.outputs = 2;
  d.path_constraints.value = [](const NodePoint& p) {
    return vec({p.x[0] * p.x[0] + p.u[0] * p.x[1] - 2.0, std::sin(p.t) * p.x[1] - p.p[0]});
  };
  d.lagrange_cost.outputs = 1;
  d.lagrange_cost.value = [](const NodePoint& p) {
    return Vec(Vec::Constant(1, p.u[0] * p.u[0] + p.x[0] * p.x[1] + 0.5 * p.t * p.x[1]));
  };
  d.mayer_cost.outputs = 1;
  d.mayer_cost.value = [](const ech::BoundaryPoint& b) {
    return Vec(Vec::Constant(1, b.xf[0] * b.xf[0] + b.tf * b.xf[1] + b.p[0] * b.x0[1]));
  };
  d.boundary.outputs = 2;
  d.boundary.value = [](const ech::BoundaryPoint& b) {
    return vec({b.x0[0] - 0.5, b.xf[1] * b.xf[0] - b.tf * 0.1});
  };
  if (analytic) {
    // Packed node columns (x0, x1, u, p, t); boundary columns (x0_0, x0_1, t0, xf_0, xf_1, tf, p).
    d.dynamics.jacobian = [](const NodePoint& p) {
      Mat j(2, 5);
      j << -p.x[1] * std::sin(p.x[0]), std::cos(p.x[0]), 0, 0, 0.1,
          p.u[0], -p.p[0] * std::cos(p.x[1]), p.x[0], -std::sin(p.x[1]), 0;
      return j;
    };
    d.path_constraints.jacobian = [](const NodePoint& p) {
      Mat j(2, 5);
      j << 2 * p.x[0], p.u[0], p.x[1], 0, 0,
          0, std::sin(p.t), 0, -1, std::cos(p.t) * p.x[1];
      return j;
    };
    d.lagrange_cost.jacobian = [](const NodePoint& p) {
      Mat j(1, 5);
      j << p.x[1], p.x[0] + 0.5 * p.t, 2 * p.u[0], 0, 0.5 * p.x[1];
      return j;
    };
    d.mayer_cost.jacobian = [](const ech::BoundaryPoint& b) {
      Mat j(1, 7);
      j << 0, b.p[0], 0, 2 * b.xf[0], b.tf, b.xf[1], b.x0[1];
      return j;
    };
    d.boundary.jacobian = [](const ech::BoundaryPoint& b) {
      Mat j(2, 7);
      j << 1, 0, 0, 0, 0, 0, 0,
          0, 0, 0, b.xf[1], b.xf[0], -0.1, 0;
      return j;
    };
  }
  d.time.fixed_terminal_time = !free_tf;
  d.time.tf = 2.0;
  d.time.tf_lower = 0.5;
  d.time.tf_upper = 5.0;
  return ech::OcpProblem(d);
}

// Central differences of a vector function; relative step 1e-6.
template <class F>
Mat fd_jacobian(F&& f, const Vec& z) {
  const Vec f0 = f(z);
  Mat j(f0.size(), z.size());
  for (int i = 0; i < z.size(); ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(z[i]));
    Vec zp = z, zm = z;
    zp[i] += h;
    zm[i] -= h;
    j.col(i) = (f(zp) - f(zm)) / (2 * h);
  }
  return j;
}

inline Vec random_vec(std::mt19937& rng, int n, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

}  // namespace fixtures
