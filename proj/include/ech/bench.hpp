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

// Planar point-mass benchmark with circular no-fly zones.
//
// States (pN, pE, vN, vE) in m and m/s, inputs (aN, aE) in m/s^2,
// dynamics p' = v, v' = a, running cost w |a|^2, fixed terminal time.
// The start state is fixed; the end position is fixed and the end velocity
// free. Zone l contributes the row r_l^2 - (pN - cN_l)^2 - (pE - cE_l)^2 <= 0
// and forms its own constraint set.

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ech/mesh.hpp"
#include "ech/ocp.hpp"
#include "ech/transcription.hpp"

namespace ech {

struct NoFlyZone {
  double north = 0.0;
  double east = 0.0;
  double radius = 1.0;
  bool operator==(const NoFlyZone&) const = default;
};

struct BenchProblemSpec {
  std::string name = "nfz5";
  double t0 = 0.0;
  double tf = 50.0;
  double start_north = 0.0;
  double start_east = 0.0;
  double start_vnorth = 0.54;
  double start_veast = 0.72;
  double goal_north = 30.0;
  double goal_east = 40.0;
  std::vector<NoFlyZone> zones;
  double position_bound = 100.0;
  double velocity_bound = 10.0;
  double accel_bound = 5.0;
  double effort_weight = 1e4;
  int initial_intervals = 16;

  bool operator==(const BenchProblemSpec&) const = default;
};

/// Five zones; the straight start-to-goal segment crosses zones 1 and 4.
BenchProblemSpec default_nfz5_spec();

/// Throws InvalidArgument when radii, horizon or endpoints are inconsistent.
void validate(const BenchProblemSpec& spec);

struct BenchProblem {
  BenchProblemSpec spec;
  std::shared_ptr<const OcpProblem> problem;
  Mesh mesh = Mesh::uniform(1);
};

BenchProblem bench_nfz5(const BenchProblemSpec& spec = default_nfz5_spec());

/// Straight-line, constant-velocity guess at the nodes of `mesh`.
NodeValues straight_line_guess(const BenchProblemSpec& spec, const Mesh& mesh);

/// Whether the closed segment a-b meets the open disc of the zone.
bool segment_intersects_zone(double an, double ae, double bn, double be, const NoFlyZone& zone);

/// Zero-based indices of the zones crossed by the start-to-goal segment.
std::vector<int> zones_on_straight_path(const BenchProblemSpec& spec);

/// Minimum effort without zones: 3 w (D - v0 T)^2 / T^3 along the line,
/// valid when the start velocity is parallel to the displacement.
double straight_line_min_effort(const BenchProblemSpec& spec);

}  // namespace ech
