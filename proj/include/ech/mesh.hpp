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

#pragma once

#include <vector>

namespace ech {

/// Hermite-Simpson collocation grid on normalized time tau in [0, 1].
///
/// Interval k spans [b_k, b_{k+1}] and contributes the nodes 2k (left),
/// 2k+1 (midpoint) and 2k+2 (right, shared with interval k+1), so a mesh of
/// K intervals has 2K+1 nodes.
class Mesh {
 public:
  /// Throws InvalidArgument unless boundaries are strictly increasing from 0 to 1.
  explicit Mesh(std::vector<double> boundaries);

  static Mesh uniform(int intervals);

  int num_intervals() const { return static_cast<int>(boundaries_.size()) - 1; }
  int num_nodes() const { return 2 * num_intervals() + 1; }
  const std::vector<double>& boundaries() const { return boundaries_; }
  double interval_width(int k) const { return boundaries_[k + 1] - boundaries_[k]; }
  double node_tau(int node) const;
  /// Interval that owns a node; shared boundary nodes belong to the interval on their right
  /// except for the final node.
  int interval_of_node(int node) const;

  bool operator==(const Mesh& other) const = default;

 private:
  std::vector<double> boundaries_;
};

}  // namespace ech
