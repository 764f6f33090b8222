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

#include "ech/mesh.hpp"

#include <cmath>
#include <utility>

#include "ech/errors.hpp"

namespace ech {

Mesh::Mesh(std::vector<double> boundaries) : boundaries_(std::move(boundaries)) {
  if (boundaries_.size() < 2) throw InvalidArgument("mesh needs at least one interval");
  if (boundaries_.front() != 0.0 || boundaries_.back() != 1.0) {
    throw InvalidArgument("mesh boundaries must start at 0 and end at 1");
  }
  for (std::size_t k = 0; k + 1 < boundaries_.size(); ++k) {
    if (!(boundaries_[k] < boundaries_[k + 1])) {
      throw InvalidArgument("mesh boundaries must be strictly increasing");
    }
  }
}

Mesh Mesh::uniform(int intervals) {
  if (intervals < 1) throw InvalidArgument("mesh needs at least one interval");
  std::vector<double> b(intervals + 1);
  for (int k = 0; k <= intervals; ++k) b[k] = static_cast<double>(k) / intervals;
  b.back() = 1.0;
  return Mesh(std::move(b));
}

double Mesh::node_tau(int node) const {
  const int k = node / 2;
  if (node % 2 == 0) return boundaries_[k];
  return 0.5 * (boundaries_[k] + boundaries_[k + 1]);
}

int Mesh::interval_of_node(int node) const {
  const int k = node / 2;
  return k == num_intervals() ? k - 1 : k;
}

}  // namespace ech
