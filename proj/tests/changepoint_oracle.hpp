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

// Exact penalized segmentation used as a test oracle.

#pragma once

#include <limits>
#include <vector>

namespace oracle {

inline double sse(const std::vector<double>& v, int b, int e) {
  double mean = 0.0;
  for (int i = b; i < e; ++i) mean += v[i];
  mean /= (e - b);
  double s = 0.0;
  for (int i = b; i < e; ++i) s += (v[i] - mean) * (v[i] - mean);
  return s;
}

// Optimal partitioning by dynamic programming: F(e) = min_b F(b) + sse(b, e) + penalty.
inline double optimal_cost(const std::vector<double>& v, double penalty) {
  const int n = static_cast<int>(v.size());
  std::vector<double> f(n + 1, std::numeric_limits<double>::infinity());
  f[0] = -penalty;
  for (int e = 1; e <= n; ++e)
    for (int b = 0; b < e; ++b) f[e] = std::min(f[e], f[b] + sse(v, b, e) + penalty);
  return f[n];
}

// Brute force over every subset of split positions.
inline double brute_force_cost(const std::vector<double>& v, double penalty) {
  const int n = static_cast<int>(v.size());
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << (n - 1)); ++mask) {
    double cost = 0.0;
    int b = 0, count = 0;
    for (int p = 1; p < n; ++p) {
      if (mask & (1u << (p - 1))) {
        cost += sse(v, b, p);
        b = p;
        ++count;
      }
    }
    cost += sse(v, b, n) + penalty * count;
    best = std::min(best, cost);
  }
  return best;
}

// Best single split position of a sequence and its SSE.
inline int best_single_split(const std::vector<double>& v) {
  const int n = static_cast<int>(v.size());
  int best = -1;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int p = 1; p < n; ++p) {
    const double c = sse(v, 0, p) + sse(v, p, n);
    if (c < best_cost) best_cost = c, best = p;
  }
  return best;
}

}  // namespace oracle
