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

#include "ech/nlp.hpp"

#include <limits>
#include <vector>

namespace ech {

namespace {

// Keeps explicit zeros so that the pattern is fixed.
SpMat dense_to_sparse(const Mat& dense, bool lower_only) {
  std::vector<Eigen::Triplet<double>> trips;
  for (int c = 0; c < dense.cols(); ++c) {
    for (int r = lower_only ? c : 0; r < dense.rows(); ++r) trips.emplace_back(r, c, dense(r, c));
  }
  SpMat out(dense.rows(), dense.cols());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

}  // namespace

Vec DenseNlp::lower_bounds() const {
  return lower.size() ? lower
                      : Vec::Constant(variables, -std::numeric_limits<double>::infinity());
}

Vec DenseNlp::upper_bounds() const {
  return upper.size() ? upper
                      : Vec::Constant(variables, std::numeric_limits<double>::infinity());
}

Vec DenseNlp::equalities(const Vec& z) const { return equality_count ? h(z) : Vec(0); }

Vec DenseNlp::inequalities(const Vec& z) const { return inequality_count ? g(z) : Vec(0); }

SpMat DenseNlp::equality_jacobian(const Vec& z) const {
  return equality_count ? dense_to_sparse(h_jac(z), false) : SpMat(0, variables);
}

SpMat DenseNlp::inequality_jacobian(const Vec& z) const {
  return inequality_count ? dense_to_sparse(g_jac(z), false) : SpMat(0, variables);
}

SpMat DenseNlp::lagrangian_hessian(const Vec& z, double obj_factor, const Vec& eq_mult,
                                   const Vec& ineq_mult) const {
  return dense_to_sparse(hess(z, obj_factor, eq_mult, ineq_mult), true);
}

}  // namespace ech
