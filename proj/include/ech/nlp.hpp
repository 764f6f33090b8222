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

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <functional>

namespace ech {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;

/// Smooth nonlinear program
///
///   min f(z)  s.t.  h(z) = 0,  g(z) <= 0,  lower <= z <= upper.
///
/// Infinite bounds are encoded as +-infinity.
class Nlp {
 public:
  virtual ~Nlp() = default;

  virtual int num_variables() const = 0;
  virtual int num_equalities() const = 0;
  virtual int num_inequalities() const = 0;
  virtual Vec lower_bounds() const = 0;
  virtual Vec upper_bounds() const = 0;

  virtual double objective(const Vec& z) const = 0;
  virtual Vec objective_gradient(const Vec& z) const = 0;
  virtual Vec equalities(const Vec& z) const = 0;
  virtual Vec inequalities(const Vec& z) const = 0;
  virtual SpMat equality_jacobian(const Vec& z) const = 0;
  virtual SpMat inequality_jacobian(const Vec& z) const = 0;

  /// Lower triangle (diagonal included) of
  /// obj_factor * Hess f + sum_i eq_i * Hess h_i + sum_j ineq_j * Hess g_j.
  /// The sparsity pattern must not depend on z or the multipliers.
  virtual SpMat lagrangian_hessian(const Vec& z, double obj_factor, const Vec& eq_mult,
                                   const Vec& ineq_mult) const = 0;
};

/// Small NLP described by dense callbacks. Mostly useful for tests and toy problems.
class DenseNlp : public Nlp {
 public:
  int variables = 0;
  int equality_count = 0;
  int inequality_count = 0;
  Vec lower;
  Vec upper;
  std::function<double(const Vec&)> f;
  std::function<Vec(const Vec&)> grad;
  std::function<Vec(const Vec&)> h;
  std::function<Mat(const Vec&)> h_jac;
  std::function<Vec(const Vec&)> g;
  std::function<Mat(const Vec&)> g_jac;
  /// Full symmetric Hessian of the Lagrangian.
  std::function<Mat(const Vec&, double, const Vec&, const Vec&)> hess;

  int num_variables() const override { return variables; }
  int num_equalities() const override { return equality_count; }
  int num_inequalities() const override { return inequality_count; }
  Vec lower_bounds() const override;
  Vec upper_bounds() const override;
  double objective(const Vec& z) const override { return f(z); }
  Vec objective_gradient(const Vec& z) const override { return grad(z); }
  Vec equalities(const Vec& z) const override;
  Vec inequalities(const Vec& z) const override;
  SpMat equality_jacobian(const Vec& z) const override;
  SpMat inequality_jacobian(const Vec& z) const override;
  SpMat lagrangian_hessian(const Vec& z, double obj_factor, const Vec& eq_mult,
                           const Vec& ineq_mult) const override;
};

}  // namespace ech
