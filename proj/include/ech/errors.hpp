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

#include <stdexcept>
#include <string>

namespace ech {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument shapes do not match the problem they are used with.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A user function produced (or was handed) a non-finite value.
class EvaluationError : public Error {
 public:
  EvaluationError(const std::string& what, int index)
      : Error(what + " (index " + std::to_string(index) + ")"), index_(index) {}
  int index() const { return index_; }

 private:
  int index_;
};

/// Invalid mesh, filter, configuration or problem definition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Mesh refinement exceeded its interval budget.
class RefinementOverflow : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ech
