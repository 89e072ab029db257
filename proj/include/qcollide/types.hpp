// Copyright 2026 The qcollide Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qcollide {

using complex = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Mat8 = Eigen::Matrix<complex, 8, 8>;
using MatX = Eigen::MatrixXcd;

// Tolerance ladder: representation invariants vs. propagated computations.
inline constexpr double kRepresentationTol = 1e-10;
inline constexpr double kPropagationTol = 1e-9;
inline constexpr double kUnitaryTol = 1e-12;
// Eigenvalues in [-kPsdTol, 0) are treated as round-off.
inline constexpr double kPsdTol = 1e-9;

/// A requested mode is not (or no longer) part of the active register.
class ModeError : public std::invalid_argument {
 public:
  explicit ModeError(const std::string& what) : std::invalid_argument(what) {}
};

/// Conditioning on one photon per rail pair left (numerically) nothing.
class PostSelectionExhausted : public std::runtime_error {
 public:
  explicit PostSelectionExhausted(const std::string& what, int step = -1)
      : std::runtime_error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

/// Constraint set of a trace-norm problem is empty.
class InfeasibleConstraints : public std::runtime_error {
 public:
  explicit InfeasibleConstraints(const std::string& what)
      : std::runtime_error(what) {}
};

template <class Derived>
bool is_unitary(const Eigen::MatrixBase<Derived>& u, double tol = kUnitaryTol) {
  if (u.rows() != u.cols()) return false;
  const auto n = u.rows();
  return ((u.adjoint() * u) - MatX::Identity(n, n)).cwiseAbs().maxCoeff() <=
         tol;
}

template <class Derived>
bool is_hermitian(const Eigen::MatrixBase<Derived>& m, double tol) {
  if (m.rows() != m.cols()) return false;
  if (m.size() == 0) return true;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace qcollide
