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

// Information measures on few-qubit density matrices. Qubits are numbered
// from 1, qubit 1 being the most significant bit of the matrix index.
// Logarithms are base 2 throughout.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "qcollide/types.hpp"

namespace qcollide {

namespace detail {

inline int qubit_count(Eigen::Index dim) {
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  if ((Eigen::Index{1} << n) != dim)
    throw std::invalid_argument("matrix dimension is not a power of two");
  return n;
}

inline std::uint32_t qubit_mask(std::span<const int> qubits, int n) {
  std::uint32_t mask = 0;
  for (int q : qubits) {
    if (q < 1 || q > n) throw std::invalid_argument("qubit index out of range");
    mask |= 1u << (n - q);
  }
  return mask;
}

// Gathers the bits of x selected by mask into a compact integer.
inline std::uint32_t compress(std::uint32_t x, std::uint32_t mask) {
  std::uint32_t out = 0;
  int k = 0;
  for (int b = 0; b < 32; ++b) {
    if (mask & (1u << b)) {
      if (x & (1u << b)) out |= 1u << k;
      ++k;
    }
  }
  return out;
}

}  // namespace detail

inline Eigen::VectorXd hermitian_eigenvalues(const MatX& m) {
  Eigen::SelfAdjointEigenSolver<MatX> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

/// Reduced state on `keep` (1-based qubit indices, any order; the output
/// keeps the original significance order).
inline MatX partial_trace_keep(const MatX& rho, std::span<const int> keep) {
  const int n = detail::qubit_count(rho.rows());
  const std::uint32_t km = detail::qubit_mask(keep, n);
  const std::uint32_t tm = ((1u << n) - 1) & ~km;
  const int nk = std::popcount(km);
  MatX out = MatX::Zero(Eigen::Index{1} << nk, Eigen::Index{1} << nk);
  const std::uint32_t dim = 1u << n;
  for (std::uint32_t i = 0; i < dim; ++i)
    for (std::uint32_t j = 0; j < dim; ++j)
      if ((i & tm) == (j & tm))
        out(detail::compress(i, km), detail::compress(j, km)) += rho(i, j);
  return out;
}

inline MatX partial_trace_keep(const MatX& rho, std::initializer_list<int> keep) {
  return partial_trace_keep(rho, std::span<const int>(keep.begin(), keep.size()));
}

/// Von Neumann entropy in bits.
inline double von_neumann_entropy(const MatX& rho) {
  if (std::abs(rho.trace().real() - 1.0) > 1e-6)
    throw std::invalid_argument("entropy needs a unit-trace state");
  const Eigen::VectorXd ev = hermitian_eigenvalues(rho);
  double s = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    double l = ev(i);
    if (l < -kPsdTol) throw std::invalid_argument("state has a negative eigenvalue");
    if (l > 0) s -= l * std::log2(l);
  }
  return std::max(0.0, s);
}

/// Bipartitions of three qubits with Q1 on one side.
enum class Partition { q1_q2, q1_q3, q1_q23 };

inline std::vector<int> partner_qubits(Partition p) {
  switch (p) {
    case Partition::q1_q2: return {2};
    case Partition::q1_q3: return {3};
    case Partition::q1_q23: return {2, 3};
  }
  throw std::invalid_argument("invalid partition");
}

inline void require_three_qubits(const MatX& rho) {
  if (rho.rows() != 8 || rho.cols() != 8)
    throw std::invalid_argument("expected a three-qubit (8x8) state");
}

/// I2(Q1 : X) = S(1) + S(X) - S(1X).
inline double bmi(const MatX& rho123, Partition p) {
  require_three_qubits(rho123);
  std::vector<int> x = partner_qubits(p);
  std::vector<int> one_x = x;
  one_x.insert(one_x.begin(), 1);
  return von_neumann_entropy(partial_trace_keep(rho123, {1})) +
         von_neumann_entropy(partial_trace_keep(rho123, x)) -
         von_neumann_entropy(partial_trace_keep(rho123, one_x));
}

/// I3 = I2(1:2) + I2(1:3) - I2(1:23).
inline double tmi(const MatX& rho123) {
  require_three_qubits(rho123);
  const double s1 = von_neumann_entropy(partial_trace_keep(rho123, {1}));
  const double s2 = von_neumann_entropy(partial_trace_keep(rho123, {2}));
  const double s3 = von_neumann_entropy(partial_trace_keep(rho123, {3}));
  const double s12 = von_neumann_entropy(partial_trace_keep(rho123, {1, 2}));
  const double s13 = von_neumann_entropy(partial_trace_keep(rho123, {1, 3}));
  const double s23 = von_neumann_entropy(partial_trace_keep(rho123, {2, 3}));
  const double s123 = von_neumann_entropy(rho123);
  return (s1 + s2 - s12) + (s1 + s3 - s13) - (s1 + s23 - s123);
}

/// Transposes the indices of `subsystem` (1-based qubits).
inline MatX partial_transpose(const MatX& rho, std::span<const int> subsystem) {
  const int n = detail::qubit_count(rho.rows());
  const std::uint32_t m = detail::qubit_mask(subsystem, n);
  const std::uint32_t dim = 1u << n;
  MatX out(dim, dim);
  for (std::uint32_t i = 0; i < dim; ++i)
    for (std::uint32_t j = 0; j < dim; ++j) {
      const std::uint32_t ii = (i & ~m) | (j & m);
      const std::uint32_t jj = (j & ~m) | (i & m);
      out(ii, jj) = rho(i, j);
    }
  return out;
}

inline MatX partial_transpose(const MatX& rho, std::initializer_list<int> subsystem) {
  return partial_transpose(rho, std::span<const int>(subsystem.begin(), subsystem.size()));
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
inline double trace_norm(const MatX& m) {
  if (!is_hermitian(m, kPropagationTol))
    throw std::invalid_argument("trace_norm expects a Hermitian matrix");
  return hermitian_eigenvalues(0.5 * (m + m.adjoint())).cwiseAbs().sum();
}

/// N2(Q1 : X) = log2 || rho_1X^{T_X} ||_1.
inline double bln(const MatX& rho123, Partition p) {
  require_three_qubits(rho123);
  std::vector<int> x = partner_qubits(p);
  std::vector<int> one_x = x;
  one_x.insert(one_x.begin(), 1);
  const MatX r = partial_trace_keep(rho123, one_x);
  // inside the reduced matrix X occupies positions 2.. (order preserved)
  std::vector<int> local;
  for (std::size_t i = 0; i < x.size(); ++i) local.push_back(static_cast<int>(i) + 2);
  return std::log2(trace_norm(partial_transpose(r, local)));
}

/// N3 = N2(1:2) + N2(1:3) - N2(1:23).
inline double tln(const MatX& rho123) {
  return bln(rho123, Partition::q1_q2) + bln(rho123, Partition::q1_q3) -
         bln(rho123, Partition::q1_q23);
}

/// D = 1/2 || rho - sigma ||_1, clamped to [0, 1].
inline double trace_distance(const MatX& rho, const MatX& sigma) {
  if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols())
    throw std::invalid_argument("trace_distance: dimension mismatch");
  return std::clamp(0.5 * trace_norm(rho - sigma), 0.0, 1.0);
}

/// Running sum of increases of a distance series.
class NonMarkovianity {
 public:
  void push(double d) {
    if (last_ && d > *last_) total_ += d - *last_;
    last_ = d;
  }
  double value() const { return total_; }

 private:
  std::optional<double> last_;
  double total_ = 0;
};

inline double nonmarkovianity(std::span<const double> series) {
  if (series.empty()) throw std::invalid_argument("nonmarkovianity needs a non-empty series");
  NonMarkovianity acc;
  for (double d : series) acc.push(d);
  return acc.value();
}

struct MeasureReport {
  int step = 0;
  double tmi = 0;
  double tln = 0;
  double bmi_12 = 0;
  double bmi_13 = 0;
  double bmi_1_23 = 0;
  std::optional<double> trace_distance;
  double success_probability = 1;
};

inline MeasureReport measure(int step, const MatX& rho123, double success_probability,
                             const MatX* sigma123 = nullptr) {
  MeasureReport r;
  r.step = step;
  r.bmi_12 = bmi(rho123, Partition::q1_q2);
  r.bmi_13 = bmi(rho123, Partition::q1_q3);
  r.bmi_1_23 = bmi(rho123, Partition::q1_q23);
  r.tmi = r.bmi_12 + r.bmi_13 - r.bmi_1_23;
  r.tln = tln(rho123);
  if (sigma123) r.trace_distance = trace_distance(rho123, *sigma123);
  r.success_probability = success_probability;
  return r;
}

struct DistanceSeries {
  std::vector<double> values;
  std::vector<double> nonmarkovianity;  // running value after each step

  void push(double d) {
    acc_.push(d);
    values.push_back(d);
    nonmarkovianity.push_back(acc_.value());
  }

 private:
  NonMarkovianity acc_;
};

}  // namespace qcollide
