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

// Second, independent trace-norm minimizer used as an optimality oracle.

#pragma once

#include <cmath>

#include "qcollide/cs.hpp"

namespace qcollide::testing {

inline Mat8 psd_part(const Mat8& m) {
  Eigen::SelfAdjointEigenSolver<Mat8> es(0.5 * (m + m.adjoint()));
  const Eigen::Matrix<double, 8, 1> l = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * l.asDiagonal() * es.eigenvectors().adjoint();
}

/// Reference solver: min Tr P + Tr N over P, N >= 0 with P - N in the box set,
/// by Douglas-Rachford splitting in (P, N). Reports the trace norm of the
/// feasible point D = proj_C(P - N) at the fixed point.
inline double reference_min_trace_norm(const ConstraintSet& c, int iterations = 100000) {
  const double t = 0.1;
  Mat8 yp = Mat8::Identity() / 8, yn = Mat8::Zero();
  Mat8 d = Mat8::Identity() / 8;
  for (int it = 0; it < iterations; ++it) {
    // prox of t*(Tr + PSD indicator) for each block
    const Mat8 p = psd_part(yp - t * Mat8::Identity());
    const Mat8 n = psd_part(yn - t * Mat8::Identity());
    // projection of the reflection onto {P - N in C}: S fixed, D clamped
    const Mat8 rp = 2 * p - yp, rn = 2 * n - yn;
    const Mat8 s = rp + rn;
    d = from_pauli_coordinates(c.project(pauli_coordinates(rp - rn)));
    const Mat8 dp = 0.5 * (s + d) - p, dn = 0.5 * (s - d) - n;
    yp += dp;
    yn += dn;
    if (std::sqrt(dp.squaredNorm() + dn.squaredNorm()) < 1e-10) break;
  }
  Eigen::SelfAdjointEigenSolver<Mat8> es(0.5 * (d + d.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

}  // namespace qcollide::testing
