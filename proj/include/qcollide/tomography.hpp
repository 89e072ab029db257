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

// Three-qubit Pauli tomography: settings, finite-shot sampling, estimation
// and linear inversion. Qubit 1 is the most significant index bit; outcome
// index bit q is set when qubit q reads "-".

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "qcollide/rng.hpp"
#include "qcollide/types.hpp"

namespace qcollide {

enum class Pauli : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

inline char pauli_char(Pauli p) { return "IXYZ"[static_cast<int>(p)]; }

inline Pauli pauli_from_char(char c) {
  switch (c) {
    case 'I': return Pauli::I;
    case 'X': return Pauli::X;
    case 'Y': return Pauli::Y;
    case 'Z': return Pauli::Z;
  }
  throw std::invalid_argument(std::string("not a Pauli label: ") + c);
}

struct MeasurementSetting {
  std::array<Pauli, 3> axes{Pauli::Z, Pauli::Z, Pauli::Z};

  MeasurementSetting() = default;
  explicit MeasurementSetting(std::array<Pauli, 3> a) : axes(a) {
    for (auto p : axes)
      if (p == Pauli::I) throw std::invalid_argument("setting axes must be X, Y or Z");
  }
  static MeasurementSetting parse(const std::string& s) {
    if (s.size() != 3) throw std::invalid_argument("setting label needs 3 letters: " + s);
    return MeasurementSetting({pauli_from_char(s[0]), pauli_from_char(s[1]), pauli_from_char(s[2])});
  }

  /// 0..26, base 3 with qubit 1 most significant.
  int index() const {
    int k = 0;
    for (auto p : axes) k = 3 * k + (static_cast<int>(p) - 1);
    return k;
  }
  static MeasurementSetting from_index(int k) {
    if (k < 0 || k >= 27) throw std::invalid_argument("setting index out of range");
    std::array<Pauli, 3> a{};
    for (int q = 2; q >= 0; --q, k /= 3) a[q] = static_cast<Pauli>(k % 3 + 1);
    return MeasurementSetting(a);
  }
  static std::vector<MeasurementSetting> all() {
    std::vector<MeasurementSetting> out;
    for (int k = 0; k < 27; ++k) out.push_back(from_index(k));
    return out;
  }
  std::string str() const { return {pauli_char(axes[0]), pauli_char(axes[1]), pauli_char(axes[2])}; }

  friend auto operator<=>(const MeasurementSetting&, const MeasurementSetting&) = default;
};

struct PauliObservable {
  std::array<Pauli, 3> factors{Pauli::Z, Pauli::I, Pauli::I};

  PauliObservable() = default;
  explicit PauliObservable(std::array<Pauli, 3> f) : factors(f) {
    if (index() == 0) throw std::invalid_argument("identity is not an observable");
  }
  static PauliObservable parse(const std::string& s) {
    if (s.size() != 3) throw std::invalid_argument("observable label needs 3 letters: " + s);
    return PauliObservable({pauli_from_char(s[0]), pauli_from_char(s[1]), pauli_from_char(s[2])});
  }

  /// 1..63, base 4 with qubit 1 most significant.
  int index() const {
    int k = 0;
    for (auto p : factors) k = 4 * k + static_cast<int>(p);
    return k;
  }
  static PauliObservable from_index(int k) {
    if (k < 1 || k >= 64) throw std::invalid_argument("observable index out of range");
    std::array<Pauli, 3> f{};
    for (int q = 2; q >= 0; --q, k /= 4) f[q] = static_cast<Pauli>(k % 4);
    return PauliObservable(f);
  }
  static std::vector<PauliObservable> all() {
    std::vector<PauliObservable> out;
    for (int k = 1; k < 64; ++k) out.push_back(from_index(k));
    return out;
  }

  bool derivable_from(const MeasurementSetting& s) const {
    for (int q = 0; q < 3; ++q)
      if (factors[q] != Pauli::I && factors[q] != s.axes[q]) return false;
    return true;
  }

  /// Sign (+1/-1) of this observable on a measured outcome index.
  int sign(int outcome) const {
    int parity = 0;
    for (int q = 0; q < 3; ++q)
      if (factors[q] != Pauli::I) parity ^= (outcome >> (2 - q)) & 1;
    return parity ? -1 : 1;
  }

  std::string str() const {
    return {pauli_char(factors[0]), pauli_char(factors[1]), pauli_char(factors[2])};
  }

  friend auto operator<=>(const PauliObservable&, const PauliObservable&) = default;
};

/// Observables derivable from a setting (7 of them).
inline std::vector<PauliObservable> derivable_observables(const MeasurementSetting& s) {
  std::vector<PauliObservable> out;
  for (int mask = 1; mask < 8; ++mask) {
    std::array<Pauli, 3> f{};
    for (int q = 0; q < 3; ++q) f[q] = (mask >> (2 - q)) & 1 ? s.axes[q] : Pauli::I;
    out.emplace_back(f);
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace detail {

inline Mat2 pauli2(Pauli p) {
  const complex i(0, 1);
  Mat2 m;
  switch (p) {
    case Pauli::I: m << 1, 0, 0, 1; break;
    case Pauli::X: m << 0, 1, 1, 0; break;
    case Pauli::Y: m << 0, -i, i, 0; break;
    case Pauli::Z: m << 1, 0, 0, -1; break;
  }
  return m;
}

// Columns: "+" then "-" eigenvector.
inline Mat2 eigenbasis2(Pauli p) {
  const double h = 1 / std::sqrt(2.0);
  const complex i(0, 1);
  Mat2 m;
  switch (p) {
    case Pauli::X: m << h, h, h, -h; break;
    case Pauli::Y: m << h, h, i * h, -i * h; break;
    case Pauli::Z: m << 1, 0, 0, 1; break;
    default: throw std::invalid_argument("no eigenbasis for identity");
  }
  return m;
}

inline Mat8 kron3(const Mat2& a, const Mat2& b, const Mat2& c) {
  Mat8 out;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j)
      out(i, j) = a(i >> 2, j >> 2) * b((i >> 1) & 1, (j >> 1) & 1) * c(i & 1, j & 1);
  return out;
}

// A three-qubit Pauli string is a signed permutation: P|j> = phase[j] |j ^ flip>.
struct PauliMonomial {
  std::uint32_t flip = 0;
  std::array<complex, 8> phase{};
};

inline const std::array<PauliMonomial, 64>& pauli_monomials() {
  static const std::array<PauliMonomial, 64> table = [] {
    std::array<PauliMonomial, 64> t{};
    for (int k = 0; k < 64; ++k) {
      const Pauli f[3] = {static_cast<Pauli>(k >> 4), static_cast<Pauli>((k >> 2) & 3),
                          static_cast<Pauli>(k & 3)};
      const Mat8 p = kron3(pauli2(f[0]), pauli2(f[1]), pauli2(f[2]));
      for (int q = 0; q < 3; ++q)
        if (f[q] == Pauli::X || f[q] == Pauli::Y) t[k].flip |= 1u << (2 - q);
      for (std::uint32_t j = 0; j < 8; ++j) t[k].phase[j] = p(j ^ t[k].flip, j);
    }
    return t;
  }();
  return table;
}

}  // namespace detail

/// Dense matrix of Pauli string k (0 = identity, 1..63 as PauliObservable::index).
inline Mat8 pauli_matrix(int k) {
  if (k < 0 || k >= 64) throw std::invalid_argument("Pauli index out of range");
  return detail::kron3(detail::pauli2(static_cast<Pauli>(k >> 4)),
                       detail::pauli2(static_cast<Pauli>((k >> 2) & 3)),
                       detail::pauli2(static_cast<Pauli>(k & 3)));
}

inline Mat8 pauli_matrix(const PauliObservable& p) { return pauli_matrix(p.index()); }

using PauliVector = Eigen::Matrix<double, 64, 1>;

/// c_k = Tr(P_k m) for all 64 strings (real part, m Hermitian).
inline PauliVector pauli_coordinates(const Mat8& m) {
  const auto& mono = detail::pauli_monomials();
  PauliVector c;
  for (int k = 0; k < 64; ++k) {
    complex s = 0;
    for (std::uint32_t j = 0; j < 8; ++j) s += mono[k].phase[j] * m(j, j ^ mono[k].flip);
    c(k) = s.real();
  }
  return c;
}

/// Inverse of pauli_coordinates: (1/8) sum_k c_k P_k.
inline Mat8 from_pauli_coordinates(const PauliVector& c) {
  const auto& mono = detail::pauli_monomials();
  Mat8 m = Mat8::Zero();
  for (int k = 0; k < 64; ++k) {
    if (c(k) == 0) continue;
    for (std::uint32_t j = 0; j < 8; ++j) m(j ^ mono[k].flip, j) += c(k) / 8 * mono[k].phase[j];
  }
  return m;
}

inline double pauli_expectation(const Mat8& rho, const PauliObservable& p) {
  return pauli_coordinates(rho)(p.index());
}

using OutcomeProbs = std::array<double, 8>;

inline Mat8 setting_basis(const MeasurementSetting& s) {
  return detail::kron3(detail::eigenbasis2(s.axes[0]), detail::eigenbasis2(s.axes[1]),
                       detail::eigenbasis2(s.axes[2]));
}

inline OutcomeProbs measurement_probs(const Mat8& rho, const MeasurementSetting& s) {
  const Mat8 v = setting_basis(s);
  const Mat8 r = v.adjoint() * rho * v;
  OutcomeProbs p{};
  double total = 0;
  for (int o = 0; o < 8; ++o) {
    p[o] = std::max(0.0, r(o, o).real());
    total += p[o];
  }
  if (!(total > 0)) throw std::invalid_argument("measurement_probs: state has no weight");
  for (auto& x : p) x /= total;
  return p;
}

struct ShotRecord {
  MeasurementSetting setting;
  long shots = 0;
  std::array<long, 8> counts{};
  std::uint64_t seed = 0;
};

/// Multinomial draw by per-shot inverse-CDF sampling.
inline ShotRecord sample_shots(const OutcomeProbs& probs, const MeasurementSetting& s, long m,
                               std::uint64_t seed) {
  if (m <= 0) throw std::invalid_argument("sample_shots needs at least one shot");
  double total = 0;
  for (double p : probs) {
    if (!(p >= 0)) throw std::invalid_argument("probabilities must be non-negative");
    total += p;
  }
  if (std::abs(total - 1) > 1e-9) throw std::invalid_argument("probabilities must sum to 1");
  std::array<double, 8> cdf{};
  std::partial_sum(probs.begin(), probs.end(), cdf.begin());
  int last = 7;
  while (last > 0 && probs[last] == 0) --last;
  ShotRecord rec{s, m, {}, seed};
  Rng rng(seed);
  for (long i = 0; i < m; ++i) {
    const double u = rng.uniform() * cdf[7];
    int o = 0;
    while (o < last && (u >= cdf[o] || probs[o] == 0)) ++o;
    ++rec.counts[o];
  }
  return rec;
}

struct ExpectationEstimate {
  double value = 0;
  long shots = 0;  // 0 for analytic (infinite-shot) estimates
  long plus = 0;   // shots with sign +1
};

using EstimateTable = std::map<PauliObservable, ExpectationEstimate>;

/// Shot-weighted pooling over records covering the same observable.
inline EstimateTable estimate_expectations(std::span<const ShotRecord> records) {
  EstimateTable out;
  for (const auto& rec : records) {
    long sum = 0;
    for (long c : rec.counts) sum += c;
    if (sum != rec.shots || rec.shots <= 0)
      throw std::invalid_argument("shot record counts do not sum to shots");
    for (const auto& obs : derivable_observables(rec.setting)) {
      long plus = 0;
      for (int o = 0; o < 8; ++o)
        if (obs.sign(o) > 0) plus += rec.counts[o];
      auto& e = out[obs];
      e.shots += rec.shots;
      e.plus += plus;
    }
  }
  for (auto& [obs, e] : out) e.value = static_cast<double>(2 * e.plus - e.shots) / e.shots;
  return out;
}

inline EstimateTable estimate_expectations(const ShotRecord& record) {
  return estimate_expectations(std::span<const ShotRecord>(&record, 1));
}

/// Infinite-shot estimates from analytic outcome probabilities.
inline EstimateTable exact_expectations(const Mat8& rho,
                                        std::span<const MeasurementSetting> settings) {
  EstimateTable out;
  for (const auto& s : settings) {
    const OutcomeProbs p = measurement_probs(rho, s);
    for (const auto& obs : derivable_observables(s)) {
      if (out.count(obs)) continue;
      double v = 0;
      for (int o = 0; o < 8; ++o) v += obs.sign(o) * p[o];
      out[obs] = {v, 0, 0};
    }
  }
  return out;
}

struct ReconstructionDiagnostics {
  int iterations = 0;
  double primal_residual = 0;
  double dual_residual = 0;
  bool converged = true;
  bool possibly_non_unique = false;
  double objective = 0;       // trace norm of the result
  double min_eigenvalue = 0;  // negative means the result is not PSD
};

struct ReconstructionResult {
  Mat8 matrix = Mat8::Identity() / 8;
  std::string method;
  std::vector<MeasurementSetting> settings;
  long shots_per_setting = 0;
  ReconstructionDiagnostics diagnostics;
};

inline double min_eigenvalue(const Mat8& m) {
  Eigen::SelfAdjointEigenSolver<Mat8> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

inline double trace_norm8(const Mat8& m) {
  Eigen::SelfAdjointEigenSolver<Mat8> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

/// rho = (1/8)[I + sum_k e_k P_k]; missing observables count as 0 under zero_fill.
inline ReconstructionResult linear_inversion(const EstimateTable& estimates, bool zero_fill) {
  if (!zero_fill && estimates.size() < 63) throw std::invalid_argument("incomplete Pauli data");
  PauliVector c = PauliVector::Zero();
  c(0) = 1;
  for (const auto& [obs, e] : estimates) c(obs.index()) = e.value;
  ReconstructionResult r;
  r.matrix = from_pauli_coordinates(c);
  r.matrix = 0.5 * (r.matrix + r.matrix.adjoint()).eval();
  r.method = zero_fill ? "qst_zero_fill" : "qst";
  r.diagnostics.min_eigenvalue = min_eigenvalue(r.matrix);
  r.diagnostics.objective = trace_norm8(r.matrix);
  return r;
}

/// k settings drawn uniformly without replacement (partial Fisher-Yates).
inline std::vector<MeasurementSetting> choose_settings(int k, std::uint64_t seed) {
  if (k < 1 || k > 27) throw std::invalid_argument("settings count must lie in [1, 27]");
  std::array<int, 27> idx;
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  for (int i = 0; i < k; ++i) {
    const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(27 - i)));
    std::swap(idx[i], idx[j]);
  }
  std::vector<MeasurementSetting> out;
  for (int i = 0; i < k; ++i) out.push_back(MeasurementSetting::from_index(idx[i]));
  return out;
}

/// Splits a total shot budget uniformly; the first (total mod k) settings get one extra.
inline std::vector<long> allocate_shots(long total, std::size_t k) {
  if (k == 0) throw std::invalid_argument("no settings to allocate shots to");
  if (total < static_cast<long>(k))
    throw std::invalid_argument("shot budget smaller than settings count");
  std::vector<long> out(k, total / static_cast<long>(k));
  for (std::size_t i = 0; i < static_cast<std::size_t>(total % static_cast<long>(k)); ++i) ++out[i];
  return out;
}

/// Samples every setting with seeds derived from `seed` and the setting position.
inline std::vector<ShotRecord> sample_settings(const Mat8& rho,
                                               std::span<const MeasurementSetting> settings,
                                               std::span<const long> shots, std::uint64_t seed) {
  if (settings.size() != shots.size())
    throw std::invalid_argument("one shot count per setting required");
  std::vector<ShotRecord> out;
  for (std::size_t i = 0; i < settings.size(); ++i)
    out.push_back(sample_shots(measurement_probs(rho, settings[i]), settings[i], shots[i],
                               derive_seed(seed, {static_cast<std::uint64_t>(i)})));
  return out;
}

}  // namespace qcollide
