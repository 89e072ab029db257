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

// Trace-norm minimization over Hermitian 8x8 matrices with constraints on
// Pauli coordinates, Jeffreys confidence boxes, and the TMI-MSE benchmark.

#pragma once

#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "qcollide/measures.hpp"
#include "qcollide/tomography.hpp"

namespace qcollide {

/// Central Jeffreys interval for a binomial proportion.
inline std::pair<double, double> jeffreys_interval(long x, long m, double alpha) {
  if (m < 1) throw std::invalid_argument("jeffreys_interval needs m >= 1");
  if (x < 0 || x > m) throw std::invalid_argument("jeffreys_interval needs 0 <= x <= m");
  if (!(alpha > 0 && alpha < 1)) throw std::invalid_argument("alpha must lie in (0, 1)");
  const double a = static_cast<double>(x) + 0.5;
  const double b = static_cast<double>(m - x) + 0.5;
  const double low = x == 0 ? 0.0 : boost::math::ibeta_inv(a, b, alpha / 2);
  const double high = x == m ? 1.0 : boost::math::ibeta_inv(a, b, 1 - alpha / 2);
  return {low, high};
}

struct CIBound {
  PauliObservable observable;
  double low = -1;
  double high = 1;
  long shots = 0;
  double alpha = 1.0 / 3;
  double estimate = 0;
};

/// Jeffreys box on e = 2p - 1, p the fraction of +1 outcomes.
inline CIBound expectation_interval(const PauliObservable& obs, const ExpectationEstimate& e,
                                    double alpha) {
  if (e.shots <= 0) throw std::invalid_argument("expectation_interval needs sampled shots");
  const auto [lo, hi] = jeffreys_interval(e.plus, e.shots, alpha);
  return {obs, 2 * lo - 1, 2 * hi - 1, e.shots, alpha, e.value};
}

inline std::vector<CIBound> expectation_intervals(const EstimateTable& table, double alpha) {
  std::vector<CIBound> out;
  for (const auto& [obs, e] : table) out.push_back(expectation_interval(obs, e, alpha));
  return out;
}

struct SolverConfig {
  int max_iterations = 5000;
  double tolerance = 1e-6;
  double penalty = 1.0;
  double alpha = 1.0 / 3;
  // Residual balancing: every 10 iterations the penalty is doubled or
  // halved when one residual exceeds the other tenfold.
  bool adaptive_penalty = true;

  void validate() const {
    if (max_iterations < 1) throw std::invalid_argument("max-iterations must be positive");
    if (!(tolerance > 0)) throw std::invalid_argument("tolerance must be positive");
    if (!(penalty > 0)) throw std::invalid_argument("penalty must be positive");
    if (!(alpha > 0 && alpha < 1)) throw std::invalid_argument("alpha must lie in (0, 1)");
  }
};

struct CoordinateBox {
  double low = 0;
  double high = 0;
};

/// Box constraints on Pauli coordinates c_k = Tr(P_k sigma); c_0 = 1 always.
class ConstraintSet {
 public:
  ConstraintSet() { boxes_[0] = CoordinateBox{1, 1}; }

  void add_equality(const PauliObservable& obs, double value) { add_interval(obs, value, value); }

  void add_interval(const PauliObservable& obs, double low, double high) {
    if (!(low <= high)) throw std::invalid_argument("interval with low > high");
    auto& b = boxes_[obs.index()];
    if (b) {
      b->low = std::max(b->low, low);
      b->high = std::min(b->high, high);
    } else {
      b = CoordinateBox{low, high};
    }
  }

  void add_interval(const CIBound& ci) { add_interval(ci.observable, ci.low, ci.high); }

  static ConstraintSet from_estimates(const EstimateTable& table) {
    ConstraintSet c;
    for (const auto& [obs, e] : table) c.add_equality(obs, e.value);
    return c;
  }

  static ConstraintSet from_intervals(std::span<const CIBound> bounds) {
    ConstraintSet c;
    for (const auto& b : bounds) c.add_interval(b);
    return c;
  }

  const std::array<std::optional<CoordinateBox>, 64>& boxes() const { return boxes_; }

  bool feasible() const {
    for (const auto& b : boxes_)
      if (b && b->low > b->high) return false;
    return true;
  }

  bool fully_determined() const {
    for (const auto& b : boxes_)
      if (!b || b->low != b->high) return false;
    return true;
  }

  PauliVector project(PauliVector c) const {
    for (int k = 0; k < 64; ++k)
      if (boxes_[k]) c(k) = std::clamp(c(k), boxes_[k]->low, boxes_[k]->high);
    return c;
  }

  /// Largest violation of any box by coordinates c.
  double violation(const PauliVector& c) const {
    double v = 0;
    for (int k = 0; k < 64; ++k)
      if (boxes_[k]) v = std::max({v, boxes_[k]->low - c(k), c(k) - boxes_[k]->high});
    return v;
  }

 private:
  std::array<std::optional<CoordinateBox>, 64> boxes_{};
};

namespace detail {

inline Mat8 soft_threshold_eigen(const Mat8& m, double tau) {
  Eigen::SelfAdjointEigenSolver<Mat8> es(0.5 * (m + m.adjoint()));
  Eigen::Matrix<double, 8, 1> l = es.eigenvalues();
  for (int i = 0; i < 8; ++i) l(i) = std::copysign(std::max(std::abs(l(i)) - tau, 0.0), l(i));
  return es.eigenvectors() * l.asDiagonal() * es.eigenvectors().adjoint();
}

inline Mat8 project_constraints(const ConstraintSet& c, const Mat8& m) {
  return from_pauli_coordinates(c.project(pauli_coordinates(m)));
}

}  // namespace detail

/// ADMM on min ||X||_Tr + indicator_C(Z) s.t. X = Z (scaled dual U).
/// Returns the feasible iterate Z.
inline ReconstructionResult solve_trace_norm_min(const ConstraintSet& constraints,
                                                 const SolverConfig& cfg = {}) {
  cfg.validate();
  if (!constraints.feasible()) throw InfeasibleConstraints("infeasible");
  double rho = cfg.penalty;
  Mat8 z = detail::project_constraints(constraints, Mat8::Identity() / 8);
  Mat8 u = Mat8::Zero();
  ReconstructionResult res;
  res.method = "cs";
  auto& d = res.diagnostics;
  d.converged = false;
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    const Mat8 x = detail::soft_threshold_eigen(z - u, 1.0 / rho);
    const Mat8 z_old = z;
    z = detail::project_constraints(constraints, x + u);
    u += x - z;
    d.iterations = it;
    d.primal_residual = (x - z).norm();
    d.dual_residual = rho * (z - z_old).norm();
    if (d.primal_residual < cfg.tolerance && d.dual_residual < cfg.tolerance) {
      d.converged = true;
      break;
    }
    if (cfg.adaptive_penalty && it % 10 == 0) {
      if (d.primal_residual > 10 * d.dual_residual) {
        rho *= 2;
        u /= 2;
      } else if (d.dual_residual > 10 * d.primal_residual) {
        rho /= 2;
        u *= 2;
      }
    }
  }
  res.matrix = 0.5 * (z + z.adjoint());
  d.possibly_non_unique = !constraints.fully_determined();
  d.objective = trace_norm8(res.matrix);
  d.min_eigenvalue = min_eigenvalue(res.matrix);
  return res;
}

/// Clips negative eigenvalues and renormalizes to unit trace.
inline Mat8 psd_project(const Mat8& m) {
  if (!is_hermitian(m, kPsdTol)) throw std::invalid_argument("psd_project expects a Hermitian matrix");
  Eigen::SelfAdjointEigenSolver<Mat8> es(0.5 * (m + m.adjoint()));
  Eigen::Matrix<double, 8, 1> l = es.eigenvalues().cwiseMax(0.0);
  const double s = l.sum();
  if (!(s > 0)) throw std::invalid_argument("psd_project: no positive eigenvalue");
  l /= s;
  Mat8 out = es.eigenvectors() * l.asDiagonal() * es.eigenvectors().adjoint();
  return 0.5 * (out + out.adjoint());
}

inline double tmi_from_reconstruction(const ReconstructionResult& r) {
  return tmi(MatX(psd_project(r.matrix)));
}

// ---------------------------------------------------------------------------
// Benchmark

struct EstimateOutcome {
  double tmi = 0;
  bool converged = true;
};

struct BenchmarkTask {
  double grid_value = 0;
  std::uint64_t seed = 0;           // shot sampling
  std::uint64_t settings_seed = 0;  // random choice of settings
};

/// Estimates the TMI of `rho` for one task. Every method sees the same
/// tasks, hence the same settings and shot data.
using TmiEstimator = std::function<EstimateOutcome(const Mat8& rho, const BenchmarkTask& task)>;

struct BenchmarkMethod {
  std::string name;
  TmiEstimator estimate;
};

struct BenchmarkRow {
  std::string method;
  double grid_value = 0;
  double mse = 0;
  double std = 0;  // sample standard deviation of squared errors
  int n_states = 0;
  std::uint64_t seed = 0;
  int nonconverged = 0;
};

struct BenchmarkReport {
  std::vector<BenchmarkRow> rows;

  const BenchmarkRow& find(const std::string& method, double grid_value) const {
    for (const auto& r : rows)
      if (r.method == method && r.grid_value == grid_value) return r;
    throw std::out_of_range("no benchmark row for " + method);
  }

  int nonconverged() const {
    int n = 0;
    for (const auto& r : rows) n += r.nonconverged;
    return n;
  }
};

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string benchmark_csv(const BenchmarkReport& rep) {
  std::string out = "method,grid_value,mse,std,n_states,seed\n";
  for (const auto& r : rep.rows)
    out += r.method + "," + format_double(r.grid_value) + "," + format_double(r.mse) + "," +
           format_double(r.std) + "," + std::to_string(r.n_states) + "," + std::to_string(r.seed) +
           "\n";
  return out;
}

/// Task for (grid index, state index). With resample_settings = false the
/// settings depend on the grid point only.
inline BenchmarkTask benchmark_task(std::uint64_t base, std::size_t grid_index, double grid_value,
                                    std::size_t state_index, bool resample_settings) {
  BenchmarkTask t;
  t.grid_value = grid_value;
  t.seed = derive_seed(base, {grid_index, state_index, 1});
  t.settings_seed = resample_settings ? derive_seed(base, {grid_index, state_index, 0})
                                      : derive_seed(base, {grid_index});
  return t;
}

/// Runs f(i) for i in [0, n) on up to `threads` workers.
inline void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& f) {
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), std::max<std::size_t>(n, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

inline BenchmarkReport benchmark_mse(std::span<const Mat8> states,
                                     std::span<const BenchmarkMethod> methods,
                                     std::span<const double> grid, std::uint64_t seed,
                                     int threads = 1, bool resample_settings = true) {
  if (states.empty()) throw std::invalid_argument("benchmark needs at least one state");
  std::vector<double> truth(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) truth[i] = tmi(MatX(states[i]));
  BenchmarkReport rep;
  for (const auto& method : methods) {
    for (std::size_t g = 0; g < grid.size(); ++g) {
      std::vector<EstimateOutcome> est(states.size());
      parallel_for(states.size(), threads, [&](std::size_t i) {
        est[i] = method.estimate(states[i], benchmark_task(seed, g, grid[g], i, resample_settings));
      });
      BenchmarkRow row{method.name, grid[g], 0, 0, static_cast<int>(states.size()), seed, 0};
      std::vector<double> sq(states.size());
      for (std::size_t i = 0; i < states.size(); ++i) {
        const double e = est[i].tmi - truth[i];
        sq[i] = e * e;
        row.mse += sq[i];
        if (!est[i].converged) ++row.nonconverged;
      }
      row.mse /= static_cast<double>(states.size());
      if (states.size() > 1) {
        double v = 0;
        for (double x : sq) v += (x - row.mse) * (x - row.mse);
        row.std = std::sqrt(v / static_cast<double>(states.size() - 1));
      }
      rep.rows.push_back(row);
    }
  }
  return rep;
}

// Standard estimators. Grid value is the settings count for the noiseless
// sweep and the total shot budget for the noisy sweep.

inline BenchmarkMethod qst_noiseless() {
  return {"qst", [](const Mat8& rho, const BenchmarkTask& t) {
            const auto settings = choose_settings(static_cast<int>(t.grid_value), t.settings_seed);
            return EstimateOutcome{
                tmi_from_reconstruction(linear_inversion(exact_expectations(rho, settings), true))};
          }};
}

inline BenchmarkMethod cs_noiseless(SolverConfig cfg = {}) {
  return {"cs", [cfg](const Mat8& rho, const BenchmarkTask& t) {
            const auto settings = choose_settings(static_cast<int>(t.grid_value), t.settings_seed);
            const auto r = solve_trace_norm_min(
                ConstraintSet::from_estimates(exact_expectations(rho, settings)), cfg);
            return EstimateOutcome{tmi_from_reconstruction(r), r.diagnostics.converged};
          }};
}

/// Estimates from `n_settings` settings sharing a total budget of
/// task.grid_value shots.
inline EstimateTable sampled_estimates(const Mat8& rho, int n_settings, const BenchmarkTask& t) {
  const auto settings =
      n_settings == 27 ? MeasurementSetting::all() : choose_settings(n_settings, t.settings_seed);
  const auto shots = allocate_shots(static_cast<long>(t.grid_value), settings.size());
  return estimate_expectations(sample_settings(rho, settings, shots, t.seed));
}

inline BenchmarkMethod cs_obsv(int n_settings = 14, SolverConfig cfg = {}) {
  return {"cs_obsv", [=](const Mat8& rho, const BenchmarkTask& t) {
            const auto bounds = expectation_intervals(sampled_estimates(rho, n_settings, t), cfg.alpha);
            const auto r = solve_trace_norm_min(ConstraintSet::from_intervals(bounds), cfg);
            return EstimateOutcome{tmi_from_reconstruction(r), r.diagnostics.converged};
          }};
}

inline BenchmarkMethod qst_sampled(int n_settings = 14) {
  return {n_settings == 27 ? "qst_full" : "qst_sampled", [=](const Mat8& rho, const BenchmarkTask& t) {
            return EstimateOutcome{
                tmi_from_reconstruction(linear_inversion(sampled_estimates(rho, n_settings, t), true))};
          }};
}

}  // namespace qcollide
