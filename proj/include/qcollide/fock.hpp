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

// Multi-photon states over a live register of optical modes.
//
// Two representations share the same register bookkeeping:
//  - FockState: a pure state, sparse map from occupation tuple to amplitude.
//  - FockDensity: a mixed state stored block-diagonally by total photon
//    number. Each block lives on the *support* of that sector, i.e. the
//    lexicographically ordered occupation tuples that carry weight. Tuples
//    outside the support have exactly zero population, so the
//    representation is lossless.
//
// Gates act on creation operators so that the single-photon block of the
// lifted gate equals the 2x2 matrix itself:  a_j^dag -> sum_i U(i,j) a_i^dag.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Sparse>

#include "qcollide/types.hpp"

namespace qcollide {

struct ModeId {
  std::uint32_t value = 0;
  friend auto operator<=>(const ModeId&, const ModeId&) = default;
};

enum class ModeKind : std::uint8_t { qubit_rail, env_persistent, env_fresh };
enum class Environment : std::uint8_t { A = 0, B = 1 };

inline char env_char(Environment e) { return e == Environment::A ? 'A' : 'B'; }

struct ModeLabel {
  ModeKind kind = ModeKind::env_fresh;
  int qubit = 0;  // 1..3, rails only
  int rail = 0;   // 0 or 1, rails only
  Environment env = Environment::A;
  int cycle = 0;  // birth cycle, fresh modes only

  static ModeLabel qubit_rail(int qubit, int rail) {
    if (qubit < 1 || qubit > 3 || rail < 0 || rail > 1)
      throw std::invalid_argument("qubit rail label out of range");
    return {ModeKind::qubit_rail, qubit, rail, Environment::A, 0};
  }
  static ModeLabel persistent(Environment e) {
    return {ModeKind::env_persistent, 0, 0, e, 0};
  }
  static ModeLabel fresh(Environment e, int cycle) {
    return {ModeKind::env_fresh, 0, 0, e, cycle};
  }

  std::string str() const {
    switch (kind) {
      case ModeKind::qubit_rail:
        return "Q" + std::to_string(qubit) + ".r" + std::to_string(rail);
      case ModeKind::env_persistent:
        return std::string("E") + env_char(env);
      case ModeKind::env_fresh:
        return std::string("F") + env_char(env) + "@" + std::to_string(cycle);
    }
    return "?";
  }

  friend bool operator==(const ModeLabel&, const ModeLabel&) = default;
};

/// Ordered bookkeeping of active modes. Ids are never reused.
class ModeRegistry {
 public:
  struct Entry {
    ModeId id;
    ModeLabel label;
  };

  ModeRegistry() = default;

  /// Q1.r0 Q1.r1 Q2.r0 Q2.r1 Q3.r0 Q3.r1 EA EB, ids 0..7.
  static ModeRegistry collision_layout() {
    ModeRegistry r;
    for (int q = 1; q <= 3; ++q)
      for (int rail = 0; rail <= 1; ++rail)
        r.add(ModeLabel::qubit_rail(q, rail));
    r.add(ModeLabel::persistent(Environment::A));
    r.add(ModeLabel::persistent(Environment::B));
    return r;
  }

  ModeId add(const ModeLabel& label) {
    ModeId id{next_id_++};
    entries_.push_back({id, label});
    return id;
  }

  void remove(ModeId id) { entries_.erase(entries_.begin() + position(id)); }

  bool contains(ModeId id) const {
    return std::any_of(entries_.begin(), entries_.end(),
                       [&](const Entry& e) { return e.id == id; });
  }

  std::size_t position(ModeId id) const {
    for (std::size_t i = 0; i < entries_.size(); ++i)
      if (entries_[i].id == id) return i;
    throw ModeError("mode not active: id " + std::to_string(id.value));
  }

  ModeId id_of(const ModeLabel& label) const {
    for (const auto& e : entries_)
      if (e.label == label) return e.id;
    throw ModeError("mode not active: " + label.str());
  }

  std::size_t count(ModeKind kind) const {
    return static_cast<std::size_t>(
        std::count_if(entries_.begin(), entries_.end(),
                      [&](const Entry& e) { return e.label.kind == kind; }));
  }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<Entry>& entries() const { return entries_; }
  std::uint32_t next_id() const { return next_id_; }

  friend bool operator==(const ModeRegistry& a, const ModeRegistry& b) {
    if (a.next_id_ != b.next_id_ || a.entries_.size() != b.entries_.size())
      return false;
    for (std::size_t i = 0; i < a.entries_.size(); ++i)
      if (a.entries_[i].id != b.entries_[i].id ||
          !(a.entries_[i].label == b.entries_[i].label))
        return false;
    return true;
  }

 private:
  std::vector<Entry> entries_;
  std::uint32_t next_id_ = 0;
};

using Occupation = std::vector<std::uint8_t>;

inline int photon_count(const Occupation& c) {
  int n = 0;
  for (auto v : c) n += v;
  return n;
}

/// (rail 0, rail 1) of Q1, Q2, Q3.
using RailPairs = std::array<std::pair<ModeId, ModeId>, 3>;

inline RailPairs collision_rail_pairs(const ModeRegistry& reg) {
  RailPairs pairs;
  for (int q = 1; q <= 3; ++q)
    pairs[q - 1] = {reg.id_of(ModeLabel::qubit_rail(q, 0)),
                    reg.id_of(ModeLabel::qubit_rail(q, 1))};
  return pairs;
}

/// How a rail pair's occupation is read as a qubit.
enum class Readout {
  /// Keep only one photon per pair (coincidence post-selection).
  coincidence,
  /// Logical bit = rail-1 occupancy (0 or 1), i.e. the excitation held by
  /// the coupled rail. Rail 0 only ever undergoes exact swaps, so it is
  /// dropped coherently; tuples with two or more photons in a rail 1 are
  /// discarded.
  excitation,
};

struct QubitDensityMatrix {
  Mat8 matrix = Mat8::Zero();      // Q1 is the most significant bit
  double success_probability = 0;  // weight kept by the readout
};

/// Fock-basis lift of a two-mode transformation for k photons, basis
/// |m, k-m> with m descending (index i <-> m = k - i).
inline MatX two_mode_fock_block(const Mat2& u, int k) {
  if (k < 0) throw std::invalid_argument("photon count must be non-negative");
  if (!is_unitary(u, kUnitaryTol))
    throw std::invalid_argument("two-mode gate matrix is not unitary");
  // binomials and factorials up to k
  std::vector<double> fact(k + 1, 1.0);
  for (int i = 1; i <= k; ++i) fact[i] = fact[i - 1] * i;
  auto binom = [&](int n, int r) { return fact[n] / (fact[r] * fact[n - r]); };
  auto ipow = [](complex z, int e) {
    complex r = 1.0;
    for (int i = 0; i < e; ++i) r *= z;
    return r;
  };

  MatX block = MatX::Zero(k + 1, k + 1);
  // a1^dag -> u(0,0) a1^dag + u(1,0) a2^dag ;  a2^dag -> u(0,1) a1^dag + u(1,1) a2^dag
  for (int m = 0; m <= k; ++m) {
    const int rest = k - m;
    for (int p = 0; p <= k; ++p) {
      complex coeff = 0.0;
      // a photons of the first factor go to mode 1, p - a of the second
      for (int a = std::max(0, p - rest); a <= std::min(m, p); ++a) {
        coeff += binom(m, a) * ipow(u(0, 0), a) * ipow(u(1, 0), m - a) *
                 binom(rest, p - a) * ipow(u(0, 1), p - a) *
                 ipow(u(1, 1), rest - (p - a));
      }
      coeff *= std::sqrt(fact[p] * fact[k - p] / (fact[m] * fact[rest]));
      block(k - p, k - m) = coeff;
    }
  }
  return block;
}

struct TwoModeGate {
  ModeId first;
  ModeId second;
  Mat2 matrix;

  TwoModeGate(ModeId a, ModeId b, const Mat2& u) : first(a), second(b), matrix(u) {
    if (a == b) throw std::invalid_argument("two-mode gate needs two distinct modes");
    if (!is_unitary(u, kUnitaryTol))
      throw std::invalid_argument("two-mode gate matrix is not unitary");
  }
};

namespace detail {

inline constexpr double kPruneTol = 1e-30;

class LiftCache {
 public:
  explicit LiftCache(const Mat2& u) : u_(u) {}
  const MatX& operator()(int k) {
    if (static_cast<int>(blocks_.size()) <= k) blocks_.resize(k + 1);
    if (!blocks_[k]) blocks_[k] = two_mode_fock_block(u_, k);
    return *blocks_[k];
  }

 private:
  Mat2 u_;
  std::vector<std::optional<MatX>> blocks_;
};

struct RailPositions {
  std::array<std::pair<std::size_t, std::size_t>, 3> pairs;
  std::vector<bool> is_rail;
};

inline RailPositions rail_positions(const ModeRegistry& reg, const RailPairs& rails) {
  RailPositions rp;
  rp.is_rail.assign(reg.size(), false);
  for (int q = 0; q < 3; ++q) {
    rp.pairs[q] = {reg.position(rails[q].first), reg.position(rails[q].second)};
    if (rp.is_rail[rp.pairs[q].first] || rp.is_rail[rp.pairs[q].second] ||
        rp.pairs[q].first == rp.pairs[q].second)
      throw std::invalid_argument("rail pairs must use six distinct modes");
    rp.is_rail[rp.pairs[q].first] = rp.is_rail[rp.pairs[q].second] = true;
  }
  return rp;
}

/// Readout of an occupation tuple: the logical index and the coherence key
/// (occupation of the non-rail modes). Nullopt if discarded.
struct QubitCode {
  int logical;
  Occupation key;
};

inline std::optional<QubitCode> qubit_code(const Occupation& c, const RailPositions& rp,
                                           Readout mode) {
  int logical = 0;
  for (int q = 0; q < 3; ++q) {
    const int n0 = c[rp.pairs[q].first];
    const int n1 = c[rp.pairs[q].second];
    int bit;
    if (mode == Readout::excitation) {
      if (n1 > 1) return std::nullopt;
      bit = n1;
    } else if (n0 == 1 && n1 == 0) {
      bit = 0;
    } else if (n0 == 0 && n1 == 1) {
      bit = 1;
    } else {
      return std::nullopt;
    }
    logical = (logical << 1) | bit;
  }
  QubitCode code{logical, {}};
  code.key.reserve(c.size() - 6);
  for (std::size_t i = 0; i < c.size(); ++i)
    if (!rp.is_rail[i]) code.key.push_back(c[i]);
  return code;
}

inline QubitDensityMatrix finish_extraction(Mat8 rho) {
  const double p = rho.trace().real();
  if (!(p >= 1e-12)) throw PostSelectionExhausted("post-selection exhausted");
  rho /= p;
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return {rho, std::min(1.0, p)};
}

}  // namespace detail

/// Pure state over the registry's modes with definite photon number.
class FockState {
 public:
  using Amplitudes = std::map<Occupation, complex>;

  /// Vacuum.
  explicit FockState(ModeRegistry registry) : registry_(std::move(registry)) {
    if (registry_.empty()) throw std::invalid_argument("registry must be non-empty");
    amplitudes_[Occupation(registry_.size(), 0)] = 1.0;
  }

  FockState(ModeRegistry registry, Amplitudes amplitudes)
      : registry_(std::move(registry)), amplitudes_(std::move(amplitudes)) {
    if (registry_.empty()) throw std::invalid_argument("registry must be non-empty");
    if (amplitudes_.empty()) throw std::invalid_argument("no amplitudes given");
    total_ = photon_count(amplitudes_.begin()->first);
    for (const auto& [c, a] : amplitudes_) {
      if (c.size() != registry_.size())
        throw std::invalid_argument("occupation length does not match register");
      if (photon_count(c) != total_)
        throw std::invalid_argument("amplitudes mix photon numbers");
    }
    const double n = norm();
    if (std::abs(n - 1.0) > kRepresentationTol)
      throw std::invalid_argument("state is not normalized");
  }

  const ModeRegistry& registry() const { return registry_; }
  const Amplitudes& amplitudes() const { return amplitudes_; }
  int total_photons() const { return total_; }

  double norm() const {
    double s = 0;
    for (const auto& [c, a] : amplitudes_) s += std::norm(a);
    return s;
  }

  void apply(const TwoModeGate& g) {
    const auto i = registry_.position(g.first);
    const auto j = registry_.position(g.second);
    detail::LiftCache lift(g.matrix);
    Amplitudes out;
    for (const auto& [c, a] : amplitudes_) {
      const int k = c[i] + c[j];
      const int m = c[i];
      const MatX& block = lift(k);
      Occupation d = c;
      for (int p = 0; p <= k; ++p) {
        d[i] = static_cast<std::uint8_t>(p);
        d[j] = static_cast<std::uint8_t>(k - p);
        out[d] += block(k - p, k - m) * a;
      }
    }
    amplitudes_ = prune(std::move(out));
  }

  /// Creation operator on `mode`, renormalized.
  void inject_photon(ModeId mode) {
    const auto p = registry_.position(mode);
    Amplitudes out;
    double n = 0;
    for (const auto& [c, a] : amplitudes_) {
      Occupation d = c;
      const complex v = a * std::sqrt(static_cast<double>(c[p]) + 1.0);
      d[p] += 1;
      out.emplace(std::move(d), v);
      n += std::norm(v);
    }
    const double s = 1.0 / std::sqrt(n);
    for (auto& [c, a] : out) a *= s;
    amplitudes_ = std::move(out);
    ++total_;
  }

  ModeId add_mode(const ModeLabel& label) {
    const ModeId id = registry_.add(label);
    Amplitudes out;
    for (const auto& [c, a] : amplitudes_) {
      Occupation d = c;
      d.push_back(0);
      out.emplace_hint(out.end(), std::move(d), a);
    }
    amplitudes_ = std::move(out);
    return id;
  }

  /// Reduced three-qubit state: all non-rail modes are traced out.
  QubitDensityMatrix extract_qubits(const RailPairs& rails,
                                    Readout mode = Readout::coincidence) const {
    const auto rp = detail::rail_positions(registry_, rails);
    std::map<Occupation, Eigen::Matrix<complex, 8, 1>> branches;
    for (const auto& [c, a] : amplitudes_) {
      auto code = detail::qubit_code(c, rp, mode);
      if (!code) continue;
      auto [it, fresh] = branches.try_emplace(code->key);
      if (fresh) it->second.setZero();
      it->second(code->logical) += a;
    }
    Mat8 rho = Mat8::Zero();
    for (const auto& [key, v] : branches) rho += v * v.adjoint();
    return detail::finish_extraction(rho);
  }

 private:
  static Amplitudes prune(Amplitudes in) {
    for (auto it = in.begin(); it != in.end();) {
      if (std::norm(it->second) <= detail::kPruneTol)
        it = in.erase(it);
      else
        ++it;
    }
    return in;
  }

  ModeRegistry registry_;
  Amplitudes amplitudes_;
  int total_ = 0;
};

/// Mixed state, block-diagonal in total photon number.
class FockDensity {
 public:
  struct Sector {
    std::vector<Occupation> basis;  // sorted, unique
    MatX rho;
  };

  static FockDensity vacuum(ModeRegistry registry) {
    if (registry.empty()) throw std::invalid_argument("registry must be non-empty");
    FockDensity d;
    d.sectors_.resize(1);
    d.sectors_[0].basis.push_back(Occupation(registry.size(), 0));
    d.sectors_[0].rho = MatX::Ones(1, 1);
    d.registry_ = std::move(registry);
    return d;
  }

  static FockDensity from_pure(const FockState& psi) {
    FockDensity d;
    d.registry_ = psi.registry();
    const int n = psi.total_photons();
    d.sectors_.resize(n + 1);
    auto& sec = d.sectors_[n];
    Eigen::VectorXcd v(static_cast<Eigen::Index>(psi.amplitudes().size()));
    Eigen::Index i = 0;
    for (const auto& [c, a] : psi.amplitudes()) {
      sec.basis.push_back(c);
      v(i++) = a;
    }
    sec.rho = v * v.adjoint();
    return d;
  }

  const ModeRegistry& registry() const { return registry_; }
  const std::vector<Sector>& sectors() const { return sectors_; }
  int max_photons() const { return static_cast<int>(sectors_.size()) - 1; }

  double trace() const {
    double t = 0;
    for (const auto& s : sectors_)
      if (!s.basis.empty()) t += s.rho.trace().real();
    return t;
  }

  double purity() const {
    double p = 0;
    for (const auto& s : sectors_)
      if (!s.basis.empty()) p += s.rho.squaredNorm();
    return p;
  }

  /// Sorted eigenvalues over all sectors (zero eigenvalues outside the
  /// support are not listed).
  std::vector<double> spectrum() const {
    std::vector<double> ev;
    for (const auto& s : sectors_) {
      if (s.basis.empty()) continue;
      Eigen::SelfAdjointEigenSolver<MatX> es(s.rho, Eigen::EigenvaluesOnly);
      for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        ev.push_back(es.eigenvalues()(i));
    }
    std::sort(ev.begin(), ev.end());
    return ev;
  }

  /// Population of one occupation tuple (0 outside the support).
  double population(const Occupation& c) const {
    const int k = photon_count(c);
    if (k >= static_cast<int>(sectors_.size())) return 0;
    const auto& s = sectors_[k];
    auto it = std::lower_bound(s.basis.begin(), s.basis.end(), c);
    if (it == s.basis.end() || *it != c) return 0;
    const auto i = static_cast<Eigen::Index>(it - s.basis.begin());
    return s.rho(i, i).real();
  }

  /// Matrix element <a| rho |b> (0 across sectors or outside the support).
  complex element(const Occupation& a, const Occupation& b) const {
    const int k = photon_count(a);
    if (k != photon_count(b) || k >= static_cast<int>(sectors_.size())) return 0;
    const auto& s = sectors_[k];
    auto ia = std::lower_bound(s.basis.begin(), s.basis.end(), a);
    auto ib = std::lower_bound(s.basis.begin(), s.basis.end(), b);
    if (ia == s.basis.end() || *ia != a || ib == s.basis.end() || *ib != b) return 0;
    return s.rho(ia - s.basis.begin(), ib - s.basis.begin());
  }

  void apply(const TwoModeGate& g) {
    const auto i = registry_.position(g.first);
    const auto j = registry_.position(g.second);
    detail::LiftCache lift(g.matrix);
    for (auto& sec : sectors_) {
      if (sec.basis.empty()) continue;
      std::map<Occupation, Eigen::Index> index;
      for (const auto& c : sec.basis) {
        const int k = c[i] + c[j];
        Occupation d = c;
        for (int p = 0; p <= k; ++p) {
          d[i] = static_cast<std::uint8_t>(p);
          d[j] = static_cast<std::uint8_t>(k - p);
          index.emplace(d, 0);
        }
      }
      std::vector<Occupation> basis;
      basis.reserve(index.size());
      for (auto& [c, idx] : index) {
        idx = static_cast<Eigen::Index>(basis.size());
        basis.push_back(c);
      }
      std::vector<Eigen::Triplet<complex>> trip;
      for (Eigen::Index col = 0; col < static_cast<Eigen::Index>(sec.basis.size()); ++col) {
        const auto& c = sec.basis[col];
        const int k = c[i] + c[j];
        const int m = c[i];
        const MatX& block = lift(k);
        Occupation d = c;
        for (int p = 0; p <= k; ++p) {
          d[i] = static_cast<std::uint8_t>(p);
          d[j] = static_cast<std::uint8_t>(k - p);
          const complex v = block(k - p, k - m);
          if (v != complex(0.0)) trip.emplace_back(index.at(d), col, v);
        }
      }
      Eigen::SparseMatrix<complex> t(static_cast<Eigen::Index>(basis.size()),
                                     static_cast<Eigen::Index>(sec.basis.size()));
      t.setFromTriplets(trip.begin(), trip.end());
      const Eigen::SparseMatrix<complex> t_adj = t.adjoint();
      const MatX left = t * sec.rho;
      sec.rho = left * t_adj;
      sec.basis = std::move(basis);
      settle(sec);
    }
  }

  /// Creation operator on `mode`, renormalized.
  void inject_photon(ModeId mode) {
    const auto p = registry_.position(mode);
    std::vector<Sector> out(sectors_.size() + 1);
    double total = 0;
    for (std::size_t k = 0; k < sectors_.size(); ++k) {
      const auto& s = sectors_[k];
      if (s.basis.empty()) continue;
      auto& t = out[k + 1];
      Eigen::VectorXd scale(static_cast<Eigen::Index>(s.basis.size()));
      t.basis = s.basis;
      for (std::size_t a = 0; a < s.basis.size(); ++a) {
        scale(a) = std::sqrt(static_cast<double>(s.basis[a][p]) + 1.0);
        t.basis[a][p] += 1;
      }
      t.rho = scale.asDiagonal() * s.rho * scale.asDiagonal();
      total += t.rho.trace().real();
    }
    const double before = trace();
    for (auto& s : out)
      if (!s.basis.empty()) s.rho *= before / total;
    sectors_ = std::move(out);
  }

  /// Appends a vacuum mode at the end of the register.
  ModeId add_fresh_mode(const ModeLabel& label) {
    const ModeId id = registry_.add(label);
    for (auto& s : sectors_)
      for (auto& c : s.basis) c.push_back(0);
    return id;
  }

  void trace_out(ModeId mode) {
    const auto p = registry_.position(mode);
    std::vector<std::map<Occupation, Eigen::Index>> index(sectors_.size());
    auto reduce = [p](const Occupation& c) {
      Occupation r;
      r.reserve(c.size() - 1);
      for (std::size_t i = 0; i < c.size(); ++i)
        if (i != p) r.push_back(c[i]);
      return r;
    };
    for (std::size_t k = 0; k < sectors_.size(); ++k)
      for (const auto& c : sectors_[k].basis) index[k - c[p]].emplace(reduce(c), 0);

    std::vector<Sector> out(sectors_.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
      for (auto& [c, idx] : index[k]) {
        idx = static_cast<Eigen::Index>(out[k].basis.size());
        out[k].basis.push_back(c);
      }
      const auto n = static_cast<Eigen::Index>(out[k].basis.size());
      out[k].rho = MatX::Zero(n, n);
    }
    for (std::size_t k = 0; k < sectors_.size(); ++k) {
      const auto& s = sectors_[k];
      // group input indices by the traced mode's occupation
      std::map<int, std::pair<std::vector<Eigen::Index>, std::vector<Eigen::Index>>> groups;
      for (std::size_t a = 0; a < s.basis.size(); ++a) {
        const int j = s.basis[a][p];
        auto& g = groups[j];
        g.first.push_back(static_cast<Eigen::Index>(a));
        g.second.push_back(index[k - j].at(reduce(s.basis[a])));
      }
      for (const auto& [j, g] : groups)
        out[k - j].rho(g.second, g.second) += s.rho(g.first, g.first);
    }
    registry_.remove(mode);
    sectors_ = std::move(out);
    for (auto& s : sectors_)
      if (!s.basis.empty()) settle(s);
  }

  QubitDensityMatrix extract_qubits(const RailPairs& rails,
                                    Readout mode = Readout::coincidence) const {
    const auto rp = detail::rail_positions(registry_, rails);
    Mat8 rho = Mat8::Zero();
    for (const auto& s : sectors_) {
      // (coherence key, logical index, basis index)
      std::vector<std::tuple<Occupation, int, Eigen::Index>> kept;
      for (std::size_t a = 0; a < s.basis.size(); ++a) {
        auto code = detail::qubit_code(s.basis[a], rp, mode);
        if (code) kept.emplace_back(std::move(code->key), code->logical, a);
      }
      std::sort(kept.begin(), kept.end());
      for (std::size_t lo = 0; lo < kept.size();) {
        std::size_t hi = lo;
        while (hi < kept.size() && std::get<0>(kept[hi]) == std::get<0>(kept[lo])) ++hi;
        for (std::size_t x = lo; x < hi; ++x)
          for (std::size_t y = lo; y < hi; ++y)
            rho(std::get<1>(kept[x]), std::get<1>(kept[y])) +=
                s.rho(std::get<2>(kept[x]), std::get<2>(kept[y]));
        lo = hi;
      }
    }
    return detail::finish_extraction(rho);
  }

 private:
  FockDensity() = default;

  // Re-hermitize and drop zero-population tuples.
  static void settle(Sector& s) {
    s.rho = 0.5 * (s.rho + s.rho.adjoint()).eval();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < s.rho.rows(); ++i)
      if (s.rho(i, i).real() > detail::kPruneTol) keep.push_back(i);
    if (keep.size() == s.basis.size()) return;
    std::vector<Occupation> basis;
    basis.reserve(keep.size());
    for (auto i : keep) basis.push_back(std::move(s.basis[i]));
    MatX rho = s.rho(keep, keep);
    s.basis = std::move(basis);
    s.rho = std::move(rho);
  }

  ModeRegistry registry_;
  std::vector<Sector> sectors_;
};

// Value-returning forms of the state operations.

inline FockDensity make_vacuum(ModeRegistry registry) {
  return FockDensity::vacuum(std::move(registry));
}
inline FockDensity inject_photon(FockDensity s, ModeId mode) {
  s.inject_photon(mode);
  return s;
}
inline FockDensity apply_two_mode(FockDensity s, const TwoModeGate& g) {
  s.apply(g);
  return s;
}
inline FockDensity add_fresh_mode(FockDensity s, const ModeLabel& label) {
  s.add_fresh_mode(label);
  return s;
}
inline FockDensity trace_out_mode(FockDensity s, ModeId mode) {
  s.trace_out(mode);
  return s;
}
inline QubitDensityMatrix extract_qubits(const FockDensity& s, const RailPairs& rails,
                                         Readout mode = Readout::coincidence) {
  return s.extract_qubits(rails, mode);
}

}  // namespace qcollide
