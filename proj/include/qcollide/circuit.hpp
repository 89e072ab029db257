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

// Collision-model programs on the dual-rail register.
//
// Register: Q1 (ancilla), Q2 and Q3 (system) as rail pairs, plus one
// persistent mode per environment chain (A couples to Q2, B to Q3). Each
// cycle t = 1..n runs
//   SS  swap Q2 <-> Q3 (exact mode exchange, no phases)
//   SE  MZI(theta_se) on (Q2.r1, EA) and (Q3.r1, EB)
//   EE  per chain: birth fresh mode, inject ambient photons scheduled for
//       distance t-1, MZI(theta_ee) on (E, fresh), retire fresh
// and a snapshot of the three-qubit state is taken at step 0 and after
// every cycle.

#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qcollide/fock.hpp"

namespace qcollide {

inline constexpr double kPi = std::numbers::pi;

struct MziParams {
  double theta = kPi;  // inner phase, [0, pi]
  double phi = 0.0;    // outer phase, [0, 2 pi)

  void validate() const {
    if (!(theta >= -1e-12 && theta <= kPi + 1e-12))
      throw std::invalid_argument("MZI theta outside [0, pi]");
    if (!(phi >= -1e-12 && phi < 2 * kPi))
      throw std::invalid_argument("MZI phi outside [0, 2pi)");
  }
};

/// i e^{i theta/2} [[e^{i phi} sin(theta/2), cos(theta/2)],
///                  [e^{i phi} cos(theta/2), -sin(theta/2)]]
inline Mat2 mzi_unitary(const MziParams& p) {
  const complex i(0.0, 1.0);
  const complex pre = i * std::exp(i * (p.theta / 2));
  const complex eph = std::exp(i * p.phi);
  const double s = std::sin(p.theta / 2);
  const double c = std::cos(p.theta / 2);
  Mat2 u;
  u << eph * s, c, eph * c, -s;
  return pre * u;
}

inline Mat2 exchange_matrix() {
  Mat2 u;
  u << 0, 1, 1, 0;
  return u;
}

/// Rail-wise exchange of two dual-rail qubits, as plain mode exchanges.
inline std::vector<TwoModeGate> swap_gate(const ModeRegistry& reg, int qubit_a, int qubit_b) {
  if (qubit_a == qubit_b) throw std::invalid_argument("swap needs two distinct qubits");
  std::vector<TwoModeGate> gates;
  for (int rail = 0; rail <= 1; ++rail)
    gates.emplace_back(reg.id_of(ModeLabel::qubit_rail(qubit_a, rail)),
                       reg.id_of(ModeLabel::qubit_rail(qubit_b, rail)), exchange_matrix());
  return gates;
}

struct Preparation {
  enum class Kind {
    phi_plus,  // (|00> + |11>)/sqrt2 on Q1Q2, Q3 = |0>
    psi_plus,  // (|01> + |10>)/sqrt2 on Q1Q2, Q3 = |0>
    product,   // |000>
  };
  Kind kind = Kind::phi_plus;
  // Optional MZI on each qubit's (r0, r1) after the above.
  std::array<std::optional<MziParams>, 3> rotations{};

  void validate() const {
    for (const auto& r : rotations)
      if (r) r->validate();
  }
};

struct AmbientPhoton {
  Environment env = Environment::B;
  int distance = 0;
  friend bool operator==(const AmbientPhoton&, const AmbientPhoton&) = default;
};

struct CollisionConfig {
  int n_cycles = 100;
  double theta_se = kPi / 2;
  double theta_ee = kPi / 2;
  double phi_se = 0.0;
  double phi_ee = 0.0;
  std::vector<AmbientPhoton> ambient;
  Preparation prep;
  Readout readout = Readout::excitation;

  MziParams se() const { return {theta_se, phi_se}; }
  MziParams ee() const { return {theta_ee, phi_ee}; }

  void validate() const {
    if (n_cycles < 0) throw std::invalid_argument("n-cycles must be non-negative");
    se().validate();
    ee().validate();
    prep.validate();
    for (const auto& a : ambient)
      if (a.distance < 0 || a.distance >= n_cycles)
        throw std::invalid_argument("ambient distance " + std::to_string(a.distance) +
                                    " must lie in [0, n-cycles)");
  }
};

// Schedule instructions.
struct ApplyGate {
  TwoModeGate gate;
  std::string stage;  // "SS", "SE", "EE", "prep"
};
struct Inject {
  ModeId mode;
};
struct Birth {
  ModeLabel label;
  ModeId id;  // id the register will hand out
};
struct Retire {
  ModeId mode;
};
struct Snapshot {
  int step;
};
using Instruction = std::variant<ApplyGate, Inject, Birth, Retire, Snapshot>;

struct CollisionSchedule {
  ModeRegistry initial_registry;
  std::vector<Instruction> instructions;
  int n_cycles = 0;

  /// Replays register bookkeeping; throws on any dangling reference.
  void validate() const {
    ModeRegistry reg = initial_registry;
    int last_step = -1;
    for (const auto& ins : instructions) {
      std::visit(
          [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, ApplyGate>) {
              reg.position(x.gate.first);
              reg.position(x.gate.second);
            } else if constexpr (std::is_same_v<T, Inject>) {
              reg.position(x.mode);
            } else if constexpr (std::is_same_v<T, Birth>) {
              if (reg.add(x.label) != x.id)
                throw std::invalid_argument("birth id out of sequence");
            } else if constexpr (std::is_same_v<T, Retire>) {
              if (reg.entries()[reg.position(x.mode)].label.kind == ModeKind::qubit_rail)
                throw std::invalid_argument("qubit rails cannot be retired");
              reg.remove(x.mode);
            } else {
              if (x.step <= last_step)
                throw std::invalid_argument("snapshots must be strictly increasing");
              last_step = x.step;
            }
          },
          ins);
    }
  }
};

/// Initial global pure state (three photons, environment in vacuum).
inline FockState prepare_initial_state(const Preparation& prep) {
  prep.validate();
  ModeRegistry reg = ModeRegistry::collision_layout();
  const std::size_t m = reg.size();
  auto occ = [&](int b1, int b2, int b3) {
    Occupation c(m, 0);
    c[0 + b1] = 1;
    c[2 + b2] = 1;
    c[4 + b3] = 1;
    return c;
  };
  FockState::Amplitudes amps;
  const double h = 1.0 / std::sqrt(2.0);
  switch (prep.kind) {
    case Preparation::Kind::phi_plus:
      amps[occ(0, 0, 0)] = h;
      amps[occ(1, 1, 0)] = h;
      break;
    case Preparation::Kind::psi_plus:
      amps[occ(0, 1, 0)] = h;
      amps[occ(1, 0, 0)] = h;
      break;
    case Preparation::Kind::product:
      amps[occ(0, 0, 0)] = 1.0;
      break;
  }
  FockState psi(reg, std::move(amps));
  for (int q = 0; q < 3; ++q) {
    if (!prep.rotations[q]) continue;
    psi.apply(TwoModeGate(reg.id_of(ModeLabel::qubit_rail(q + 1, 0)),
                          reg.id_of(ModeLabel::qubit_rail(q + 1, 1)),
                          mzi_unitary(*prep.rotations[q])));
  }
  return psi;
}

inline FockDensity prepare_initial(const Preparation& prep) {
  return FockDensity::from_pure(prepare_initial_state(prep));
}

inline CollisionSchedule build_schedule(const CollisionConfig& cfg) {
  cfg.validate();
  CollisionSchedule sch;
  sch.initial_registry = ModeRegistry::collision_layout();
  sch.n_cycles = cfg.n_cycles;
  ModeRegistry reg = sch.initial_registry;
  const Mat2 u_se = mzi_unitary(cfg.se());
  const Mat2 u_ee = mzi_unitary(cfg.ee());
  const ModeId env[2] = {reg.id_of(ModeLabel::persistent(Environment::A)),
                         reg.id_of(ModeLabel::persistent(Environment::B))};
  const ModeId q2r1 = reg.id_of(ModeLabel::qubit_rail(2, 1));
  const ModeId q3r1 = reg.id_of(ModeLabel::qubit_rail(3, 1));

  auto& out = sch.instructions;
  out.emplace_back(Snapshot{0});
  for (int t = 1; t <= cfg.n_cycles; ++t) {
    for (auto& g : swap_gate(reg, 2, 3)) out.emplace_back(ApplyGate{g, "SS"});
    out.emplace_back(ApplyGate{TwoModeGate(q2r1, env[0], u_se), "SE"});
    out.emplace_back(ApplyGate{TwoModeGate(q3r1, env[1], u_se), "SE"});
    for (auto e : {Environment::A, Environment::B}) {
      const auto label = ModeLabel::fresh(e, t);
      const ModeId fresh = reg.add(label);
      out.emplace_back(Birth{label, fresh});
      for (const auto& a : cfg.ambient)
        if (a.env == e && a.distance == t - 1) out.emplace_back(Inject{fresh});
      out.emplace_back(ApplyGate{TwoModeGate(env[static_cast<int>(e)], fresh, u_ee), "EE"});
      out.emplace_back(Retire{fresh});
      reg.remove(fresh);
    }
    out.emplace_back(Snapshot{t});
  }
  return sch;
}

struct TrajectoryPoint {
  int step = 0;
  QubitDensityMatrix rho;
};

struct Trajectory {
  std::vector<TrajectoryPoint> points;
};

/// Incremental engine: fresh modes are traced out when retired.
inline Trajectory run(const CollisionSchedule& schedule, FockDensity state,
                      Readout readout = Readout::excitation) {
  if (!(state.registry() == schedule.initial_registry))
    throw std::invalid_argument("initial state register does not match schedule");
  Trajectory traj;
  for (const auto& ins : schedule.instructions) {
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, ApplyGate>) {
            state.apply(x.gate);
          } else if constexpr (std::is_same_v<T, Inject>) {
            state.inject_photon(x.mode);
          } else if constexpr (std::is_same_v<T, Birth>) {
            if (state.add_fresh_mode(x.label) != x.id)
              throw std::invalid_argument("birth id out of sequence");
          } else if constexpr (std::is_same_v<T, Retire>) {
            state.trace_out(x.mode);
          } else {
            try {
              traj.points.push_back(
                  {x.step, state.extract_qubits(collision_rail_pairs(state.registry()), readout)});
            } catch (const PostSelectionExhausted& e) {
              throw PostSelectionExhausted(
                  "post-selection exhausted at step " + std::to_string(x.step), x.step);
            }
          }
        },
        ins);
  }
  return traj;
}

inline Trajectory run(const CollisionConfig& cfg) {
  return run(build_schedule(cfg), prepare_initial(cfg.prep), cfg.readout);
}

}  // namespace qcollide
