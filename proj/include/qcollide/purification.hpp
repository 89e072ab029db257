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

// Reference engine: every mode ever born stays in one global pure state and
// nothing is traced until a snapshot is read out. Cost grows with the number
// of cycles, so this is meant for short schedules only.

#pragma once

#include <algorithm>

#include "qcollide/circuit.hpp"

namespace qcollide {

inline Trajectory run_purified(const CollisionSchedule& schedule, FockState psi,
                               Readout readout = Readout::excitation) {
  if (!(psi.registry() == schedule.initial_registry))
    throw std::invalid_argument("initial state register does not match schedule");
  Trajectory traj;
  for (const auto& ins : schedule.instructions) {
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, ApplyGate>) {
            psi.apply(x.gate);
          } else if constexpr (std::is_same_v<T, Inject>) {
            psi.inject_photon(x.mode);
          } else if constexpr (std::is_same_v<T, Birth>) {
            if (psi.add_mode(x.label) != x.id)
              throw std::invalid_argument("birth id out of sequence");
          } else if constexpr (std::is_same_v<T, Retire>) {
            // kept: the mode is simply never addressed again
          } else {
            try {
              traj.points.push_back(
                  {x.step, psi.extract_qubits(collision_rail_pairs(psi.registry()), readout)});
            } catch (const PostSelectionExhausted&) {
              throw PostSelectionExhausted(
                  "post-selection exhausted at step " + std::to_string(x.step), x.step);
            }
          }
        },
        ins);
  }
  return traj;
}

inline Trajectory run_purified(const CollisionConfig& cfg) {
  return run_purified(build_schedule(cfg), prepare_initial_state(cfg.prep), cfg.readout);
}

/// Largest elementwise |difference| between two trajectories' qubit states;
/// +inf when the step lists differ.
inline double max_deviation(const Trajectory& a, const Trajectory& b) {
  if (a.points.size() != b.points.size()) return std::numeric_limits<double>::infinity();
  double dev = 0;
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    if (a.points[i].step != b.points[i].step) return std::numeric_limits<double>::infinity();
    dev = std::max(dev, (a.points[i].rho.matrix - b.points[i].rho.matrix).cwiseAbs().maxCoeff());
  }
  return dev;
}

}  // namespace qcollide
