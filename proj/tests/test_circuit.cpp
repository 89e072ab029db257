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

#include <gtest/gtest.h>

#include "qcollide/circuit.hpp"
#include "qcollide/measures.hpp"
#include "qcollide/purification.hpp"
#include "test_util.hpp"

using namespace qcollide;
using namespace qcollide::testing;

namespace {

template <class T>
int count_of(const CollisionSchedule& s) {
  int n = 0;
  for (const auto& i : s.instructions) n += std::holds_alternative<T>(i);
  return n;
}

// Dual-rail encoding of a logical three-qubit vector on the collision layout.
FockState dual_rail(const Eigen::VectorXcd& v) {
  FockState::Amplitudes amps;
  for (int x = 0; x < 8; ++x) {
    if (std::abs(v(x)) == 0) continue;
    Occupation c(8, 0);
    for (int q = 0; q < 3; ++q) c[2 * q + ((x >> (2 - q)) & 1)] = 1;
    amps[c] = v(x);
  }
  return FockState(ModeRegistry::collision_layout(), amps);
}

// Logical permutation exchanging qubits 2 and 3.
Mat8 swap23() {
  Mat8 p = Mat8::Zero();
  for (int x = 0; x < 8; ++x) {
    const int y = (x & 4) | ((x & 2) >> 1) | ((x & 1) << 1);
    p(y, x) = 1;
  }
  return p;
}

}  // namespace

TEST(MziUnitary, ClosedForms) {
  Mat2 a;
  a << -1, 0, 0, 1;
  EXPECT_LT((mzi_unitary({kPi, 0}) - a).norm(), 1e-15);
  const complex i(0, 1);
  Mat2 b;
  b << 0, i, i, 0;
  EXPECT_LT((mzi_unitary({0, 0}) - b).norm(), 1e-15);
}

TEST(MziUnitary, UnitaryAndStayProbability) {
  TestRng rng(3);
  for (int t = 0; t < 100; ++t) {
    const MziParams p{rng.uniform(0, kPi), rng.uniform(0, 2 * kPi)};
    const Mat2 u = mzi_unitary(p);
    EXPECT_LT((u.adjoint() * u - Mat2::Identity()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(std::norm(u(0, 0)), std::pow(std::sin(p.theta / 2), 2), 1e-14);
  }
  EXPECT_THROW((MziParams{4.0, 0}.validate()), std::invalid_argument);
  EXPECT_THROW((MziParams{1.0, 2 * kPi}.validate()), std::invalid_argument);
}

TEST(SwapGate, BasisStatesAndInvolution) {
  const ModeRegistry reg = ModeRegistry::collision_layout();
  for (int x = 0; x < 8; ++x) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(8);
    v(x) = 1;
    FockState psi = dual_rail(v);
    for (const auto& g : swap_gate(reg, 2, 3)) psi.apply(g);
    const auto q = psi.extract_qubits(collision_rail_pairs(reg));
    const int y = (x & 4) | ((x & 2) >> 1) | ((x & 1) << 1);
    EXPECT_NEAR(q.matrix(y, y).real(), 1.0, 1e-15);
    for (const auto& g : swap_gate(reg, 2, 3)) psi.apply(g);
    EXPECT_NEAR(psi.extract_qubits(collision_rail_pairs(reg)).matrix(x, x).real(), 1.0, 1e-15);
  }
  EXPECT_THROW(swap_gate(reg, 2, 2), std::invalid_argument);
}

TEST(SwapGate, InducesLogicalSwapAndKeepsTmi) {
  const ModeRegistry reg = ModeRegistry::collision_layout();
  TestRng rng(21);
  for (int t = 0; t < 20; ++t) {
    // mixed logical state as a mixture of dual-rail pure states
    Mat8 rho = Mat8::Zero(), out = Mat8::Zero();
    for (int r = 0; r < 3; ++r) {
      const Eigen::VectorXcd v = random_pure(rng, 8);
      const double w = (r + 1) / 6.0;
      FockState psi = dual_rail(v);
      for (const auto& g : swap_gate(reg, 2, 3)) psi.apply(g);
      rho += w * v * v.adjoint();
      out += w * psi.extract_qubits(collision_rail_pairs(reg)).matrix;
    }
    EXPECT_LT((out - swap23() * rho * swap23().adjoint()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(tmi(MatX(out)), tmi(MatX(rho)), 1e-9);
  }
}

TEST(PrepareInitial, DefaultAndOrthogonalPartner) {
  const auto d = prepare_initial(Preparation{});
  const auto q = d.extract_qubits(collision_rail_pairs(d.registry()), Readout::excitation);
  EXPECT_NEAR(tmi(MatX(q.matrix)), 0.0, 1e-12);
  EXPECT_NEAR(q.success_probability, 1.0, 1e-15);
  Preparation psi;
  psi.kind = Preparation::Kind::psi_plus;
  const auto s = prepare_initial(psi);
  const auto qs = s.extract_qubits(collision_rail_pairs(s.registry()));
  EXPECT_NEAR(trace_distance(MatX(q.matrix), MatX(qs.matrix)), 1.0, 1e-12);
}

TEST(PrepareInitial, RotationsAndPhotonCount) {
  Preparation p;
  p.kind = Preparation::Kind::product;
  p.rotations[2] = MziParams{0, 0};  // full exchange flips Q3
  const auto psi = prepare_initial_state(p);
  EXPECT_EQ(psi.total_photons(), 3);
  const auto q = psi.extract_qubits(collision_rail_pairs(psi.registry()));
  EXPECT_NEAR(q.matrix(1, 1).real(), 1.0, 1e-15);
  p.rotations[0] = MziParams{5.0, 0};
  EXPECT_THROW(prepare_initial(p), std::invalid_argument);

  CollisionConfig cfg;
  cfg.n_cycles = 4;
  cfg.ambient = {{Environment::B, 0}, {Environment::B, 2}, {Environment::A, 3}};
  auto sch = build_schedule(cfg);
  auto d = prepare_initial(cfg.prep);
  int sector = -1;
  for (const auto& ins : sch.instructions) {
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, ApplyGate>) d.apply(x.gate);
          else if constexpr (std::is_same_v<T, Inject>) d.inject_photon(x.mode);
          else if constexpr (std::is_same_v<T, Birth>) d.add_fresh_mode(x.label);
          else if constexpr (std::is_same_v<T, Retire>) {
          }
        },
        ins);
  }
  for (std::size_t k = 0; k < d.sectors().size(); ++k)
    if (!d.sectors()[k].basis.empty()) sector = static_cast<int>(k);
  EXPECT_EQ(sector, 3 + 3);
}

TEST(BuildSchedule, CountsForOneCycle) {
  CollisionConfig cfg;
  cfg.n_cycles = 1;
  const auto s = build_schedule(cfg);
  int ss = 0, se = 0, ee = 0;
  for (const auto& i : s.instructions)
    if (const auto* g = std::get_if<ApplyGate>(&i)) {
      ss += g->stage == "SS";
      se += g->stage == "SE";
      ee += g->stage == "EE";
    }
  EXPECT_EQ(ss, 2);  // one swap group of two rail exchanges
  EXPECT_EQ(se, 2);
  EXPECT_EQ(ee, 2);
  EXPECT_EQ(count_of<Birth>(s), 2);
  EXPECT_EQ(count_of<Retire>(s), 2);
  EXPECT_EQ(count_of<Snapshot>(s), 2);
  EXPECT_EQ(count_of<Inject>(s), 0);
  EXPECT_NO_THROW(s.validate());
}

TEST(BuildSchedule, AmbientPlacement) {
  CollisionConfig cfg;
  cfg.n_cycles = 3;
  cfg.ambient = {{Environment::B, 1}};
  const auto s = build_schedule(cfg);
  ASSERT_EQ(count_of<Inject>(s), 1);
  int cycle = 0;
  std::optional<ModeId> fresh_b;
  bool seen_inject = false;
  for (const auto& i : s.instructions) {
    if (const auto* sn = std::get_if<Snapshot>(&i)) cycle = sn->step + 1;
    if (const auto* b = std::get_if<Birth>(&i))
      if (b->label.env == Environment::B) fresh_b = b->id;
    if (const auto* in = std::get_if<Inject>(&i)) {
      EXPECT_EQ(cycle, 2);
      ASSERT_TRUE(fresh_b);
      EXPECT_EQ(in->mode, *fresh_b);
      seen_inject = true;
    }
    if (const auto* g = std::get_if<ApplyGate>(&i)) {
      if (g->stage == "EE" && fresh_b && g->gate.second == *fresh_b && cycle == 2) {
        EXPECT_TRUE(seen_inject);
      }
    }
  }
  cfg.ambient = {{Environment::B, 3}};
  EXPECT_THROW(build_schedule(cfg), std::invalid_argument);
}

TEST(BuildSchedule, FullExchangeEmptiesPersistentModes) {
  CollisionConfig cfg;
  cfg.n_cycles = 8;
  cfg.theta_se = 1.0;
  cfg.theta_ee = 0.0;
  const auto sch = build_schedule(cfg);
  auto d = prepare_initial(cfg.prep);
  const std::size_t ea = 6, eb = 7;
  for (const auto& ins : sch.instructions) {
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, ApplyGate>) d.apply(x.gate);
          else if constexpr (std::is_same_v<T, Inject>) d.inject_photon(x.mode);
          else if constexpr (std::is_same_v<T, Birth>) d.add_fresh_mode(x.label);
          else if constexpr (std::is_same_v<T, Retire>) d.trace_out(x.mode);
          else {
            double occupied = 0;
            for (const auto& s : d.sectors())
              for (std::size_t a = 0; a < s.basis.size(); ++a)
                if (s.basis[a][ea] + s.basis[a][eb] > 0) occupied += s.rho(a, a).real();
            EXPECT_LT(occupied, 1e-9) << "step " << x.step;
          }
        },
        ins);
  }
}

TEST(Run, DecoupledTrajectory) {
  CollisionConfig cfg;
  cfg.n_cycles = 20;
  cfg.theta_se = kPi;
  cfg.theta_ee = 1.3;
  for (auto readout : {Readout::coincidence, Readout::excitation}) {
    cfg.readout = readout;
    const auto t = run(cfg);
    ASSERT_EQ(t.points.size(), 21u);
    for (const auto& p : t.points) {
      EXPECT_NEAR(tmi(MatX(p.rho.matrix)), 0.0, 1e-9);
      EXPECT_NEAR(p.rho.success_probability, 1.0, 1e-12);
    }
  }
}

TEST(Run, MatchesPurificationOracle) {
  CollisionConfig cfg;
  cfg.theta_se = kPi / 2;
  cfg.theta_ee = kPi / 2;
  cfg.n_cycles = 100;
  const auto full = run(cfg);
  cfg.n_cycles = 10;
  const auto oracle = run_purified(cfg);
  for (int s = 0; s <= 10; ++s)
    EXPECT_LT((full.points[s].rho.matrix - oracle.points[s].rho.matrix).cwiseAbs().maxCoeff(), 1e-9);
  cfg.readout = Readout::coincidence;
  cfg.ambient = {{Environment::B, 2}};
  EXPECT_LT(max_deviation(run(cfg), run_purified(cfg)), 1e-9);
}

TEST(Run, ZeroCycles) {
  CollisionConfig cfg;
  cfg.n_cycles = 0;
  const auto t = run(cfg);
  ASSERT_EQ(t.points.size(), 1u);
  EXPECT_EQ(t.points[0].step, 0);
}

TEST(Run, StepsContiguousAndDeterministic) {
  CollisionConfig cfg;
  cfg.n_cycles = 15;
  cfg.theta_se = 0.9;
  cfg.theta_ee = 2.0;
  cfg.ambient = {{Environment::B, 3}};
  const auto a = run(cfg), b = run(cfg);
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    EXPECT_EQ(a.points[i].step, static_cast<int>(i));
    EXPECT_TRUE(a.points[i].rho.matrix == b.points[i].rho.matrix);
    EXPECT_EQ(a.points[i].rho.success_probability, b.points[i].rho.success_probability);
  }
}

TEST(Run, RejectsMismatchedRegister) {
  const auto sch = build_schedule(CollisionConfig{});
  ModeRegistry other = ModeRegistry::collision_layout();
  other.add(ModeLabel::fresh(Environment::A, 0));
  EXPECT_THROW(run(sch, make_vacuum(other)), std::invalid_argument);
}

TEST(Run, ReportsExhaustedStep) {
  // full SE transfer empties both system pairs under coincidence readout
  CollisionConfig cfg;
  cfg.n_cycles = 3;
  cfg.theta_se = 0;
  cfg.theta_ee = kPi;
  cfg.readout = Readout::coincidence;
  cfg.prep.kind = Preparation::Kind::product;
  cfg.prep.rotations = {MziParams{0, 0}, MziParams{0, 0}, MziParams{0, 0}};
  try {
    run(cfg);
    FAIL() << "expected exhaustion";
  } catch (const PostSelectionExhausted& e) {
    EXPECT_EQ(e.step(), 1);
  }
}

TEST(CollisionSchedule, ValidateCatchesDanglingReferences) {
  CollisionConfig cfg;
  cfg.n_cycles = 2;
  auto s = build_schedule(cfg);
  s.instructions.push_back(Inject{ModeId{8}});  // retired in cycle 1
  EXPECT_THROW(s.validate(), ModeError);
  auto t = build_schedule(cfg);
  t.instructions.push_back(Snapshot{1});
  EXPECT_THROW(t.validate(), std::invalid_argument);
  auto u = build_schedule(cfg);
  u.instructions.push_back(Retire{ModeId{0}});
  EXPECT_THROW(u.validate(), std::invalid_argument);
}
