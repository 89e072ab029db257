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

// JSON forms of configs, schedules, shot records and estimate tables.

#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "qcollide/circuit.hpp"
#include "qcollide/cs.hpp"
#include "qcollide/tomography.hpp"

namespace qcollide {

using json = nlohmann::ordered_json;

inline std::string readout_name(Readout r) {
  return r == Readout::coincidence ? "coincidence" : "excitation";
}

inline Readout parse_readout(const std::string& s) {
  if (s == "coincidence") return Readout::coincidence;
  if (s == "excitation") return Readout::excitation;
  throw std::invalid_argument("unknown readout: " + s);
}

inline std::string prep_name(Preparation::Kind k) {
  switch (k) {
    case Preparation::Kind::phi_plus: return "phi_plus";
    case Preparation::Kind::psi_plus: return "psi_plus";
    case Preparation::Kind::product: return "product";
  }
  return "?";
}

inline Preparation::Kind parse_prep(const std::string& s) {
  if (s == "phi_plus") return Preparation::Kind::phi_plus;
  if (s == "psi_plus") return Preparation::Kind::psi_plus;
  if (s == "product") return Preparation::Kind::product;
  throw std::invalid_argument("unknown preparation: " + s);
}

inline Environment parse_env(const std::string& s) {
  if (s == "A") return Environment::A;
  if (s == "B") return Environment::B;
  throw std::invalid_argument("unknown environment: " + s);
}

inline json to_json(const MziParams& p) { return {{"theta", p.theta}, {"phi", p.phi}}; }

inline json to_json(const Preparation& p) {
  json rot = json::array();
  for (const auto& r : p.rotations) rot.push_back(r ? to_json(*r) : json(nullptr));
  return {{"kind", prep_name(p.kind)}, {"rotations", rot}};
}

inline Preparation preparation_from_json(const json& j) {
  Preparation p;
  p.kind = parse_prep(j.value("kind", std::string("phi_plus")));
  if (j.contains("rotations")) {
    const auto& rot = j.at("rotations");
    if (!rot.is_array() || rot.size() != 3)
      throw std::invalid_argument("prep.rotations needs three entries");
    for (int q = 0; q < 3; ++q)
      if (!rot[q].is_null())
        p.rotations[q] = MziParams{rot[q].value("theta", kPi), rot[q].value("phi", 0.0)};
  }
  return p;
}

inline json to_json(const CollisionConfig& c) {
  json amb = json::array();
  for (const auto& a : c.ambient)
    amb.push_back({{"env", std::string(1, env_char(a.env))}, {"distance", a.distance}});
  return {{"n_cycles", c.n_cycles}, {"theta_se", c.theta_se}, {"theta_ee", c.theta_ee},
          {"phi_se", c.phi_se},     {"phi_ee", c.phi_ee},     {"ambient", amb},
          {"prep", to_json(c.prep)}, {"readout", readout_name(c.readout)}};
}

/// Missing keys keep their defaults; unknown keys are rejected.
inline CollisionConfig collision_config_from_json(const json& j, CollisionConfig c = {}) {
  if (!j.is_object()) throw std::invalid_argument("collision config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "n_cycles") c.n_cycles = v.get<int>();
    else if (key == "theta_se") c.theta_se = v.get<double>();
    else if (key == "theta_ee") c.theta_ee = v.get<double>();
    else if (key == "phi_se") c.phi_se = v.get<double>();
    else if (key == "phi_ee") c.phi_ee = v.get<double>();
    else if (key == "readout") c.readout = parse_readout(v.get<std::string>());
    else if (key == "prep") c.prep = preparation_from_json(v);
    else if (key == "ambient") {
      c.ambient.clear();
      for (const auto& a : v)
        c.ambient.push_back({parse_env(a.value("env", std::string("B"))), a.at("distance").get<int>()});
    } else {
      throw std::invalid_argument("unknown collision config key: " + key);
    }
  }
  return c;
}

inline json mode_label_json(const ModeLabel& l) {
  switch (l.kind) {
    case ModeKind::qubit_rail: return {{"kind", "qubit_rail"}, {"qubit", l.qubit}, {"rail", l.rail}};
    case ModeKind::env_persistent: return {{"kind", "env_persistent"}, {"env", std::string(1, env_char(l.env))}};
    case ModeKind::env_fresh:
      return {{"kind", "env_fresh"}, {"env", std::string(1, env_char(l.env))}, {"cycle", l.cycle}};
  }
  return {};
}

inline json matrix_json(const Mat2& u) {
  json rows = json::array();
  for (int i = 0; i < 2; ++i) {
    json row = json::array();
    for (int k = 0; k < 2; ++k) row.push_back({u(i, k).real(), u(i, k).imag()});
    rows.push_back(row);
  }
  return rows;
}

/// Human-readable instruction list.
inline json to_json(const CollisionSchedule& s) {
  json reg = json::array();
  for (const auto& e : s.initial_registry.entries())
    reg.push_back({{"id", e.id.value}, {"label", e.label.str()}, {"mode", mode_label_json(e.label)}});
  json ins = json::array();
  for (const auto& i : s.instructions) {
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, ApplyGate>)
            ins.push_back({{"op", "gate"},
                           {"stage", x.stage},
                           {"modes", {x.gate.first.value, x.gate.second.value}},
                           {"matrix", matrix_json(x.gate.matrix)}});
          else if constexpr (std::is_same_v<T, Inject>)
            ins.push_back({{"op", "inject"}, {"mode", x.mode.value}});
          else if constexpr (std::is_same_v<T, Birth>)
            ins.push_back({{"op", "birth"}, {"mode", x.id.value}, {"label", x.label.str()}});
          else if constexpr (std::is_same_v<T, Retire>)
            ins.push_back({{"op", "retire"}, {"mode", x.mode.value}});
          else
            ins.push_back({{"op", "snapshot"}, {"step", x.step}});
        },
        i);
  }
  return {{"n_cycles", s.n_cycles}, {"registry", reg}, {"instructions", ins}};
}

inline json to_json(const ShotRecord& r) {
  return {{"setting", r.setting.str()},
          {"shots", r.shots},
          {"counts", r.counts},
          {"seed", r.seed}};
}

inline ShotRecord shot_record_from_json(const json& j) {
  ShotRecord r;
  r.setting = MeasurementSetting::parse(j.at("setting").get<std::string>());
  r.shots = j.at("shots").get<long>();
  r.seed = j.value("seed", std::uint64_t{0});
  const auto counts = j.at("counts").get<std::vector<long>>();
  if (counts.size() != 8) throw std::invalid_argument("shot record needs 8 counts");
  long total = 0;
  for (int o = 0; o < 8; ++o) {
    if (counts[o] < 0) throw std::invalid_argument("negative count in shot record");
    r.counts[o] = counts[o];
    total += counts[o];
  }
  if (total != r.shots) throw std::invalid_argument("shot record counts do not sum to shots");
  return r;
}

inline json to_json(const EstimateTable& t) {
  json out = json::object();
  for (const auto& [obs, e] : t)
    out[obs.str()] = {{"estimate", e.value}, {"shots", e.shots}, {"plus", e.plus}};
  return out;
}

inline EstimateTable estimate_table_from_json(const json& j) {
  EstimateTable t;
  for (const auto& [key, v] : j.items())
    t[PauliObservable::parse(key)] = {v.at("estimate").get<double>(), v.value("shots", 0L),
                                      v.value("plus", 0L)};
  return t;
}

inline json to_json(const SolverConfig& c) {
  return {{"max_iterations", c.max_iterations},
          {"tolerance", c.tolerance},
          {"penalty", c.penalty},
          {"alpha", c.alpha},
          {"adaptive_penalty", c.adaptive_penalty}};
}

inline SolverConfig solver_config_from_json(const json& j, SolverConfig c = {}) {
  for (const auto& [key, v] : j.items()) {
    if (key == "max_iterations") c.max_iterations = v.get<int>();
    else if (key == "tolerance") c.tolerance = v.get<double>();
    else if (key == "penalty") c.penalty = v.get<double>();
    else if (key == "alpha") c.alpha = v.get<double>();
    else if (key == "adaptive_penalty") c.adaptive_penalty = v.get<bool>();
    else throw std::invalid_argument("unknown solver key: " + key);
  }
  c.validate();
  return c;
}

}  // namespace qcollide
