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

// Batch experiments behind the command-line front end. Every experiment type has a
// JSON form; the resolved config plus the seed fully determines the output.

#pragma once

#include <string>
#include <vector>

#include "qcollide/circuit.hpp"
#include "qcollide/cs.hpp"
#include "qcollide/io.hpp"
#include "qcollide/measures.hpp"
#include "qcollide/purification.hpp"

namespace qcollide {

inline constexpr const char* kSoftwareVersion = "0.1.0";

enum class Scale { desk, paper };

inline Scale parse_scale(const std::string& s) {
  if (s == "desk") return Scale::desk;
  if (s == "paper") return Scale::paper;
  throw std::invalid_argument("unknown scale: " + s);
}

/// Rejects keys outside `allowed`.
inline void require_known_keys(const json& j, std::initializer_list<const char*> allowed, const char* what) {
  if (!j.is_object()) throw std::invalid_argument(std::string(what) + " config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw std::invalid_argument(std::string("unknown ") + what + " key: " + key);
  }
}

/// Inclusive grid; a single point requires low == high.
struct GridSpec {
  double low = 0;
  double high = kPi;
  int points = 50;

  void validate() const {
    if (!(low >= 0 && high <= kPi && low <= high))
      throw std::invalid_argument("grid must lie within [0, pi] with low <= high");
    if (points < 1) throw std::invalid_argument("grid needs at least one point");
    if (points == 1 && low != high)
      throw std::invalid_argument("a one-point grid needs low == high");
    if (points >= 2 && low == high) throw std::invalid_argument("grid with low == high needs one point");
  }

  std::vector<double> values() const {
    validate();
    std::vector<double> v;
    for (int i = 0; i < points; ++i)
      v.push_back(points == 1 ? low : low + (high - low) * i / (points - 1));
    return v;
  }
};

inline json to_json(const GridSpec& g) {
  return {{"low", g.low}, {"high", g.high}, {"points", g.points}};
}

inline GridSpec grid_from_json(const json& j, GridSpec g) {
  require_known_keys(j, {"low", "high", "points"}, "grid");
  g.low = j.value("low", g.low);
  g.high = j.value("high", g.high);
  g.points = j.value("points", g.points);
  return g;
}

inline std::string ambient_label(const std::vector<AmbientPhoton>& photons) {
  if (photons.empty()) return "none";
  std::string s;
  for (const auto& a : photons) {
    if (!s.empty()) s += "+";
    s += env_char(a.env) + std::to_string(a.distance);
  }
  return s;
}

inline json ambient_json(const std::vector<AmbientPhoton>& photons) {
  json a = json::array();
  for (const auto& p : photons) a.push_back({{"env", std::string(1, env_char(p.env))}, {"distance", p.distance}});
  return a;
}

inline std::vector<AmbientPhoton> ambient_from_json(const json& j) {
  std::vector<AmbientPhoton> out;
  for (const auto& a : j) out.push_back({parse_env(a.value("env", std::string("B"))), a.at("distance").get<int>()});
  return out;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepSpec {
  std::string axis = "theta_se";  // or "theta_ee"
  GridSpec grid;
  CollisionConfig base;
  Preparation::Kind sigma_prep = Preparation::Kind::psi_plus;

  void validate() const {
    if (axis != "theta_se" && axis != "theta_ee")
      throw std::invalid_argument("sweep axis must be theta_se or theta_ee");
    grid.validate();
    base.validate();
  }

  static SweepSpec defaults(const std::string& axis, Scale) {
    SweepSpec s;
    s.axis = axis;
    if (axis == "theta_se") s.base.theta_ee = 3 * kPi / 5;
    else s.base.theta_se = kPi / 4;
    return s;
  }
};

inline json to_json(const SweepSpec& s) {
  return {{"axis", s.axis},
          {"grid", to_json(s.grid)},
          {"base", to_json(s.base)},
          {"sigma_prep", prep_name(s.sigma_prep)}};
}

inline SweepSpec sweep_from_json(const json& j, Scale scale) {
  require_known_keys(j, {"axis", "grid", "base", "sigma_prep"}, "sweep");
  SweepSpec s = SweepSpec::defaults(j.value("axis", std::string("theta_se")), scale);
  if (j.contains("grid")) s.grid = grid_from_json(j.at("grid"), s.grid);
  if (j.contains("base")) s.base = collision_config_from_json(j.at("base"), s.base);
  if (j.contains("sigma_prep")) s.sigma_prep = parse_prep(j.at("sigma_prep").get<std::string>());
  return s;
}

struct SweepRow {
  double theta_se = 0;
  double theta_ee = 0;
  int step = 0;
  double tmi = 0;
  double tln = 0;
  double trace_distance = 0;
  double nonmarkovianity = 0;
  double success_prob = 0;
};

/// Measures along one trajectory; sigma is the same dynamics from sigma_prep.
inline std::vector<SweepRow> trajectory_rows(const CollisionConfig& cfg, Preparation::Kind sigma_prep) {
  const Trajectory rho = run(cfg);
  CollisionConfig sc = cfg;
  sc.prep.kind = sigma_prep;
  const Trajectory sigma = run(sc);
  std::vector<SweepRow> rows;
  DistanceSeries dist;
  for (std::size_t i = 0; i < rho.points.size(); ++i) {
    const MatX r = rho.points[i].rho.matrix;
    const MatX s = sigma.points[i].rho.matrix;
    const double d = trace_distance(r, s);
    dist.push(d);
    rows.push_back({cfg.theta_se, cfg.theta_ee, rho.points[i].step, tmi(r), tln(r), d,
                    dist.nonmarkovianity.back(), rho.points[i].rho.success_probability});
  }
  return rows;
}

inline std::vector<SweepRow> run_sweep(const SweepSpec& spec, int threads = 1) {
  spec.validate();
  const auto values = spec.grid.values();
  std::vector<std::vector<SweepRow>> parts(values.size());
  parallel_for(values.size(), threads, [&](std::size_t g) {
    CollisionConfig cfg = spec.base;
    (spec.axis == "theta_se" ? cfg.theta_se : cfg.theta_ee) = values[g];
    parts[g] = trajectory_rows(cfg, spec.sigma_prep);
  });
  std::vector<SweepRow> rows;
  for (auto& p : parts) rows.insert(rows.end(), p.begin(), p.end());
  return rows;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "theta_se,theta_ee,step,tmi,tln,trace_distance,nonmarkovianity,success_prob\n";
  for (const auto& r : rows)
    out += format_double(r.theta_se) + "," + format_double(r.theta_ee) + "," + std::to_string(r.step) +
           "," + format_double(r.tmi) + "," + format_double(r.tln) + "," +
           format_double(r.trace_distance) + "," + format_double(r.nonmarkovianity) + "," +
           format_double(r.success_prob) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// ambient

struct AmbientSeries {
  std::string label;
  std::vector<AmbientPhoton> photons;
};

struct AmbientSpec {
  CollisionConfig base;
  std::vector<AmbientSeries> series;

  void validate() const {
    if (series.empty()) throw std::invalid_argument("ambient study needs at least one series");
    for (const auto& s : series) {
      CollisionConfig c = base;
      c.ambient = s.photons;
      c.validate();
    }
  }

  /// Baseline, 1-3 photons at distance 0, and one photon at 0/4/9/14.
  static AmbientSpec defaults(Scale) {
    AmbientSpec s;
    s.base.theta_se = kPi / 2;
    s.base.theta_ee = kPi / 2;
    auto add = [&](std::vector<AmbientPhoton> p) { s.series.push_back({ambient_label(p), p}); };
    add({});
    add({{Environment::B, 0}, {Environment::B, 0}});
    add({{Environment::B, 0}, {Environment::B, 0}, {Environment::B, 0}});
    for (int d : {0, 4, 9, 14}) add({{Environment::B, d}});
    return s;
  }
};

inline json to_json(const AmbientSpec& s) {
  json series = json::array();
  for (const auto& a : s.series) series.push_back({{"label", a.label}, {"photons", ambient_json(a.photons)}});
  return {{"base", to_json(s.base)}, {"series", series}};
}

inline AmbientSpec ambient_from_json(const json& j, Scale scale) {
  require_known_keys(j, {"base", "series"}, "ambient");
  AmbientSpec s = AmbientSpec::defaults(scale);
  if (j.contains("base")) s.base = collision_config_from_json(j.at("base"), s.base);
  if (j.contains("series")) {
    s.series.clear();
    for (const auto& a : j.at("series")) {
      auto photons = ambient_from_json(a.at("photons"));
      s.series.push_back({a.value("label", ambient_label(photons)), photons});
    }
  }
  return s;
}

struct AmbientRow {
  std::string ambient;
  int step = 0;
  double tmi = 0;
  double success_prob = 0;
};

inline std::vector<AmbientRow> run_ambient(const AmbientSpec& spec, int threads = 1) {
  spec.validate();
  std::vector<std::vector<AmbientRow>> parts(spec.series.size());
  parallel_for(spec.series.size(), threads, [&](std::size_t i) {
    CollisionConfig cfg = spec.base;
    cfg.ambient = spec.series[i].photons;
    for (const auto& p : run(cfg).points)
      parts[i].push_back({spec.series[i].label, p.step, tmi(MatX(p.rho.matrix)), p.rho.success_probability});
  });
  std::vector<AmbientRow> rows;
  for (auto& p : parts) rows.insert(rows.end(), p.begin(), p.end());
  return rows;
}

inline std::string ambient_csv(const std::vector<AmbientRow>& rows) {
  std::string out = "ambient,step,tmi,success_prob\n";
  for (const auto& r : rows)
    out += r.ambient + "," + std::to_string(r.step) + "," + format_double(r.tmi) + "," +
           format_double(r.success_prob) + "\n";
  return out;
}

/// Minimum TMI over a series and the first step with TMI < threshold (-1 if never).
struct SeriesSummary {
  double min_tmi = 0;
  int onset_step = -1;
};

inline SeriesSummary summarize_tmi(std::span<const double> tmi_by_step, double threshold) {
  SeriesSummary s;
  for (std::size_t t = 0; t < tmi_by_step.size(); ++t) {
    s.min_tmi = std::min(s.min_tmi, tmi_by_step[t]);
    if (s.onset_step < 0 && tmi_by_step[t] < threshold) s.onset_step = static_cast<int>(t);
  }
  return s;
}

// ---------------------------------------------------------------------------
// oracle-check

struct OracleSpec {
  CollisionConfig base;
  std::vector<double> thetas{kPi / 4, kPi / 2, 3 * kPi / 5};
  std::vector<std::vector<AmbientPhoton>> ambient_sets{{}, {{Environment::B, 2}}};
  double tolerance = 1e-9;

  static OracleSpec defaults(Scale) {
    OracleSpec s;
    s.base.n_cycles = 10;
    return s;
  }

  void validate() const {
    if (base.n_cycles > 10) throw std::invalid_argument("oracle-check supports at most 10 cycles");
    if (thetas.empty()) throw std::invalid_argument("oracle-check needs at least one theta");
    for (const auto& a : ambient_sets) {
      CollisionConfig c = base;
      c.ambient = a;
      c.validate();
    }
  }
};

inline json to_json(const OracleSpec& s) {
  json sets = json::array();
  for (const auto& a : s.ambient_sets) sets.push_back(ambient_json(a));
  return {{"base", to_json(s.base)}, {"thetas", s.thetas}, {"ambient_sets", sets}, {"tolerance", s.tolerance}};
}

inline OracleSpec oracle_from_json(const json& j, Scale scale) {
  require_known_keys(j, {"base", "thetas", "ambient_sets", "tolerance"}, "oracle-check");
  OracleSpec s = OracleSpec::defaults(scale);
  if (j.contains("base")) s.base = collision_config_from_json(j.at("base"), s.base);
  if (j.contains("thetas")) s.thetas = j.at("thetas").get<std::vector<double>>();
  if (j.contains("ambient_sets")) {
    s.ambient_sets.clear();
    for (const auto& a : j.at("ambient_sets")) s.ambient_sets.push_back(ambient_from_json(a));
  }
  s.tolerance = j.value("tolerance", s.tolerance);
  return s;
}

struct OracleRow {
  double theta_se = 0;
  double theta_ee = 0;
  std::string ambient;
  double max_deviation = 0;
  bool pass = false;
};

inline std::vector<OracleRow> run_oracle_check(const OracleSpec& spec, int threads = 1) {
  spec.validate();
  struct Job {
    double se, ee;
    const std::vector<AmbientPhoton>* ambient;
  };
  std::vector<Job> jobs;
  for (const auto& a : spec.ambient_sets)
    for (double se : spec.thetas)
      for (double ee : spec.thetas) jobs.push_back({se, ee, &a});
  std::vector<OracleRow> rows(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t i) {
    CollisionConfig cfg = spec.base;
    cfg.theta_se = jobs[i].se;
    cfg.theta_ee = jobs[i].ee;
    cfg.ambient = *jobs[i].ambient;
    const double dev = max_deviation(run(cfg), run_purified(cfg));
    rows[i] = {cfg.theta_se, cfg.theta_ee, ambient_label(cfg.ambient), dev, dev <= spec.tolerance};
  });
  return rows;
}

inline std::string oracle_csv(const std::vector<OracleRow>& rows) {
  std::string out = "theta_se,theta_ee,ambient,max_deviation,pass\n";
  for (const auto& r : rows)
    out += format_double(r.theta_se) + "," + format_double(r.theta_ee) + "," + r.ambient + "," +
           format_double(r.max_deviation) + "," + (r.pass ? "1" : "0") + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// tomo-bench

struct TomoBenchSpec {
  int pool_size = 100;
  int noisy_pool_size = 50;
  int max_cycles = 100;  // pool states are taken at a uniform step in [1, max_cycles]
  std::vector<int> settings_grid{5, 10, 14, 20, 27};
  std::vector<long> shots_grid{100, 1000, 10000};
  int noisy_settings = 14;
  bool resample_settings = true;
  SolverConfig solver;
  CollisionConfig base;

  static TomoBenchSpec defaults(Scale scale) {
    TomoBenchSpec s;
    if (scale == Scale::paper) {
      s.pool_size = 1775;
      s.noisy_pool_size = 1775;
    }
    return s;
  }

  void validate() const {
    if (pool_size < 1 || noisy_pool_size < 1) throw std::invalid_argument("state pool must be non-empty");
    if (max_cycles < 1) throw std::invalid_argument("max_cycles must be positive");
    for (int k : settings_grid)
      if (k < 1 || k > 27) throw std::invalid_argument("settings counts must lie in [1, 27]");
    if (noisy_settings < 1 || noisy_settings > 27)
      throw std::invalid_argument("noisy_settings must lie in [1, 27]");
    for (long m : shots_grid)
      if (m < 27) throw std::invalid_argument("shot budgets must cover every setting");
    solver.validate();
  }
};

inline json to_json(const TomoBenchSpec& s) {
  return {{"pool_size", s.pool_size},
          {"noisy_pool_size", s.noisy_pool_size},
          {"max_cycles", s.max_cycles},
          {"settings_grid", s.settings_grid},
          {"shots_grid", s.shots_grid},
          {"noisy_settings", s.noisy_settings},
          {"resample_settings", s.resample_settings},
          {"solver", to_json(s.solver)},
          {"base", to_json(s.base)}};
}

inline TomoBenchSpec tomo_bench_from_json(const json& j, Scale scale) {
  require_known_keys(j, {"pool_size", "noisy_pool_size", "max_cycles", "settings_grid", "shots_grid",
                         "noisy_settings", "resample_settings", "solver", "base"},
                     "tomo-bench");
  TomoBenchSpec s = TomoBenchSpec::defaults(scale);
  s.pool_size = j.value("pool_size", s.pool_size);
  s.noisy_pool_size = j.value("noisy_pool_size", s.noisy_pool_size);
  s.max_cycles = j.value("max_cycles", s.max_cycles);
  if (j.contains("settings_grid")) s.settings_grid = j.at("settings_grid").get<std::vector<int>>();
  if (j.contains("shots_grid")) s.shots_grid = j.at("shots_grid").get<std::vector<long>>();
  s.noisy_settings = j.value("noisy_settings", s.noisy_settings);
  s.resample_settings = j.value("resample_settings", s.resample_settings);
  if (j.contains("solver")) s.solver = solver_config_from_json(j.at("solver"), s.solver);
  if (j.contains("base")) s.base = collision_config_from_json(j.at("base"), s.base);
  return s;
}

struct PoolState {
  double theta_se = 0;
  double theta_ee = 0;
  int step = 0;
  Mat8 rho;
};

/// State i: uniform theta_se, theta_ee in [0, pi] and step in [1, max_cycles],
/// drawn from a seed derived from (seed, i).
inline std::vector<PoolState> generate_pool(const CollisionConfig& base, int size, int max_cycles,
                                            std::uint64_t seed, int threads = 1) {
  std::vector<PoolState> pool(static_cast<std::size_t>(size));
  parallel_for(pool.size(), threads, [&](std::size_t i) {
    Rng rng(derive_seed(seed, {0x706f6f6cULL, i}));
    for (;;) {
      CollisionConfig cfg = base;
      cfg.ambient.clear();
      cfg.theta_se = rng.uniform() * kPi;
      cfg.theta_ee = rng.uniform() * kPi;
      cfg.n_cycles = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_cycles)));
      try {
        pool[i] = {cfg.theta_se, cfg.theta_ee, cfg.n_cycles, run(cfg).points.back().rho.matrix};
        return;
      } catch (const PostSelectionExhausted&) {
        // redraw
      }
    }
  });
  return pool;
}

struct TomoBenchResult {
  BenchmarkReport settings;  // noiseless, grid = settings count
  BenchmarkReport shots;     // sampled, grid = total shots
};

inline TomoBenchResult run_tomo_bench(const TomoBenchSpec& spec, std::uint64_t seed, int threads = 1) {
  spec.validate();
  const int n = std::max(spec.pool_size, spec.noisy_pool_size);
  const auto pool = generate_pool(spec.base, n, spec.max_cycles, seed, threads);
  std::vector<Mat8> states;
  for (const auto& p : pool) states.push_back(p.rho);
  TomoBenchResult out;
  {
    std::vector<double> grid(spec.settings_grid.begin(), spec.settings_grid.end());
    const std::vector<BenchmarkMethod> methods{qst_noiseless(), cs_noiseless(spec.solver)};
    out.settings = benchmark_mse(std::span<const Mat8>(states.data(), spec.pool_size), methods, grid,
                                 derive_seed(seed, {1}), threads, spec.resample_settings);
  }
  {
    std::vector<double> grid(spec.shots_grid.begin(), spec.shots_grid.end());
    const std::vector<BenchmarkMethod> methods{cs_obsv(spec.noisy_settings, spec.solver),
                                               qst_sampled(spec.noisy_settings), qst_sampled(27)};
    out.shots = benchmark_mse(std::span<const Mat8>(states.data(), spec.noisy_pool_size), methods,
                              grid, derive_seed(seed, {2}), threads, spec.resample_settings);
  }
  return out;
}

// ---------------------------------------------------------------------------
// manifest

struct RunManifest {
  std::string command;
  json config;
  std::uint64_t seed = 0;
  std::string scale = "desk";
  int threads = 1;
  std::vector<std::string> outputs;
  double wall_clock_seconds = 0;
  json diagnostics = json::object();
};

inline constexpr const char* kSeedPolicy =
    "task seeds are splitmix64 derivations of the run seed and the task path "
    "(grid index, state index, ...); mt19937_64 engines per task";

inline json to_json(const RunManifest& m) {
  return {{"manifest_version", 1},
          {"software_version", kSoftwareVersion},
          {"command", m.command},
          {"seed", m.seed},
          {"seed_policy", kSeedPolicy},
          {"scale", m.scale},
          {"threads", m.threads},
          {"config", m.config},
          {"outputs", m.outputs},
          {"wall_clock_seconds", m.wall_clock_seconds},
          {"diagnostics", m.diagnostics}};
}

}  // namespace qcollide
