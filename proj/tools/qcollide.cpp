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

// qcollide: sweep | ambient | tomo-bench | oracle-check
//
// Exit codes: 0 success, 2 usage error, 3 numerical failure
// (post-selection exhausted, infeasible constraints, oracle mismatch).

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "qcollide/experiment.hpp"

namespace fs = std::filesystem;
using namespace qcollide;

namespace {

constexpr int kUsageError = 2;
constexpr int kNumericalError = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string config_path;
  std::uint64_t seed = 20240517;
  std::string out = ".";
  int threads = 1;
  std::string scale = "desk";
};

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config: " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("config is not valid JSON: ") + e.what());
  }
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

class Runner {
 public:
  Runner(Globals g, std::string command) : g_(std::move(g)), command_(std::move(command)) {}

  /// Command config from --config; a manifest supplies config, seed and scale.
  json config(const CLI::App& app) {
    if (g_.config_path.empty()) return json::object();
    json j = load_json(g_.config_path);
    if (j.contains("manifest_version")) {
      if (j.value("command", std::string()) != command_)
        throw UsageError("manifest was written by '" + j.value("command", std::string()) + "'");
      if (app.get_parent()->count("--seed") == 0) g_.seed = j.at("seed").get<std::uint64_t>();
      if (app.get_parent()->count("--scale") == 0) g_.scale = j.value("scale", g_.scale);
      return j.at("config");
    }
    if (j.contains("command") && j.at("command") != command_)
      throw UsageError("config is for command " + j.at("command").get<std::string>());
    j.erase("command");
    return j;
  }

  Scale scale() const { return parse_scale(g_.scale); }
  const Globals& globals() const { return g_; }

  void finish(const json& resolved, const std::vector<std::pair<std::string, std::string>>& files,
              json diagnostics = json::object()) {
    fs::create_directories(g_.out);
    RunManifest m;
    m.command = command_;
    m.config = resolved;
    m.seed = g_.seed;
    m.scale = g_.scale;
    m.threads = g_.threads;
    for (const auto& [name, text] : files) {
      write_file(fs::path(g_.out) / name, text);
      m.outputs.push_back((fs::path(g_.out) / name).string());
    }
    m.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    m.diagnostics = std::move(diagnostics);
    const fs::path manifest = fs::path(g_.out) / (command_ + "_manifest.json");
    write_file(manifest, to_json(m).dump(2) + "\n");
    std::cerr << "wrote";
    for (const auto& o : m.outputs) std::cerr << " " << o;
    std::cerr << " " << manifest.string() << "\n";
  }

 private:
  Globals g_;
  std::string command_;
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Photonic collision-model scrambling simulator"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "JSON config or a run manifest");
  app.add_option("--seed", g.seed, "base seed (u64)");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--scale", g.scale, "desk | paper")->check(CLI::IsMember({"desk", "paper"}));

  auto* sweep = app.add_subcommand("sweep", "theta_se / theta_ee sweep of TMI, TLN and trace distance");
  std::optional<std::string> axis;
  std::optional<int> points, n_cycles_sweep;
  std::optional<double> low, high, fixed_se, fixed_ee;
  std::optional<std::string> readout_sweep, sigma_prep;
  sweep->add_option("--axis", axis, "theta_se | theta_ee")->check(CLI::IsMember({"theta_se", "theta_ee"}));
  sweep->add_option("--points", points, "grid points");
  sweep->add_option("--low", low, "grid start (rad)");
  sweep->add_option("--high", high, "grid end (rad)");
  sweep->add_option("--theta-se", fixed_se, "theta_se when sweeping theta_ee");
  sweep->add_option("--theta-ee", fixed_ee, "theta_ee when sweeping theta_se");
  sweep->add_option("--n-cycles", n_cycles_sweep, "collision cycles");
  sweep->add_option("--readout", readout_sweep, "excitation | coincidence");
  sweep->add_option("--distance-target", sigma_prep, "preparation of the trace-distance partner state");

  auto* ambient = app.add_subcommand("ambient", "ambient-photon study");
  std::optional<int> n_cycles_ambient;
  ambient->add_option("--n-cycles", n_cycles_ambient, "collision cycles");

  auto* tomo = app.add_subcommand("tomo-bench", "QST vs CS TMI-MSE benchmark");
  std::optional<int> pool_size, noisy_pool_size;
  tomo->add_option("--pool", pool_size, "noiseless pool size");
  tomo->add_option("--noisy-pool", noisy_pool_size, "sampled pool size");
  bool fixed_settings = false;
  tomo->add_flag("--fixed-settings", fixed_settings, "same random settings for every state");

  auto* oracle = app.add_subcommand("oracle-check", "incremental vs purification engine");
  std::optional<int> n_cycles_oracle;
  oracle->add_option("--n-cycles", n_cycles_oracle, "collision cycles (<= 10)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*sweep) {
      Runner r(g, "sweep");
      json cj = r.config(*sweep);
      if (axis) cj["axis"] = *axis;
      SweepSpec spec = sweep_from_json(cj, r.scale());
      if (points) spec.grid.points = *points;
      if (low) spec.grid.low = *low;
      if (high) spec.grid.high = *high;
      if (fixed_se) spec.base.theta_se = *fixed_se;
      if (fixed_ee) spec.base.theta_ee = *fixed_ee;
      if (n_cycles_sweep) spec.base.n_cycles = *n_cycles_sweep;
      if (readout_sweep) spec.base.readout = parse_readout(*readout_sweep);
      if (sigma_prep) spec.sigma_prep = parse_prep(*sigma_prep);
      try {
        spec.validate();
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      const auto rows = run_sweep(spec, r.globals().threads);
      r.finish(to_json(spec), {{"sweep.csv", sweep_csv(rows)}});
    } else if (*ambient) {
      Runner r(g, "ambient");
      AmbientSpec spec = ambient_from_json(r.config(*ambient), r.scale());
      if (n_cycles_ambient) spec.base.n_cycles = *n_cycles_ambient;
      try {
        spec.validate();
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      const auto rows = run_ambient(spec, r.globals().threads);
      r.finish(to_json(spec), {{"ambient.csv", ambient_csv(rows)}});
    } else if (*tomo) {
      Runner r(g, "tomo-bench");
      TomoBenchSpec spec = tomo_bench_from_json(r.config(*tomo), r.scale());
      if (pool_size) spec.pool_size = *pool_size;
      if (noisy_pool_size) spec.noisy_pool_size = *noisy_pool_size;
      if (fixed_settings) spec.resample_settings = false;
      try {
        spec.validate();
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      const auto res = run_tomo_bench(spec, r.globals().seed, r.globals().threads);
      json diag = {{"nonconverged_settings_sweep", res.settings.nonconverged()},
                   {"nonconverged_shots_sweep", res.shots.nonconverged()}};
      if (diag["nonconverged_settings_sweep"] != 0 || diag["nonconverged_shots_sweep"] != 0)
        std::cerr << "warning: non-converged solves: " << diag.dump() << "\n";
      r.finish(to_json(spec),
               {{"tomo_settings.csv", benchmark_csv(res.settings)},
                {"tomo_shots.csv", benchmark_csv(res.shots)}},
               diag);
    } else if (*oracle) {
      Runner r(g, "oracle-check");
      OracleSpec spec = oracle_from_json(r.config(*oracle), r.scale());
      if (n_cycles_oracle) spec.base.n_cycles = *n_cycles_oracle;
      try {
        spec.validate();
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      const auto rows = run_oracle_check(spec, r.globals().threads);
      bool ok = true;
      double worst = 0;
      for (const auto& row : rows) {
        ok = ok && row.pass;
        worst = std::max(worst, row.max_deviation);
      }
      r.finish(to_json(spec), {{"oracle_check.csv", oracle_csv(rows)}},
               {{"max_deviation", worst}, {"pass", ok}});
      std::cout << (ok ? "PASS" : "FAIL") << " oracle-check max deviation " << format_double(worst)
                << " (tolerance " << format_double(spec.tolerance) << ")\n";
      if (!ok) return kNumericalError;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsageError;
  } catch (const PostSelectionExhausted& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumericalError;
  } catch (const InfeasibleConstraints& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumericalError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsageError;
  } catch (const json::exception& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
