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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "qcollide/experiment.hpp"

namespace fs = std::filesystem;
using namespace qcollide;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qcollide_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

/// Runs the CLI binary; returns its exit status, or -1 when unavailable.
int cli(const std::string& args) {
  const char* exe = std::getenv("QCOLLIDE_CLI");
  if (!exe) return -1;
  const std::string cmd = std::string("\"") + exe + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

#define REQUIRE_CLI() \
  if (!std::getenv("QCOLLIDE_CLI")) GTEST_SKIP() << "QCOLLIDE_CLI not set"

}  // namespace

TEST(Grid, ValuesAndValidation) {
  GridSpec g;
  const auto v = g.values();
  ASSERT_EQ(v.size(), 50u);
  EXPECT_EQ(v.front(), 0.0);
  EXPECT_EQ(v.back(), kPi);
  EXPECT_THROW((GridSpec{0, 4.0, 5}.validate()), std::invalid_argument);
  EXPECT_THROW((GridSpec{1, 0.5, 5}.validate()), std::invalid_argument);
  EXPECT_THROW((GridSpec{0, 1, 1}.validate()), std::invalid_argument);
  EXPECT_THROW((GridSpec{0, 1, 0}.validate()), std::invalid_argument);
  EXPECT_NO_THROW((GridSpec{kPi, kPi, 1}.validate()));
}

TEST(Sweep, DefaultsFollowFixedParameters) {
  const auto se = SweepSpec::defaults("theta_se", Scale::desk);
  EXPECT_DOUBLE_EQ(se.base.theta_ee, 3 * kPi / 5);
  EXPECT_EQ(se.base.n_cycles, 100);
  EXPECT_EQ(se.grid.points, 50);
  const auto ee = SweepSpec::defaults("theta_ee", Scale::desk);
  EXPECT_DOUBLE_EQ(ee.base.theta_se, kPi / 4);
}

TEST(Sweep, FullDeskGridRowCount) {
  const auto spec = SweepSpec::defaults("theta_se", Scale::desk);
  const auto rows = run_sweep(spec);
  EXPECT_EQ(rows.size(), 5050u);
  const auto csv = sweep_csv(rows);
  EXPECT_EQ(line_count(csv), 5051u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ASSERT_EQ(rows[i].step, static_cast<int>(i % 101));
    ASSERT_DOUBLE_EQ(rows[i].theta_ee, 3 * kPi / 5);
    ASSERT_GE(rows[i].trace_distance, 0.0);
    ASSERT_LE(rows[i].trace_distance, 1.0);
    if (rows[i].step > 0) {
      ASSERT_GE(rows[i].nonmarkovianity, rows[i - 1].nonmarkovianity);
    }
  }
}

TEST(Sweep, DecoupledSinglePoint) {
  auto spec = SweepSpec::defaults("theta_se", Scale::desk);
  spec.grid = {kPi, kPi, 1};
  const auto rows = run_sweep(spec);
  ASSERT_EQ(rows.size(), 101u);
  for (const auto& r : rows) EXPECT_NEAR(r.tmi, 0.0, 1e-9);
}

TEST(Sweep, ThetaEeAxisColumns) {
  json j = {{"axis", "theta_ee"}, {"grid", {{"points", 3}}}, {"base", {{"n_cycles", 20}}}};
  const auto spec = sweep_from_json(j, Scale::desk);
  const auto rows = run_sweep(spec);
  ASSERT_EQ(rows.size(), 63u);
  EXPECT_DOUBLE_EQ(rows[0].theta_se, kPi / 4);
  EXPECT_DOUBLE_EQ(rows[21].theta_ee, kPi / 2);
  const auto csv = sweep_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "theta_se,theta_ee,step,tmi,tln,trace_distance,nonmarkovianity,success_prob");
  // rho and sigma start orthogonal
  EXPECT_NEAR(rows[0].trace_distance, 1.0, 1e-12);
  EXPECT_EQ(rows[0].nonmarkovianity, 0.0);
}

TEST(Sweep, ThreadCountDoesNotChangeOutput) {
  json j = {{"grid", {{"points", 4}}}, {"base", {{"n_cycles", 15}}}};
  const auto spec = sweep_from_json(j, Scale::desk);
  EXPECT_EQ(sweep_csv(run_sweep(spec, 1)), sweep_csv(run_sweep(spec, 3)));
}

TEST(Sweep, RejectsUnknownKeys) {
  EXPECT_THROW(sweep_from_json(json{{"base", {{"n_cycle", 3}}}}, Scale::desk), std::invalid_argument);
  EXPECT_THROW(sweep_from_json(json{{"points", 3}}, Scale::desk), std::invalid_argument);
  EXPECT_THROW(tomo_bench_from_json(json{{"pool", 3}}, Scale::desk), std::invalid_argument);
  EXPECT_THROW(ambient_from_json(json{{"series", json::array()}, {"extra", 1}}, Scale::desk), std::invalid_argument);
}

TEST(Ambient, EmptyListReproducesBaseline) {
  AmbientSpec spec = AmbientSpec::defaults(Scale::desk);
  spec.base.n_cycles = 30;
  spec.series = {{"none", {}}};
  const auto rows = run_ambient(spec);
  CollisionConfig cfg = spec.base;
  const auto base = trajectory_rows(cfg, Preparation::Kind::psi_plus);
  ASSERT_EQ(rows.size(), base.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].tmi, base[i].tmi);
    EXPECT_EQ(rows[i].success_prob, base[i].success_prob);
  }
}

TEST(Ambient, DefaultSeriesAndCsv) {
  AmbientSpec spec = AmbientSpec::defaults(Scale::desk);
  EXPECT_EQ(spec.series.size(), 7u);
  EXPECT_EQ(spec.series[1].label, "B0+B0");
  spec.base.n_cycles = 16;
  const auto rows = run_ambient(spec);
  EXPECT_EQ(rows.size(), 7u * 17u);
  const auto csv = ambient_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "ambient,step,tmi,success_prob");
  spec.base.n_cycles = 14;  // distance 14 now out of range
  EXPECT_THROW(spec.validate(), std::invalid_argument);
}

TEST(Ambient, SummaryOnsetAndMinimum) {
  const std::vector<double> s{0, -0.01, -0.06, -0.2, -0.03};
  const auto sum = summarize_tmi(s, -0.05);
  EXPECT_EQ(sum.onset_step, 2);
  EXPECT_EQ(sum.min_tmi, -0.2);
  EXPECT_EQ(summarize_tmi(std::vector<double>{0, -0.01}, -0.05).onset_step, -1);
}

TEST(OracleCheck, DefaultsPass) {
  const auto rows = run_oracle_check(OracleSpec::defaults(Scale::desk));
  EXPECT_EQ(rows.size(), 18u);
  for (const auto& r : rows) EXPECT_TRUE(r.pass) << r.theta_se << " " << r.theta_ee << " " << r.ambient;
}

TEST(OracleCheck, DecoupledIsExact) {
  OracleSpec spec = OracleSpec::defaults(Scale::desk);
  spec.thetas = {kPi};
  spec.ambient_sets = {{}};
  const auto rows = run_oracle_check(spec);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_LE(rows[0].max_deviation, 1e-15);
  spec.base.n_cycles = 11;
  EXPECT_THROW(spec.validate(), std::invalid_argument);
}

TEST(TomoBench, PoolIsSeededAndInRange) {
  const auto a = generate_pool(CollisionConfig{}, 8, 30, 77);
  const auto b = generate_pool(CollisionConfig{}, 8, 30, 77, 3);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].rho, b[i].rho);
    EXPECT_GE(a[i].theta_se, 0.0);
    EXPECT_LE(a[i].theta_se, kPi);
    EXPECT_GE(a[i].step, 1);
    EXPECT_LE(a[i].step, 30);
    EXPECT_NEAR(a[i].rho.trace().real(), 1.0, 1e-10);
  }
  EXPECT_NE(a[0].theta_se, a[1].theta_se);
}

TEST(TomoBench, SingleStateFullSettingsIsExact) {
  TomoBenchSpec spec = TomoBenchSpec::defaults(Scale::desk);
  spec.pool_size = 1;
  spec.noisy_pool_size = 1;
  spec.settings_grid = {27};
  spec.shots_grid = {1000};
  const auto res = run_tomo_bench(spec, 5);
  EXPECT_LT(res.settings.find("qst", 27).mse, 1e-10);
  EXPECT_LT(res.settings.find("cs", 27).mse, 1e-10);
  EXPECT_EQ(res.shots.rows.size(), 3u);
}

TEST(TomoBench, ScaleAndValidation) {
  EXPECT_EQ(TomoBenchSpec::defaults(Scale::paper).pool_size, 1775);
  TomoBenchSpec s;
  s.shots_grid = {10};
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = {};
  s.settings_grid = {28};
  EXPECT_THROW(s.validate(), std::invalid_argument);
  EXPECT_THROW(tomo_bench_from_json(json{{"solver", {{"penalty", -1}}}}, Scale::desk), std::invalid_argument);
}

TEST(Schedule, JsonListsRegistryAndOps) {
  CollisionConfig cfg;
  cfg.n_cycles = 2;
  cfg.ambient = {{Environment::B, 1}};
  const json j = to_json(build_schedule(cfg));
  EXPECT_EQ(j.at("n_cycles"), 2);
  EXPECT_EQ(j.at("registry").size(), 8u);
  int births = 0, injects = 0;
  for (const auto& ins : j.at("instructions")) {
    births += ins.at("op") == "birth";
    injects += ins.at("op") == "inject";
  }
  EXPECT_EQ(births, 4);
  EXPECT_EQ(injects, 1);
}

TEST(ConfigJson, RoundTrip) {
  CollisionConfig cfg;
  cfg.theta_se = 0.3;
  cfg.phi_ee = 1.1;
  cfg.readout = Readout::coincidence;
  cfg.ambient = {{Environment::A, 3}};
  const auto back = collision_config_from_json(json::parse(to_json(cfg).dump()));
  EXPECT_EQ(to_json(back), to_json(cfg));
}

TEST(Manifest, Fields) {
  RunManifest m;
  m.command = "sweep";
  m.seed = 9;
  m.outputs = {"a.csv"};
  const json j = to_json(m);
  for (const char* k : {"manifest_version", "software_version", "command", "seed", "seed_policy", "scale",
                        "threads", "config", "outputs", "wall_clock_seconds", "diagnostics"})
    EXPECT_TRUE(j.contains(k)) << k;
}

TEST(Cli, ExitCodes) {
  REQUIRE_CLI();
  const fs::path out = scratch("exit");
  EXPECT_EQ(cli(""), 2);
  EXPECT_EQ(cli("bogus"), 2);
  EXPECT_EQ(cli("sweep --points 0 --out " + out.string()), 2);
  EXPECT_EQ(cli("sweep --low 1 --high 0.5 --out " + out.string()), 2);
  EXPECT_EQ(cli("sweep --config /nonexistent.json --out " + out.string()), 2);
  EXPECT_EQ(cli("oracle-check --n-cycles 11 --out " + out.string()), 2);
  EXPECT_EQ(cli("oracle-check --n-cycles 3 --out " + out.string()), 0);
  EXPECT_TRUE(fs::exists(out / "oracle_check.csv"));
  EXPECT_TRUE(fs::exists(out / "oracle-check_manifest.json"));

  // product preparation with zero rotation and full SE transfer empties the
  // system rails under coincidence readout: numerical failure
  const fs::path cfg = out / "exhaust.json";
  std::ofstream(cfg) << R"({"grid": {"low": 0, "high": 0, "points": 1},
    "base": {"n_cycles": 3, "readout": "coincidence", "prep": {"kind": "product",
    "rotations": [{"theta": 0, "phi": 0}, {"theta": 0, "phi": 0}, {"theta": 0, "phi": 0}]}}})";
  EXPECT_EQ(cli("sweep --config " + cfg.string() + " --out " + out.string()), 3);
  fs::remove_all(out);
}

TEST(Cli, ManifestRerunIsByteIdentical) {
  REQUIRE_CLI();
  const fs::path a = scratch("run_a"), b = scratch("run_b");
  ASSERT_EQ(cli("--seed 123 tomo-bench --pool 3 --noisy-pool 2 --out " + a.string()), 0);
  ASSERT_EQ(cli("--config " + (a / "tomo-bench_manifest.json").string() + " tomo-bench --out " + b.string()), 0);
  for (const char* f : {"tomo_settings.csv", "tomo_shots.csv"}) {
    const auto x = slurp(a / f), y = slurp(b / f);
    EXPECT_FALSE(x.empty());
    EXPECT_EQ(x, y) << f;
  }
  const json m = json::parse(slurp(a / "tomo-bench_manifest.json"));
  EXPECT_EQ(m.at("seed"), 123);
  EXPECT_EQ(m.at("config").at("pool_size"), 3);
  EXPECT_EQ(m.at("outputs").size(), 2u);

  ASSERT_EQ(cli("sweep --points 2 --n-cycles 5 --out " + a.string()), 0);
  ASSERT_EQ(cli("--config " + (a / "sweep_manifest.json").string() + " sweep --out " + b.string()), 0);
  EXPECT_EQ(slurp(a / "sweep.csv"), slurp(b / "sweep.csv"));
  EXPECT_EQ(line_count(slurp(a / "sweep.csv")), 1u + 2u * 6u);
  fs::remove_all(a);
  fs::remove_all(b);
}
