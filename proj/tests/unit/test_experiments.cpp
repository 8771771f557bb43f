// Copyright 2026 The tnpqc Authors
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

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include "tnpqc/experiments.hpp"

namespace tnpqc {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

json ground_state_config() {
  return json::parse(R"({
    "schema_version": 1,
    "kind": "ground-state",
    "name": "tiny",
    "hamiltonian": {"model": "tfim-1d", "n": 4, "J": 1.0, "g": 0.7},
    "ansatz": {"template": "A", "repetitions": 2},
    "methods": [{"label": "pure"}, {"label": "umpo", "network": "umpo1d", "layers": 1}],
    "optimizer": {"learning_rate": 0.1, "max_steps": 15, "tolerance": 1e-9},
    "seeds": [3, 4]
  })");
}

std::string error_path(const json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<accepted>";
}

std::string csv_text(const Table& t) {
  std::ostringstream out;
  write_csv(out, t);
  return out.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("tnpqc_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

TEST(Config, ParsesAndRoundTrips) {
  const ExperimentConfig c = parse_config(ground_state_config());
  EXPECT_EQ(c.kind, ExperimentKind::kGroundState);
  EXPECT_EQ(c.name, "tiny");
  ASSERT_EQ(c.methods.size(), 2u);
  EXPECT_FALSE(c.methods[0].network.has_value());
  EXPECT_EQ(*c.methods[1].network, LayoutKind::kUmpo1d);
  EXPECT_EQ(c.optimizer.max_steps, 15);
  EXPECT_EQ(c.optimizer.model.gradient, GradientMethod::kAdjoint);
  const json resolved = to_json(c);
  EXPECT_EQ(to_json(parse_config(resolved)), resolved);
}

TEST(Config, EveryShippedConfigValidatesAndRoundTrips) {
  int seen = 0;
  for (const auto& entry : fs::directory_iterator(TNPQC_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    SCOPED_TRACE(entry.path().string());
    const ExperimentConfig c = load_config(entry.path());
    EXPECT_EQ(to_json(parse_config(to_json(c))), to_json(c));
    ++seen;
  }
  EXPECT_GE(seen, 7);
}

TEST(Config, FieldPathsInErrors) {
  json j = ground_state_config();
  j["hamiltonian"].erase("J");
  EXPECT_EQ(error_path(j), "hamiltonian.J");

  j = ground_state_config();
  j.erase("hamiltonian");
  EXPECT_EQ(error_path(j), "hamiltonian");

  j = ground_state_config();
  j["methods"][1]["layers"] = 0;
  EXPECT_EQ(error_path(j), "methods[1].layers");

  j = ground_state_config();
  j["methods"][1] = json{{"label", "ttn"}, {"network", "uttn1d"}};
  j["hamiltonian"]["n"] = 6;
  EXPECT_EQ(error_path(j), "methods[1].network");

  j = ground_state_config();
  j["optimizer"]["tolerance"] = "small";
  EXPECT_EQ(error_path(j), "optimizer.tolerance");

  j = ground_state_config();
  j["seeds"] = json::array({1, 1});
  EXPECT_EQ(error_path(j), "seeds[1]");

  j = ground_state_config();
  j["seeds"] = json::array({-4});
  EXPECT_EQ(error_path(j), "seeds[0]");
}

TEST(Config, RejectsUnknownKindVersionAndFields) {
  json j = ground_state_config();
  j["kind"] = "ground_state";
  EXPECT_EQ(error_path(j), "kind");

  j = ground_state_config();
  j["schema_version"] = 2;
  EXPECT_EQ(error_path(j), "schema_version");

  j = ground_state_config();
  j["optimiser"] = json::object();
  EXPECT_EQ(error_path(j), "optimiser");

  j = ground_state_config();
  j["noise"] = {{"p1", 0.1}, {"p2", 0.1}, {"trajectories", 4}, {"seed", 1}};
  EXPECT_EQ(error_path(j), "noise");

  j = ground_state_config();
  j["ansatz"]["template"] = "B";
  EXPECT_EQ(error_path(j), "ansatz");

  EXPECT_EQ(error_path(json::array()), "<root>");
}

TEST(Config, SeedsAreRequired) {
  json j = ground_state_config();
  j.erase("seeds");
  EXPECT_EQ(error_path(j), "seeds");
  j["seeds"] = json::array();
  EXPECT_EQ(error_path(j), "seeds");
}

TEST(Config, TwoDimensionalNetworkNeedsAGrid) {
  json j = ground_state_config();
  j["methods"][1] = {{"label", "g"}, {"network", "umpo2d"}};
  EXPECT_EQ(error_path(j), "methods[1].network");
  j["hamiltonian"] = {{"model", "tfim-2d"}, {"rows", 2}, {"cols", 2}, {"J", 1.0}, {"g", 1.0}};
  EXPECT_EQ(error_path(j), "<accepted>");
}

TEST(Config, JRangeExpandsInclusively) {
  json j = ground_state_config();
  j["kind"] = "j-sweep";
  j["J_values"] = {{"start", 0.7}, {"stop", 1.3}, {"step", 0.1}};
  const auto c = parse_config(j);
  ASSERT_EQ(c.j_values.size(), 7u);
  EXPECT_NEAR(c.j_values.back(), 1.3, 1e-12);
}

TEST(Config, NoiseKindFixesTheStepCount) {
  json j = ground_state_config();
  j["kind"] = "noise";
  j["noise"] = {{"p1", 0.01}, {"p2", 0.02}, {"trajectories", 3}, {"seed", 9}};
  EXPECT_FALSE(parse_config(j).optimizer.stop_on_convergence);
  j["optimizer"]["stop_on_convergence"] = true;
  EXPECT_EQ(error_path(j), "optimizer.stop_on_convergence");
  j["optimizer"].erase("stop_on_convergence");
  j["noise"]["trajectories"] = 1;
  EXPECT_EQ(error_path(j), "noise.trajectories");
}

TEST(Config, SeedOverride) {
  ExperimentConfig c = parse_config(ground_state_config());
  override_seed(c, 42);
  ASSERT_EQ(c.seeds.size(), 1u);
  EXPECT_EQ(c.seeds[0], 42u);
}

TEST(Csv, RealsUseSeventeenDigits) {
  EXPECT_EQ(format_real(0.1), "0.10000000000000001");
  EXPECT_EQ(format_real(-2.0), "-2");
  EXPECT_EQ(format_real(1e-300), "1e-300");
  EXPECT_EQ(format_real(1.0 / 3.0), "0.33333333333333331");
  EXPECT_EQ(std::strtod(format_real(M_PI).c_str(), nullptr), M_PI);
  EXPECT_EQ(format_real(std::nan("")), "nan");
}

TEST(Csv, QuotesOnlyWhenNeeded) {
  Table t({"x", {"a", "b", "c"}});
  t.add_row({std::string("plain"), std::int64_t{7}, 0.5});
  t.add_row({std::string("has,comma"), std::int64_t{-1}, 2.0});
  t.add_row({std::string("say \"hi\""), std::int64_t{0}, 0.0});
  EXPECT_EQ(csv_text(t), "a,b,c\nplain,7,0.5\n\"has,comma\",-1,2\n\"say \"\"hi\"\"\",0,0\n");
  EXPECT_THROW(t.add_row({std::int64_t{1}}), std::logic_error);
}

TEST(Threads, ResolutionOrder) {
  EXPECT_EQ(resolve_threads(3), 3);
  EXPECT_THROW(resolve_threads(0), std::invalid_argument);
  ::setenv(kThreadsEnv, "5", 1);
  EXPECT_EQ(resolve_threads(std::nullopt), 5);
  EXPECT_EQ(resolve_threads(2), 2);
  ::setenv(kThreadsEnv, "many", 1);
  EXPECT_THROW(resolve_threads(std::nullopt), std::invalid_argument);
  ::unsetenv(kThreadsEnv);
  EXPECT_GE(resolve_threads(std::nullopt), 1);
}

TEST(Threads, ParallelForCoversEveryIndexAndRethrows) {
  std::vector<int> hits(50, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(10, 3,
                            [](std::size_t i) {
                              if (i == 6) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
}

TEST(Run, GroundStateTablesMatchSchema) {
  const ExperimentConfig c = parse_config(ground_state_config());
  const ExperimentResult r = run_experiment(c);
  ASSERT_EQ(r.tables.size(), 3u);
  EXPECT_EQ(r.tables[0].schema().suffix, "summary");
  EXPECT_EQ(r.tables[1].schema().suffix, "trace_pure");
  EXPECT_EQ(r.tables[2].schema().suffix, "trace_umpo");
  const auto declared = output_schema(ExperimentKind::kGroundState);
  EXPECT_EQ(r.tables[0].schema().columns, declared[0].columns);
  EXPECT_EQ(r.tables[2].schema().columns, declared[1].columns);
  EXPECT_EQ(r.tables[0].rows().size(), 4u);
  EXPECT_EQ(r.tables[1].rows().size(), 2u * 16u);

  const double e0 = r.summary.at("exact_ground_energy").get<double>();
  for (const auto& row : r.tables[0].rows()) {
    EXPECT_NEAR(std::get<double>(row[7]), e0, 0.0);
    EXPECT_GE(std::get<double>(row[6]), e0 - 1e-9);
  }
  EXPECT_TRUE(r.failures.empty());
}

TEST(Run, ThreadCountDoesNotChangeOutput) {
  const ExperimentConfig c = parse_config(ground_state_config());
  const auto one = run_experiment(c, {1, {}});
  const auto three = run_experiment(c, {3, {}});
  ASSERT_EQ(one.tables.size(), three.tables.size());
  for (std::size_t i = 0; i < one.tables.size(); ++i) EXPECT_EQ(csv_text(one.tables[i]), csv_text(three.tables[i]));
}

TEST(Run, NoiseKindAggregatesRepeats) {
  json j = ground_state_config();
  j["kind"] = "noise";
  j["noise"] = {{"p1", 0.05}, {"p2", 0.05}, {"trajectories", 4}, {"seed", 9}};
  j["optimizer"]["max_steps"] = 5;
  j["seeds"] = json::array({1});
  const auto r = run_experiment(parse_config(j));
  ASSERT_EQ(r.tables.size(), 2u);
  const Table& trace = r.tables[0];
  const Table& repeats = r.tables[1];
  EXPECT_EQ(trace.rows().size(), 2u * 6u);
  EXPECT_EQ(repeats.rows().size(), 2u * 4u * 6u);
  // Step 3 of the first method: mean and error bar from the four repeats.
  std::vector<double> v;
  for (const auto& row : repeats.rows()) {
    if (std::get<std::string>(row[0]) == "pure" && std::get<std::int64_t>(row[4]) == 3) v.push_back(std::get<double>(row[5]));
  }
  ASSERT_EQ(v.size(), 4u);
  double mean = 0.0;
  for (double x : v) mean += x / 4.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const auto& row = trace.rows()[3];
  EXPECT_NEAR(std::get<double>(row[3]), mean, 1e-12);
  EXPECT_NEAR(std::get<double>(row[4]), 3.0 * std::sqrt(ss / 16.0), 1e-12);
}

TEST(Run, ExpressivityHaarRowIsNearZero) {
  const json j = json::parse(R"({
    "schema_version": 1, "kind": "expressivity", "qubits": 4, "moments": [2], "samples": 300,
    "ensembles": [{"label": "haar", "haar": true}, {"label": "pqc", "ansatz": "A", "repetitions": [1, 2]}],
    "haar_baseline": {"samples": 2000, "seed": 2},
    "seeds": [1]
  })");
  const auto r = run_experiment(parse_config(j));
  ASSERT_EQ(r.tables.size(), 1u);
  ASSERT_EQ(r.tables[0].rows().size(), 3u);
  const auto& haar = r.tables[0].rows()[0];
  EXPECT_LT(std::abs(std::get<double>(haar[7])), 3.0 * std::get<double>(haar[8]) + 1e-12);
  EXPECT_LT(std::get<double>(r.tables[0].rows()[1][7]), 0.0);
}

TEST(Run, PartitionSweepEnumeratesAllHalves) {
  const json j = json::parse(R"({
    "schema_version": 1, "kind": "partition-sweep", "qubits": 4, "moments": [2], "samples": 50,
    "ensembles": [{"label": "pqc", "ansatz": "C", "repetitions": 1}],
    "haar_baseline": {"samples": 500, "seed": 2},
    "partitions": {"mode": "all"},
    "seeds": [1]
  })");
  const auto r = run_experiment(parse_config(j));
  ASSERT_EQ(r.tables[0].rows().size(), 6u);
  EXPECT_EQ(std::get<std::string>(r.tables[0].rows()[0][8]), "0 1");
  EXPECT_EQ(std::get<std::int64_t>(r.tables[0].rows()[0][9]), 1);
}

TEST(Run, GradientVarianceMatchesLibrarySweep) {
  const json j = json::parse(R"({
    "schema_version": 1, "kind": "gradient-variance",
    "variance": {"depths": [1, 2], "qubit_counts": [2, 4], "samples": 20, "parameters": ["tn_classical", "vqe_quantum"]},
    "seeds": [8]
  })");
  const auto c = parse_config(j);
  const auto r = run_experiment(c, {2, {}});
  GradientVarianceSetup s = c.variance;
  s.seed = 8;
  const auto report = gradient_variance_experiment(s);
  ASSERT_EQ(r.tables[0].rows().size(), report.cells.size());
  for (std::size_t i = 0; i < report.cells.size(); ++i) {
    EXPECT_EQ(std::get<double>(r.tables[0].rows()[i][7]), report.cells[i].stats.variance);
  }
  EXPECT_EQ(r.tables[1].rows().size(), 4u);
}

TEST(Outputs, FilesAndSidecar) {
  ExperimentConfig c = parse_config(ground_state_config());
  c.output_dir = scratch_dir("outputs").string();
  const auto r = run_experiment(c);
  const auto files = write_outputs(c, r, json{{"threads", 1}});
  ASSERT_EQ(files.size(), 4u);
  EXPECT_EQ(files.back().filename(), "tiny.json");
  const json sidecar = json::parse(slurp(files.back()));
  EXPECT_EQ(sidecar.at("version"), library_version());
  EXPECT_EQ(sidecar.at("config"), to_json(c));
  EXPECT_EQ(sidecar.at("threads"), 1);
  EXPECT_TRUE(sidecar.contains("written_at"));
  EXPECT_TRUE(sidecar.at("summary").contains("exact_ground_energy"));
  const std::string summary = slurp(files.front());
  EXPECT_EQ(summary.substr(0, summary.find('\n')),
            "method,seed,steps,converged,failed,final_energy,best_energy,exact_ground_energy,best_energy_error");
  fs::remove_all(c.output_dir);
}

// ---- command line --------------------------------------------------------

int shell(const std::string& cmd) {
  const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

int cli(const std::string& args) { return shell(std::string(TNPQC_CLI_PATH) + " " + args); }

fs::path write_config(const fs::path& dir, const std::string& name, const json& j) {
  fs::create_directories(dir);
  const fs::path p = dir / name;
  std::ofstream(p) << j.dump(2);
  return p;
}

TEST(Cli, ListAndValidate) {
  const fs::path dir = scratch_dir("cli_validate");
  EXPECT_EQ(cli("list"), 0);
  EXPECT_EQ(cli("validate " + write_config(dir, "ok.json", ground_state_config()).string()), 0);

  json bad = ground_state_config();
  bad["hamiltonian"].erase("g");
  EXPECT_EQ(cli("validate " + write_config(dir, "bad.json", bad).string()), 2);
  bad = ground_state_config();
  bad["kind"] = "photosynthesis";
  EXPECT_EQ(cli("validate " + write_config(dir, "kind.json", bad).string()), 2);
  EXPECT_EQ(cli("validate " + (dir / "missing.json").string()), 2);
  std::ofstream(dir / "broken.json") << "{ not json";
  EXPECT_EQ(cli("validate " + (dir / "broken.json").string()), 2);
  EXPECT_EQ(cli("frobnicate"), 2);
  EXPECT_EQ(cli(""), 2);
  fs::remove_all(dir);
}

TEST(Cli, ValidationMessageNamesTheField) {
  const fs::path dir = scratch_dir("cli_message");
  json bad = ground_state_config();
  bad["methods"][0]["network"] = "mera";
  const fs::path cfg = write_config(dir, "bad.json", bad);
  const std::string cmd = std::string(TNPQC_CLI_PATH) + " validate " + cfg.string() + " 2>&1";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  ASSERT_NE(pipe, nullptr);
  std::string out;
  char buf[256];
  while (std::fgets(buf, sizeof buf, pipe) != nullptr) out += buf;
  ::pclose(pipe);
  EXPECT_NE(out.find("methods[0].network"), std::string::npos) << out;
  fs::remove_all(dir);
}

TEST(Cli, RunIsByteIdenticalAcrossRunsAndThreads) {
  const fs::path dir = scratch_dir("cli_run");
  const fs::path cfg = write_config(dir, "cfg.json", ground_state_config());
  ASSERT_EQ(cli("run " + cfg.string() + " --output-dir " + (dir / "a").string() + " --threads 1"), 0);
  ASSERT_EQ(cli("run " + cfg.string() + " --output-dir " + (dir / "b").string() + " --threads 2"), 0);
  int compared = 0;
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    if (entry.path().extension() != ".csv") continue;
    EXPECT_EQ(slurp(entry.path()), slurp(dir / "b" / entry.path().filename())) << entry.path();
    ++compared;
  }
  EXPECT_EQ(compared, 3);
  EXPECT_TRUE(fs::exists(dir / "a" / "tiny.json"));
  fs::remove_all(dir);
}

TEST(Cli, SeedOverrideChangesTheSeedColumn) {
  const fs::path dir = scratch_dir("cli_seed");
  const fs::path cfg = write_config(dir, "cfg.json", ground_state_config());
  ASSERT_EQ(cli("run " + cfg.string() + " --output-dir " + (dir / "o").string() + " --seed-override 77"), 0);
  const std::string summary = slurp(dir / "o" / "tiny_summary.csv");
  EXPECT_NE(summary.find("pure,77,"), std::string::npos) << summary;
  EXPECT_EQ(summary.find("pure,3,"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Cli, ExitCodesForBadFlagsAndRuntimeFailures) {
  const fs::path dir = scratch_dir("cli_exit");
  const fs::path cfg = write_config(dir, "cfg.json", ground_state_config());
  EXPECT_EQ(cli("run " + cfg.string() + " --threads 0"), 2);
  EXPECT_EQ(shell(std::string(kThreadsEnv) + "=x " + TNPQC_CLI_PATH + " run " + cfg.string()), 2);
  std::ofstream(dir / "blocker") << "x";
  EXPECT_EQ(cli("run " + cfg.string() + " --output-dir " + (dir / "blocker" / "sub").string()), 3);

  json diverge = ground_state_config();
  diverge["optimizer"]["learning_rate"] = 1e308;
  diverge["optimizer"]["max_steps"] = 3;
  const fs::path big = write_config(dir, "diverge.json", diverge);
  EXPECT_EQ(cli("run " + big.string() + " --output-dir " + (dir / "d").string()), 3);
  EXPECT_TRUE(fs::exists(dir / "d" / "tiny_summary.csv"));
  fs::remove_all(dir);
}

}  // namespace
}  // namespace tnpqc
