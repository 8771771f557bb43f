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

// tnpqc: run, validate and list declarative experiments.
//
// Exit codes: 0 success, 2 invalid config or usage, 3 runtime failure.

#include <chrono>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "tnpqc/experiments.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitRuntime = 3;

int list_kinds() {
  for (auto kind : tnpqc::all_experiment_kinds()) {
    std::cout << tnpqc::to_string(kind) << "\n  " << tnpqc::describe(kind) << '\n';
    for (const auto& t : tnpqc::output_schema(kind)) {
      std::cout << "  <name>_" << t.suffix << ".csv:";
      for (std::size_t i = 0; i < t.columns.size(); ++i) std::cout << (i ? "," : " ") << t.columns[i];
      std::cout << '\n';
    }
  }
  std::cout << "schema_version " << tnpqc::kSchemaVersion << '\n';
  return kExitOk;
}

int validate(const std::string& path) {
  try {
    tnpqc::load_config(path);
  } catch (const tnpqc::ConfigError& e) {
    std::cerr << "invalid: " << e.what() << '\n';
    return kExitInvalid;
  }
  std::cout << "valid\n";
  return kExitOk;
}

int run(const std::string& path, const std::optional<std::string>& output_dir, std::optional<int> threads,
        std::optional<std::uint64_t> seed) {
  tnpqc::ExperimentConfig cfg;
  int workers = 1;
  try {
    cfg = tnpqc::load_config(path);
    if (output_dir) cfg.output_dir = *output_dir;
    if (seed) tnpqc::override_seed(cfg, *seed);
    workers = tnpqc::resolve_threads(threads);
  } catch (const tnpqc::ConfigError& e) {
    std::cerr << "invalid: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid: " << e.what() << '\n';
    return kExitInvalid;
  }

  try {
    tnpqc::RunOptions options;
    options.threads = workers;
    options.progress = [](const std::string& msg) { std::cerr << "  done " << msg << '\n'; };
    const auto start = std::chrono::steady_clock::now();
    const auto result = tnpqc::run_experiment(cfg, options);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const nlohmann::json info{{"threads", workers}, {"wall_seconds", seconds}, {"config_path", path}};
    for (const auto& p : tnpqc::write_outputs(cfg, result, info)) std::cout << p.string() << '\n';
    if (!result.failures.empty()) {
      for (const auto& f : result.failures) std::cerr << "failed: " << f << '\n';
      return kExitRuntime;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tensor-network-assisted VQE experiments"};
  app.set_version_flag("--version", tnpqc::library_version());
  app.require_subcommand(1);

  std::string config;
  std::optional<std::string> output_dir;
  std::optional<int> threads;
  std::optional<std::uint64_t> seed;

  auto* run_cmd = app.add_subcommand("run", "run an experiment config and write CSV plus a JSON sidecar");
  run_cmd->add_option("config", config, "experiment config (JSON)")->required();
  run_cmd->add_option("--output-dir", output_dir, "directory for outputs (overrides the config)");
  run_cmd->add_option("--threads", threads, std::string("worker threads (default: $") + tnpqc::kThreadsEnv +
                                                 ", else hardware concurrency)")
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--seed-override", seed, "replace the config's seed list with this seed");

  auto* validate_cmd = app.add_subcommand("validate", "check a config without running it");
  validate_cmd->add_option("config", config, "experiment config (JSON)")->required();

  auto* list_cmd = app.add_subcommand("list", "list experiment kinds and their output columns");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  if (*list_cmd) return list_kinds();
  if (*validate_cmd) return validate(config);
  if (*run_cmd) return run(config, output_dir, threads, seed);
  return kExitInvalid;
}
