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

// Declarative experiment configs, their runners, and CSV/JSON emission.

#ifndef TNPQC_EXPERIMENTS_HPP
#define TNPQC_EXPERIMENTS_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "tnpqc/analysis.hpp"
#include "tnpqc/hamiltonians.hpp"
#include "tnpqc/optimize.hpp"
#include "tnpqc/simulator.hpp"
#include "tnpqc/tn_rotation.hpp"

namespace tnpqc {

inline constexpr int kSchemaVersion = 1;

/// Environment variable consulted for the default worker count.
inline constexpr const char* kThreadsEnv = "TNPQC_THREADS";

std::string library_version();

enum class ExperimentKind {
  kGroundState,
  kLayerSweep,
  kJSweep,
  kExpressivity,
  kPartitionSweep,
  kGradientVariance,
  kNoise,
};

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);
const std::vector<ExperimentKind>& all_experiment_kinds();
std::string describe(ExperimentKind kind);

/// Schema violation; path is dotted with [i] for array elements, e.g. "methods[1].layers".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct AnsatzConfig {
  std::string name = "A";
  int repetitions = 1;
};

/// One optimization route; no network means pure VQE.
struct MethodConfig {
  std::string label;
  std::optional<LayoutKind> network;
  int layers = 2;  // uMPO kinds only
};

struct EnsembleConfig {
  std::string label;
  bool haar = false;
  std::string ansatz = "A";
  std::vector<int> repetitions{1};
  std::optional<LayoutKind> network;
  int layers = 2;
};

struct PartitionConfig {
  bool exhaustive = false;
  std::size_t trials = 20;
  std::uint64_t seed = 0;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kGroundState;
  std::string name;
  std::string output_dir = ".";
  std::vector<std::uint64_t> seeds;

  // ground-state, layer-sweep, j-sweep, noise
  std::optional<HamiltonianSpec> hamiltonian;
  AnsatzConfig ansatz;
  std::vector<MethodConfig> methods;
  OptimizerConfig optimizer;
  std::optional<NoiseModel> noise;
  std::vector<int> repetitions;  // layer-sweep
  std::vector<double> j_values;  // j-sweep

  // expressivity, partition-sweep
  int qubits = 8;
  std::vector<int> moments{2, 3};
  std::size_t samples = 500;
  std::vector<EnsembleConfig> ensembles;
  HaarBaseline haar_baseline;
  PartitionConfig partitions;

  // gradient-variance; the seed comes from seeds
  GradientVarianceSetup variance;
};

/// Parses and validates; throws ConfigError. Performs no experiment computation.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Fully resolved config, defaults included; parse_config(to_json(c)) reproduces c.
nlohmann::json to_json(const ExperimentConfig& c);

/// Replaces the seed list with a single seed.
void override_seed(ExperimentConfig& c, std::uint64_t seed);

using Cell = std::variant<std::int64_t, double, std::string>;

struct TableSchema {
  std::string suffix;  // file is <name>_<suffix>.csv
  std::vector<std::string> columns;
};

/// Declared output tables of a kind; a ground-state run has one trace table per method.
std::vector<TableSchema> output_schema(ExperimentKind kind);

class Table {
 public:
  explicit Table(TableSchema schema) : schema_(std::move(schema)) {}
  const TableSchema& schema() const { return schema_; }
  const std::vector<std::vector<Cell>>& rows() const { return rows_; }
  /// Throws std::logic_error unless the row has one cell per column.
  void add_row(std::vector<Cell> row);

 private:
  TableSchema schema_;
  std::vector<std::vector<Cell>> rows_;
};

/// 17 significant digits, '.' decimal point regardless of locale.
std::string format_real(double x);
void write_csv(std::ostream& out, const Table& table);

struct RunOptions {
  int threads = 1;
  /// Called from the writer thread as tasks finish; may be empty.
  std::function<void(const std::string&)> progress;
};

/// Resolves the worker count: explicit value, then the environment, then the hardware.
int resolve_threads(std::optional<int> requested);

struct ExperimentResult {
  std::vector<Table> tables;
  /// Extra facts for the sidecar (reference energies, slopes).
  nlohmann::json summary = nlohmann::json::object();
  std::vector<std::string> failures;
};

ExperimentResult run_experiment(const ExperimentConfig& c, const RunOptions& options = {});

/// Writes every table plus <name>.json; returns the written paths, sidecar last.
std::vector<std::filesystem::path> write_outputs(const ExperimentConfig& c, const ExperimentResult& r,
                                                 const nlohmann::json& run_info);

/// Task fan-out over a fixed pool; results land in task order, so output does not depend on threads.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& task);

}  // namespace tnpqc

#endif  // TNPQC_EXPERIMENTS_HPP
