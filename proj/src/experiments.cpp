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

#include "tnpqc/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <string_view>
#include <thread>

#ifndef TNPQC_VERSION
#define TNPQC_VERSION "0.0.0"
#endif

namespace tnpqc {

using nlohmann::json;

std::string library_version() { return TNPQC_VERSION; }

namespace {

struct KindInfo {
  ExperimentKind kind;
  const char* name;
  const char* description;
};

constexpr KindInfo kKinds[] = {
    {ExperimentKind::kGroundState, "ground-state", "optimize each method from each seed; per-step traces"},
    {ExperimentKind::kLayerSweep, "layer-sweep", "best energy versus ansatz repetitions"},
    {ExperimentKind::kJSweep, "j-sweep", "best energy error versus the coupling J"},
    {ExperimentKind::kExpressivity, "expressivity", "Delta_t of ansatz ensembles against Haar states"},
    {ExperimentKind::kPartitionSweep, "partition-sweep", "Delta_t over bipartitions of the qubits"},
    {ExperimentKind::kGradientVariance, "gradient-variance", "derivative variance of tagged parameters"},
    {ExperimentKind::kNoise, "noise", "fixed-length noisy runs repeated S times; mean and error bar per step"},
};

const KindInfo& info(ExperimentKind kind) {
  for (const auto& k : kKinds) {
    if (k.kind == kind) return k;
  }
  throw std::invalid_argument("unknown experiment kind");
}

bool optimizing(ExperimentKind k) {
  return k == ExperimentKind::kGroundState || k == ExperimentKind::kLayerSweep || k == ExperimentKind::kJSweep ||
         k == ExperimentKind::kNoise;
}

bool ensembles(ExperimentKind k) { return k == ExperimentKind::kExpressivity || k == ExperimentKind::kPartitionSweep; }

// ---- reading -------------------------------------------------------------

std::string child_path(const std::string& base, std::string_view key) {
  return base.empty() ? std::string(key) : base + "." + std::string(key);
}

class Node {
 public:
  Node(const json& j, std::string path) : j_(&j), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const json& raw() const { return *j_; }

  [[noreturn]] void fail(const std::string& message) const {
    throw ConfigError(path_.empty() ? "<root>" : path_, message);
  }

  const Node& object() const {
    if (!j_->is_object()) fail("expected an object");
    return *this;
  }

  bool has(std::string_view key) const { return j_->is_object() && j_->contains(key); }

  Node at(std::string_view key) const {
    if (!has(key)) throw ConfigError(child_path(path_, key), "missing required field");
    return Node(j_->at(std::string(key)), child_path(path_, key));
  }

  std::optional<Node> find(std::string_view key) const {
    if (!has(key)) return std::nullopt;
    return Node(j_->at(std::string(key)), child_path(path_, key));
  }

  void allow_only(std::initializer_list<std::string_view> keys) const {
    for (const auto& item : j_->items()) {
      if (std::find(keys.begin(), keys.end(), item.key()) == keys.end()) {
        throw ConfigError(child_path(path_, item.key()), "unknown field");
      }
    }
  }

  std::vector<Node> array(bool allow_empty = false) const {
    if (!j_->is_array()) fail("expected an array");
    if (!allow_empty && j_->empty()) fail("must not be empty");
    std::vector<Node> out;
    for (std::size_t i = 0; i < j_->size(); ++i) out.emplace_back((*j_)[i], path_ + "[" + std::to_string(i) + "]");
    return out;
  }

  double number() const {
    if (!j_->is_number()) fail("expected a number");
    const double x = j_->get<double>();
    if (!std::isfinite(x)) fail("must be finite");
    return x;
  }

  std::int64_t integer(std::int64_t lo, std::int64_t hi) const {
    if (!j_->is_number_integer()) fail("expected an integer");
    if (j_->is_number_unsigned() && j_->get<std::uint64_t>() > static_cast<std::uint64_t>(hi)) {
      fail("must be <= " + std::to_string(hi));
    }
    const auto v = j_->get<std::int64_t>();
    if (v < lo) fail("must be >= " + std::to_string(lo));
    if (v > hi) fail("must be <= " + std::to_string(hi));
    return v;
  }

  std::uint64_t seed() const {
    if (!j_->is_number_integer() || (!j_->is_number_unsigned() && j_->get<std::int64_t>() < 0)) {
      fail("expected a non-negative integer seed");
    }
    return j_->get<std::uint64_t>();
  }

  bool boolean() const {
    if (!j_->is_boolean()) fail("expected true or false");
    return j_->get<bool>();
  }

  std::string string() const {
    if (!j_->is_string()) fail("expected a string");
    return j_->get<std::string>();
  }

 private:
  const json* j_;
  std::string path_;
};

template <class F>
auto checked(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  } catch (const std::out_of_range& e) {
    throw ConfigError(path, e.what());
  }
}

bool safe_name(const std::string& s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-' ||
           c == '.';
  });
}

HamiltonianSpec read_hamiltonian(const Node& node) {
  node.object();
  const std::string model = node.at("model").string();
  HamiltonianSpec spec;
  if (model == "tfim-1d") {
    node.allow_only({"model", "n", "J", "g"});
    spec = Tfim1d{static_cast<int>(node.at("n").integer(2, kMaxGroundStateQubits)), node.at("J").number(),
                  node.at("g").number()};
  } else if (model == "tfim-2d") {
    node.allow_only({"model", "rows", "cols", "J", "g"});
    Tfim2d t{static_cast<int>(node.at("rows").integer(2, kMaxGroundStateQubits)),
             static_cast<int>(node.at("cols").integer(2, kMaxGroundStateQubits)), node.at("J").number(),
             node.at("g").number()};
    if (t.rows * t.cols > kMaxGroundStateQubits) {
      node.fail("rows*cols must be <= " + std::to_string(kMaxGroundStateQubits));
    }
    spec = t;
  } else if (model == "time-crystal") {
    node.allow_only({"model", "n", "J", "V", "h"});
    spec = TimeCrystal{static_cast<int>(node.at("n").integer(3, kMaxGroundStateQubits)), node.at("J").number(),
                       node.at("V").number(), node.at("h").number()};
  } else {
    node.at("model").fail("unknown model '" + model + "' (expected tfim-1d, tfim-2d or time-crystal)");
  }
  return spec;
}

json hamiltonian_json(const HamiltonianSpec& spec) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Tfim1d>) {
          return {{"model", "tfim-1d"}, {"n", s.n}, {"J", s.J}, {"g", s.g}};
        } else if constexpr (std::is_same_v<T, Tfim2d>) {
          return {{"model", "tfim-2d"}, {"rows", s.rows}, {"cols", s.cols}, {"J", s.J}, {"g", s.g}};
        } else {
          return {{"model", "time-crystal"}, {"n", s.n}, {"J", s.J}, {"V", s.V}, {"h", s.h}};
        }
      },
      spec);
}

HamiltonianSpec with_coupling(HamiltonianSpec spec, double J) {
  std::visit([J](auto& s) { s.J = J; }, spec);
  return spec;
}

bool is_umpo(LayoutKind k) { return k == LayoutKind::kUmpo1d || k == LayoutKind::kUmpo2d; }
bool is_2d(LayoutKind k) { return k == LayoutKind::kUmpo2d || k == LayoutKind::kUttn2d; }

std::optional<LayoutKind> read_network(const Node& node) {
  const std::string name = node.string();
  if (name == "none") return std::nullopt;
  return checked(node.path(), [&] { return layout_kind_from_string(name); });
}

TnLayout make_layout(LayoutKind kind, int layers, const HamiltonianSpec& spec) {
  const int n = num_qubits(spec);
  if (is_2d(kind)) {
    const auto* grid = std::get_if<Tfim2d>(&spec);
    if (grid == nullptr) throw std::invalid_argument("2D layouts need a tfim-2d hamiltonian");
    return kind == LayoutKind::kUmpo2d ? layout_umpo_2d(grid->rows, grid->cols, layers)
                                       : layout_uttn_2d(grid->rows, grid->cols);
  }
  return kind == LayoutKind::kUmpo1d ? layout_umpo_1d(n, layers) : layout_uttn_1d(n);
}

TnLayout make_chain_layout(LayoutKind kind, int layers, int n) {
  if (is_2d(kind)) throw std::invalid_argument("ensembles use 1D layouts");
  return kind == LayoutKind::kUmpo1d ? layout_umpo_1d(n, layers) : layout_uttn_1d(n);
}

std::vector<MethodConfig> read_methods(const Node& node, const HamiltonianSpec& spec) {
  std::vector<MethodConfig> out;
  std::set<std::string> labels;
  for (const Node& m : node.array()) {
    m.object().allow_only({"label", "network", "layers"});
    MethodConfig mc;
    mc.label = m.at("label").string();
    if (!safe_name(mc.label)) m.at("label").fail("labels may use letters, digits, '_', '-' and '.' only");
    if (!labels.insert(mc.label).second) m.at("label").fail("duplicate label '" + mc.label + "'");
    if (auto net = m.find("network")) mc.network = read_network(*net);
    if (auto layers = m.find("layers")) {
      if (!mc.network || !is_umpo(*mc.network)) layers->fail("only uMPO networks take a layer count");
      mc.layers = static_cast<int>(layers->integer(1, 64));
    }
    if (mc.network) {
      checked(child_path(m.path(), "network"), [&] { return make_layout(*mc.network, mc.layers, spec); });
    }
    out.push_back(std::move(mc));
  }
  return out;
}

json methods_json(const std::vector<MethodConfig>& methods) {
  json out = json::array();
  for (const auto& m : methods) {
    json j{{"label", m.label}, {"network", m.network ? to_string(*m.network) : "none"}};
    if (m.network && is_umpo(*m.network)) j["layers"] = m.layers;
    out.push_back(j);
  }
  return out;
}

OptimizerConfig read_optimizer(const std::optional<Node>& maybe) {
  OptimizerConfig cfg;
  cfg.model.gradient = GradientMethod::kAdjoint;
  if (!maybe) return cfg;
  const Node& node = maybe->object();
  node.allow_only({"strategy", "learning_rate", "max_steps", "tolerance", "stop_on_convergence", "n_classical",
                   "n_quantum", "theta_init", "freeze_theta", "record_term_count", "evaluation", "gradient",
                   "prune"});
  if (auto v = node.find("strategy")) {
    const std::string s = v->string();
    if (s != "alternating" && s != "parallel") v->fail("expected alternating or parallel");
    cfg.strategy = strategy_from_string(s);
  }
  if (auto v = node.find("learning_rate")) cfg.learning_rate = v->number();
  if (auto v = node.find("max_steps")) cfg.max_steps = static_cast<int>(v->integer(0, 1000000));
  if (auto v = node.find("tolerance")) cfg.tolerance = v->number();
  if (auto v = node.find("stop_on_convergence")) cfg.stop_on_convergence = v->boolean();
  if (auto v = node.find("n_classical")) cfg.n_classical = static_cast<int>(v->integer(1, 1000000));
  if (auto v = node.find("n_quantum")) cfg.n_quantum = static_cast<int>(v->integer(1, 1000000));
  if (auto v = node.find("theta_init")) {
    const std::string s = v->string();
    if (s == "uniform") {
      cfg.theta_init = ThetaInit::kUniform;
    } else if (s == "zero") {
      cfg.theta_init = ThetaInit::kZero;
    } else {
      v->fail("expected uniform or zero");
    }
  }
  if (auto v = node.find("freeze_theta")) cfg.freeze_theta = v->boolean();
  if (auto v = node.find("record_term_count")) cfg.record_term_count = v->boolean();
  if (auto v = node.find("evaluation")) {
    const std::string s = v->string();
    cfg.model.evaluation = checked(v->path(), [&] { return evaluation_mode_from_string(s); });
  }
  if (auto v = node.find("gradient")) {
    const std::string s = v->string();
    cfg.model.gradient = checked(v->path(), [&] { return gradient_method_from_string(s); });
  }
  if (auto v = node.find("prune")) {
    cfg.model.prune = v->number();
    if (cfg.model.prune < 0.0) v->fail("must be >= 0");
  }
  checked(node.path(), [&] {
    validate(cfg);
    return 0;
  });
  return cfg;
}

json optimizer_json(const OptimizerConfig& c) {
  return {{"strategy", to_string(c.strategy)},
          {"learning_rate", c.learning_rate},
          {"max_steps", c.max_steps},
          {"tolerance", c.tolerance},
          {"stop_on_convergence", c.stop_on_convergence},
          {"n_classical", c.n_classical},
          {"n_quantum", c.n_quantum},
          {"theta_init", c.theta_init == ThetaInit::kZero ? "zero" : "uniform"},
          {"freeze_theta", c.freeze_theta},
          {"record_term_count", c.record_term_count},
          {"evaluation", to_string(c.model.evaluation)},
          {"gradient", to_string(c.model.gradient)},
          {"prune", c.model.prune}};
}

NoiseModel read_noise(const Node& node) {
  node.object().allow_only({"p1", "p2", "trajectories", "seed"});
  NoiseModel noise;
  noise.p1 = node.at("p1").number();
  noise.p2 = node.at("p2").number();
  noise.trajectories = static_cast<int>(node.at("trajectories").integer(2, 1000000));
  noise.seed = node.at("seed").seed();
  checked(node.path(), [&] {
    validate(noise);
    return 0;
  });
  return noise;
}

std::vector<double> read_j_values(const Node& node) {
  std::vector<double> out;
  if (node.raw().is_object()) {
    node.allow_only({"start", "stop", "step"});
    const double start = node.at("start").number();
    const double stop = node.at("stop").number();
    const double step = node.at("step").number();
    if (step <= 0.0) node.at("step").fail("must be > 0");
    if (stop < start) node.at("stop").fail("must be >= start");
    const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9));
    if (count > 100000) node.fail("too many points");
    for (long k = 0; k <= count; ++k) out.push_back(start + static_cast<double>(k) * step);
    return out;
  }
  for (const Node& v : node.array()) out.push_back(v.number());
  return out;
}

std::vector<int> read_int_list(const Node& node, int lo, int hi) {
  std::vector<int> out;
  if (node.raw().is_number_integer()) {
    out.push_back(static_cast<int>(node.integer(lo, hi)));
    return out;
  }
  for (const Node& v : node.array()) out.push_back(static_cast<int>(v.integer(lo, hi)));
  return out;
}

std::vector<EnsembleConfig> read_ensembles(const Node& node, int n) {
  std::vector<EnsembleConfig> out;
  std::set<std::string> labels;
  for (const Node& e : node.array()) {
    e.object();
    EnsembleConfig ec;
    ec.label = e.at("label").string();
    if (!safe_name(ec.label)) e.at("label").fail("labels may use letters, digits, '_', '-' and '.' only");
    if (!labels.insert(ec.label).second) e.at("label").fail("duplicate label '" + ec.label + "'");
    if (auto h = e.find("haar")) ec.haar = h->boolean();
    if (ec.haar) {
      e.allow_only({"label", "haar"});
      ec.repetitions.clear();
      out.push_back(std::move(ec));
      continue;
    }
    e.allow_only({"label", "haar", "ansatz", "repetitions", "network", "layers"});
    if (auto a = e.find("ansatz")) ec.ansatz = a->string();
    if (auto r = e.find("repetitions")) ec.repetitions = read_int_list(*r, 1, 1000);
    if (auto net = e.find("network")) ec.network = read_network(*net);
    if (auto layers = e.find("layers")) {
      if (!ec.network || !is_umpo(*ec.network)) layers->fail("only uMPO networks take a layer count");
      ec.layers = static_cast<int>(layers->integer(1, 64));
    }
    for (int r : ec.repetitions) {
      checked(child_path(e.path(), "ansatz"), [&] { return make_template(ec.ansatz, n, r); });
    }
    if (ec.network) {
      checked(child_path(e.path(), "network"), [&] { return make_chain_layout(*ec.network, ec.layers, n); });
    }
    out.push_back(std::move(ec));
  }
  return out;
}

json ensembles_json(const std::vector<EnsembleConfig>& list) {
  json out = json::array();
  for (const auto& e : list) {
    if (e.haar) {
      out.push_back({{"label", e.label}, {"haar", true}});
      continue;
    }
    json j{{"label", e.label},
           {"haar", false},
           {"ansatz", e.ansatz},
           {"repetitions", e.repetitions},
           {"network", e.network ? to_string(*e.network) : "none"}};
    if (e.network && is_umpo(*e.network)) j["layers"] = e.layers;
    out.push_back(j);
  }
  return out;
}

GradientVarianceSetup read_variance(const std::optional<Node>& maybe) {
  GradientVarianceSetup s;
  if (!maybe) return s;
  const Node& node = maybe->object();
  node.allow_only({"depths", "qubit_counts", "tn_layers", "samples", "J", "g", "prune", "parameters"});
  if (auto v = node.find("depths")) s.depths = read_int_list(*v, 1, 1000);
  if (auto v = node.find("qubit_counts")) s.qubit_counts = read_int_list(*v, 2, kMaxGroundStateQubits);
  if (auto v = node.find("tn_layers")) s.tn_layers = static_cast<int>(v->integer(1, 64));
  if (auto v = node.find("samples")) s.samples = static_cast<std::size_t>(v->integer(2, 100000000));
  if (auto v = node.find("J")) s.J = v->number();
  if (auto v = node.find("g")) s.g = v->number();
  if (auto v = node.find("prune")) {
    s.prune = v->number();
    if (s.prune < 0.0) v->fail("must be >= 0");
  }
  if (auto v = node.find("parameters")) {
    s.parameters.clear();
    for (const Node& p : v->array()) {
      const std::string name = p.string();
      s.parameters.push_back(checked(p.path(), [&] { return tagged_parameter_from_string(name); }));
    }
  }
  checked(node.path(), [&] {
    validate(s);
    return 0;
  });
  return s;
}

json variance_json(const GradientVarianceSetup& s) {
  json params = json::array();
  for (auto p : s.parameters) params.push_back(to_string(p));
  return {{"depths", s.depths}, {"qubit_counts", s.qubit_counts}, {"tn_layers", s.tn_layers},
          {"samples", s.samples}, {"J", s.J},
          {"g", s.g},           {"prune", s.prune},
          {"parameters", params}};
}

// ---- running -------------------------------------------------------------

std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) {
  std::vector<std::uint32_t> words;
  for (auto p : parts) {
    words.push_back(static_cast<std::uint32_t>(p));
    words.push_back(static_cast<std::uint32_t>(p >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

std::int64_t as_int(std::size_t v) { return static_cast<std::int64_t>(v); }

struct OptimizationJob {
  HamiltonianSpec spec;
  std::size_t hamiltonian = 0;  // index into the reference energies
  std::size_t method = 0;
  int repetitions = 1;
  std::uint64_t seed = 0;
  std::optional<NoiseModel> noise;
  RunRecord record;
};

RunRecord run_job(const ExperimentConfig& c, const PauliSum& h, const OptimizationJob& job) {
  const MethodConfig& m = c.methods[job.method];
  const AnsatzSpec ansatz = make_template(c.ansatz.name, num_qubits(job.spec), job.repetitions);
  OptimizerConfig cfg = c.optimizer;
  cfg.seed = job.seed;
  cfg.model.noise = job.noise;
  if (!m.network) {
    cfg.strategy = Strategy::kPureVqe;
    return optimize_pure_vqe(h, ansatz, cfg);
  }
  return optimize(h, make_layout(*m.network, m.layers, job.spec), ansatz, cfg);
}

void run_jobs(const ExperimentConfig& c, const std::vector<PauliSum>& hams, std::vector<OptimizationJob>& jobs,
              const RunOptions& options) {
  std::mutex mu;
  std::size_t done = 0;
  parallel_for(jobs.size(), options.threads, [&](std::size_t i) {
    jobs[i].record = run_job(c, hams[jobs[i].hamiltonian], jobs[i]);
    if (options.progress) {
      std::lock_guard<std::mutex> lock(mu);
      ++done;
      options.progress(c.methods[jobs[i].method].label + " seed " + std::to_string(jobs[i].seed) + " (" +
                       std::to_string(done) + "/" + std::to_string(jobs.size()) + ")");
    }
  });
}

void note_failure(ExperimentResult& r, const ExperimentConfig& c, const OptimizationJob& job) {
  if (!job.record.failed) return;
  r.failures.push_back(c.methods[job.method].label + " seed " + std::to_string(job.seed) + ": " +
                       job.record.failure);
}

std::vector<double> reference_energies(const std::vector<PauliSum>& hams, const RunOptions& options) {
  std::vector<double> out(hams.size());
  parallel_for(hams.size(), options.threads, [&](std::size_t i) { out[i] = exact_ground_energy(hams[i]); });
  return out;
}

double best_energy(const RunRecord& r) { return r.steps.empty() ? std::nan("") : r.best_energy; }

ExperimentResult run_ground_state(const ExperimentConfig& c, const RunOptions& options) {
  const HamiltonianSpec& spec = *c.hamiltonian;
  const std::vector<PauliSum> hams{build_hamiltonian(spec)};
  std::vector<OptimizationJob> jobs;
  for (std::size_t m = 0; m < c.methods.size(); ++m) {
    for (auto seed : c.seeds) jobs.push_back({spec, 0, m, c.ansatz.repetitions, seed, std::nullopt, {}});
  }
  const double e0 = reference_energies(hams, options)[0];
  run_jobs(c, hams, jobs, options);

  ExperimentResult r;
  const auto schema = output_schema(ExperimentKind::kGroundState);
  Table summary(schema[0]);
  for (std::size_t m = 0; m < c.methods.size(); ++m) {
    TableSchema ts = schema[1];
    ts.suffix = "trace_" + c.methods[m].label;
    Table trace(ts);
    for (const auto& job : jobs) {
      if (job.method != m) continue;
      const auto& label = c.methods[m].label;
      const auto seed = static_cast<std::int64_t>(job.seed);
      for (const auto& s : job.record.steps) {
        trace.add_row({label, seed, std::int64_t{s.step}, s.energy, s.energy - e0, s.grad_phi_norm,
                       s.grad_theta_norm, as_int(s.term_count), static_cast<std::int64_t>(s.circuit_executions)});
      }
      const RunRecord& rec = job.record;
      const double final_energy = rec.steps.empty() ? std::nan("") : rec.steps.back().energy;
      summary.add_row({label, seed, as_int(rec.steps.size()), std::int64_t{rec.converged}, std::int64_t{rec.failed},
                       final_energy, best_energy(rec), e0, best_energy(rec) - e0});
      note_failure(r, c, job);
    }
    r.tables.push_back(std::move(trace));
  }
  r.tables.insert(r.tables.begin(), std::move(summary));
  r.summary["exact_ground_energy"] = e0;
  return r;
}

ExperimentResult run_layer_sweep(const ExperimentConfig& c, const RunOptions& options) {
  const HamiltonianSpec& spec = *c.hamiltonian;
  const std::vector<PauliSum> hams{build_hamiltonian(spec)};
  std::vector<OptimizationJob> jobs;
  for (int reps : c.repetitions) {
    for (std::size_t m = 0; m < c.methods.size(); ++m) {
      for (auto seed : c.seeds) jobs.push_back({spec, 0, m, reps, seed, std::nullopt, {}});
    }
  }
  const double e0 = reference_energies(hams, options)[0];
  run_jobs(c, hams, jobs, options);
  ExperimentResult r;
  Table t(output_schema(ExperimentKind::kLayerSweep)[0]);
  for (const auto& job : jobs) {
    const RunRecord& rec = job.record;
    t.add_row({c.methods[job.method].label, std::int64_t{job.repetitions}, static_cast<std::int64_t>(job.seed),
               as_int(rec.steps.size()), std::int64_t{rec.converged}, std::int64_t{rec.failed}, best_energy(rec), e0,
               best_energy(rec) - e0});
    note_failure(r, c, job);
  }
  r.tables.push_back(std::move(t));
  r.summary["exact_ground_energy"] = e0;
  return r;
}

ExperimentResult run_j_sweep(const ExperimentConfig& c, const RunOptions& options) {
  std::vector<PauliSum> hams;
  std::vector<OptimizationJob> jobs;
  for (std::size_t k = 0; k < c.j_values.size(); ++k) {
    const HamiltonianSpec spec = with_coupling(*c.hamiltonian, c.j_values[k]);
    hams.push_back(build_hamiltonian(spec));
    for (std::size_t m = 0; m < c.methods.size(); ++m) {
      for (auto seed : c.seeds) jobs.push_back({spec, k, m, c.ansatz.repetitions, seed, std::nullopt, {}});
    }
  }
  const auto e0 = reference_energies(hams, options);
  run_jobs(c, hams, jobs, options);
  ExperimentResult r;
  Table t(output_schema(ExperimentKind::kJSweep)[0]);
  for (const auto& job : jobs) {
    const RunRecord& rec = job.record;
    const double ref = e0[job.hamiltonian];
    t.add_row({c.j_values[job.hamiltonian], c.methods[job.method].label, static_cast<std::int64_t>(job.seed),
               as_int(rec.steps.size()), std::int64_t{rec.converged}, std::int64_t{rec.failed}, best_energy(rec), ref,
               best_energy(rec) - ref});
    note_failure(r, c, job);
  }
  r.tables.push_back(std::move(t));
  json refs = json::array();
  for (std::size_t k = 0; k < e0.size(); ++k) refs.push_back({{"J", c.j_values[k]}, {"exact_ground_energy", e0[k]}});
  r.summary["exact_ground_energies"] = refs;
  return r;
}

ExperimentResult run_noise(const ExperimentConfig& c, const RunOptions& options) {
  const HamiltonianSpec& spec = *c.hamiltonian;
  const std::vector<PauliSum> hams{build_hamiltonian(spec)};
  const NoiseModel& base = *c.noise;
  std::vector<OptimizationJob> jobs;
  for (std::size_t m = 0; m < c.methods.size(); ++m) {
    for (auto seed : c.seeds) {
      for (int rep = 0; rep < base.trajectories; ++rep) {
        NoiseModel noise = base;
        noise.trajectories = 1;
        noise.seed = derive_seed({base.seed, static_cast<std::uint64_t>(rep)});
        jobs.push_back({spec, 0, m, c.ansatz.repetitions, seed, noise, {}});
      }
    }
  }
  const double e0 = reference_energies(hams, options)[0];
  run_jobs(c, hams, jobs, options);

  ExperimentResult r;
  const auto schema = output_schema(ExperimentKind::kNoise);
  Table trace(schema[0]);
  Table repeats(schema[1]);
  const auto S = static_cast<std::size_t>(base.trajectories);
  for (std::size_t first = 0; first < jobs.size(); first += S) {
    const auto& label = c.methods[jobs[first].method].label;
    const auto seed = static_cast<std::int64_t>(jobs[first].seed);
    std::size_t steps = jobs[first].record.steps.size();
    for (std::size_t k = 0; k < S; ++k) {
      const auto& job = jobs[first + k];
      note_failure(r, c, job);
      steps = std::min(steps, job.record.steps.size());
      for (const auto& s : job.record.steps) {
        repeats.add_row({label, seed, as_int(k), static_cast<std::int64_t>(job.noise->seed), std::int64_t{s.step},
                         s.energy});
      }
    }
    for (std::size_t step = 0; step < steps; ++step) {
      std::vector<double> values;
      for (std::size_t k = 0; k < S; ++k) values.push_back(jobs[first + k].record.steps[step].energy);
      double mean = 0.0;
      for (double v : values) mean += v;
      mean /= static_cast<double>(values.size());
      trace.add_row({label, seed, as_int(step), mean, error_bar(values), as_int(S), e0});
    }
  }
  r.tables.push_back(std::move(trace));
  r.tables.push_back(std::move(repeats));
  r.summary["exact_ground_energy"] = e0;
  return r;
}

struct EnsembleJob {
  std::size_t ensemble = 0;
  int repetitions = 0;  // 0 for Haar ensembles
  std::uint64_t seed = 0;
  int moment = 2;
  std::vector<PartitionResult> results;
};

EnsembleSpec make_ensemble(const ExperimentConfig& c, const EnsembleJob& job) {
  const EnsembleConfig& ec = c.ensembles[job.ensemble];
  EnsembleSpec e;
  e.samples = c.samples;
  e.seed = derive_seed({job.seed, job.ensemble, static_cast<std::uint64_t>(job.repetitions)});
  if (ec.haar) {
    e.haar = true;
    e.haar_qubits = c.qubits;
    return e;
  }
  e.ansatz = make_template(ec.ansatz, c.qubits, job.repetitions);
  if (ec.network) e.layout = make_chain_layout(*ec.network, ec.layers, c.qubits);
  return e;
}

std::vector<EnsembleJob> ensemble_jobs(const ExperimentConfig& c) {
  std::vector<EnsembleJob> jobs;
  for (auto seed : c.seeds) {
    for (std::size_t i = 0; i < c.ensembles.size(); ++i) {
      const auto& ec = c.ensembles[i];
      const std::vector<int> reps = ec.haar ? std::vector<int>{0} : ec.repetitions;
      for (int r : reps) {
        for (int t : c.moments) jobs.push_back({i, r, seed, t, {}});
      }
    }
  }
  return jobs;
}

std::string subset_text(const std::vector<int>& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i > 0) out += ' ';
    out += std::to_string(s[i]);
  }
  return out;
}

std::vector<Cell> ensemble_prefix(const ExperimentConfig& c, const EnsembleJob& job) {
  const auto& ec = c.ensembles[job.ensemble];
  const std::int64_t layers = ec.network && is_umpo(*ec.network) ? ec.layers : 0;
  return {ec.label,
          static_cast<std::int64_t>(job.seed),
          std::string(ec.haar ? "haar" : ec.ansatz),
          std::int64_t{job.repetitions},
          std::string(ec.network ? to_string(*ec.network) : "none"),
          layers,
          std::int64_t{job.moment}};
}

ExperimentResult run_expressivity(const ExperimentConfig& c, const RunOptions& options) {
  auto jobs = ensemble_jobs(c);
  const auto half = first_half(c.qubits);
  parallel_for(jobs.size(), options.threads, [&](std::size_t i) {
    PartitionResult p;
    p.subset = half;
    p.contiguous = true;
    p.delta = delta_t(make_ensemble(c, jobs[i]), half, jobs[i].moment, c.haar_baseline);
    jobs[i].results.push_back(std::move(p));
  });
  ExperimentResult r;
  Table t(output_schema(ExperimentKind::kExpressivity)[0]);
  for (const auto& job : jobs) {
    const DeltaEstimate& d = job.results.front().delta;
    auto row = ensemble_prefix(c, job);
    for (Cell v : std::vector<Cell>{d.delta, d.standard_error, d.haar.mean, d.haar.standard_error, d.ensemble.mean,
                                    d.ensemble.standard_error, as_int(d.ensemble.samples)}) {
      row.push_back(std::move(v));
    }
    t.add_row(std::move(row));
  }
  r.tables.push_back(std::move(t));
  json closed = json::object();
  for (int moment : c.moments) {
    closed[std::to_string(moment)] = haar_moment_closed_form(c.qubits, static_cast<int>(half.size()), moment);
  }
  r.summary["haar_closed_form"] = closed;
  return r;
}

ExperimentResult run_partition_sweep(const ExperimentConfig& c, const RunOptions& options) {
  auto jobs = ensemble_jobs(c);
  parallel_for(jobs.size(), options.threads, [&](std::size_t i) {
    const EnsembleSpec e = make_ensemble(c, jobs[i]);
    jobs[i].results = c.partitions.exhaustive
                          ? partition_sweep(e, jobs[i].moment, all_half_subsets(c.qubits), c.haar_baseline)
                          : random_partition_sweep(e, jobs[i].moment, c.partitions.trials, c.partitions.seed,
                                                   c.haar_baseline);
  });
  ExperimentResult r;
  Table t(output_schema(ExperimentKind::kPartitionSweep)[0]);
  for (const auto& job : jobs) {
    for (std::size_t k = 0; k < job.results.size(); ++k) {
      const auto& p = job.results[k];
      auto row = ensemble_prefix(c, job);
      for (Cell v : std::vector<Cell>{as_int(k), subset_text(p.subset), std::int64_t{p.contiguous}, p.delta.delta,
                                      p.delta.standard_error}) {
        row.push_back(std::move(v));
      }
      t.add_row(std::move(row));
    }
  }
  r.tables.push_back(std::move(t));
  return r;
}

ExperimentResult run_gradient_variance(const ExperimentConfig& c, const RunOptions& options) {
  struct Job {
    std::uint64_t seed;
    int depth;
    int n;
    TaggedParameter p;
    VarianceCell cell;
  };
  std::vector<Job> jobs;
  for (auto seed : c.seeds) {
    for (int depth : c.variance.depths) {
      for (int n : c.variance.qubit_counts) {
        for (auto p : c.variance.parameters) jobs.push_back({seed, depth, n, p, {}});
      }
    }
  }
  parallel_for(jobs.size(), options.threads, [&](std::size_t i) {
    GradientVarianceSetup s = c.variance;
    s.seed = jobs[i].seed;
    jobs[i].cell = variance_cell(s, jobs[i].depth, jobs[i].n, jobs[i].p);
  });
  ExperimentResult r;
  const auto schema = output_schema(ExperimentKind::kGradientVariance);
  Table cells(schema[0]);
  Table slopes(schema[1]);
  std::map<std::uint64_t, VarianceReport> reports;
  for (const auto& job : jobs) {
    const auto& st = job.cell.stats;
    cells.add_row({static_cast<std::int64_t>(job.seed), std::int64_t{job.depth}, std::int64_t{job.n},
                   to_string(job.p), as_int(st.samples), st.mean, st.mean_standard_error, st.variance,
                   st.variance_standard_error, std::log(st.variance)});
    reports[job.seed].cells.push_back(job.cell);
  }
  for (auto seed : c.seeds) {
    for (int depth : c.variance.depths) {
      for (auto p : c.variance.parameters) {
        const auto& rep = reports[seed];
        const auto usable = std::count_if(rep.cells.begin(), rep.cells.end(), [&](const VarianceCell& v) {
          return v.depth == depth && v.parameter == p && v.stats.variance > 0.0;
        });
        // NaN when fewer than two cells have a positive variance (the log is undefined).
        const double slope = usable >= 2 ? rep.log_variance_slope(depth, p) : std::nan("");
        slopes.add_row({static_cast<std::int64_t>(seed), std::int64_t{depth}, to_string(p), slope});
      }
    }
  }
  r.tables.push_back(std::move(cells));
  r.tables.push_back(std::move(slopes));
  return r;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string to_string(ExperimentKind kind) { return info(kind).name; }

ExperimentKind experiment_kind_from_string(const std::string& name) {
  for (const auto& k : kKinds) {
    if (name == k.name) return k.kind;
  }
  throw std::invalid_argument("unknown experiment kind '" + name + "'");
}

const std::vector<ExperimentKind>& all_experiment_kinds() {
  static const std::vector<ExperimentKind> kinds = [] {
    std::vector<ExperimentKind> out;
    for (const auto& k : kKinds) out.push_back(k.kind);
    return out;
  }();
  return kinds;
}

std::string describe(ExperimentKind kind) { return info(kind).description; }

ExperimentConfig parse_config(const json& j) {
  const Node root(j, "");
  root.object();
  const auto version = root.at("schema_version").integer(0, 1000000);
  if (version != kSchemaVersion) {
    root.at("schema_version").fail("unsupported schema version " + std::to_string(version) + " (expected " +
                                   std::to_string(kSchemaVersion) + ")");
  }
  ExperimentConfig c;
  const std::string kind = root.at("kind").string();
  c.kind = checked("kind", [&] { return experiment_kind_from_string(kind); });

  std::vector<std::string_view> allowed{"schema_version", "kind", "name", "output_dir", "seeds"};
  if (optimizing(c.kind)) {
    for (auto k : {"hamiltonian", "ansatz", "methods", "optimizer"}) allowed.push_back(k);
  }
  if (c.kind == ExperimentKind::kLayerSweep) allowed.push_back("repetitions");
  if (c.kind == ExperimentKind::kJSweep) allowed.push_back("J_values");
  if (c.kind == ExperimentKind::kNoise) allowed.push_back("noise");
  if (ensembles(c.kind)) {
    for (auto k : {"qubits", "moments", "samples", "ensembles", "haar_baseline"}) allowed.push_back(k);
  }
  if (c.kind == ExperimentKind::kPartitionSweep) allowed.push_back("partitions");
  if (c.kind == ExperimentKind::kGradientVariance) allowed.push_back("variance");
  for (const auto& item : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      throw ConfigError(item.key(), "unknown field for kind " + kind);
    }
  }

  c.name = kind;
  if (auto v = root.find("name")) {
    c.name = v->string();
    if (!safe_name(c.name)) v->fail("names may use letters, digits, '_', '-' and '.' only");
  }
  if (auto v = root.find("output_dir")) {
    c.output_dir = v->string();
    if (c.output_dir.empty()) v->fail("must not be empty");
  }
  std::set<std::uint64_t> seen;
  for (const Node& s : root.at("seeds").array()) {
    const auto seed = s.seed();
    if (!seen.insert(seed).second) s.fail("duplicate seed");
    c.seeds.push_back(seed);
  }

  if (optimizing(c.kind)) {
    c.hamiltonian = read_hamiltonian(root.at("hamiltonian"));
    const int n = num_qubits(*c.hamiltonian);
    if (auto a = root.find("ansatz")) {
      a->object().allow_only({"template", "repetitions"});
      if (auto t = a->find("template")) c.ansatz.name = t->string();
      if (auto r = a->find("repetitions")) c.ansatz.repetitions = static_cast<int>(r->integer(1, 1000));
    }
    checked("ansatz", [&] { return make_template(c.ansatz.name, n, c.ansatz.repetitions); });
    c.methods = read_methods(root.at("methods"), *c.hamiltonian);
    c.optimizer = read_optimizer(root.find("optimizer"));
    if (c.optimizer.strategy == Strategy::kParallel &&
        std::none_of(c.methods.begin(), c.methods.end(), [](const MethodConfig& m) { return m.network; })) {
      throw ConfigError("optimizer.strategy", "parallel needs at least one method with a network");
    }
  }
  if (c.kind == ExperimentKind::kLayerSweep) {
    c.repetitions = read_int_list(root.at("repetitions"), 1, 1000);
    for (std::size_t i = 0; i < c.repetitions.size(); ++i) {
      checked("repetitions[" + std::to_string(i) + "]",
              [&] { return make_template(c.ansatz.name, num_qubits(*c.hamiltonian), c.repetitions[i]); });
    }
  }
  if (c.kind == ExperimentKind::kJSweep) c.j_values = read_j_values(root.at("J_values"));
  if (c.kind == ExperimentKind::kNoise) {
    c.noise = read_noise(root.at("noise"));
    if (c.optimizer.stop_on_convergence) {
      if (root.has("optimizer") && root.at("optimizer").has("stop_on_convergence")) {
        throw ConfigError("optimizer.stop_on_convergence", "noise runs use a fixed step count");
      }
      c.optimizer.stop_on_convergence = false;
    }
  }
  if (ensembles(c.kind)) {
    if (auto v = root.find("qubits")) c.qubits = static_cast<int>(v->integer(2, kMaxGroundStateQubits));
    if (c.kind == ExperimentKind::kPartitionSweep && c.qubits % 2 != 0) {
      throw ConfigError("qubits", "partition sweeps need an even qubit count");
    }
    if (auto v = root.find("moments")) c.moments = read_int_list(*v, 1, 8);
    if (auto v = root.find("samples")) c.samples = static_cast<std::size_t>(v->integer(2, 100000000));
    c.ensembles = read_ensembles(root.at("ensembles"), c.qubits);
    if (auto v = root.find("haar_baseline")) {
      v->object().allow_only({"samples", "seed"});
      if (auto s = v->find("samples")) c.haar_baseline.samples = static_cast<std::size_t>(s->integer(2, 100000000));
      if (auto s = v->find("seed")) c.haar_baseline.seed = s->seed();
    }
  }
  if (c.kind == ExperimentKind::kPartitionSweep) {
    if (auto v = root.find("partitions")) {
      v->object().allow_only({"mode", "trials", "seed"});
      if (auto m = v->find("mode")) {
        const std::string mode = m->string();
        if (mode != "random" && mode != "all") m->fail("expected random or all");
        c.partitions.exhaustive = mode == "all";
      }
      if (auto t = v->find("trials")) c.partitions.trials = static_cast<std::size_t>(t->integer(0, 1000000));
      if (auto s = v->find("seed")) c.partitions.seed = s->seed();
    }
    if (c.partitions.exhaustive && c.qubits > 14) throw ConfigError("partitions.mode", "'all' needs qubits <= 14");
  }
  if (c.kind == ExperimentKind::kGradientVariance) c.variance = read_variance(root.find("variance"));
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot read " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& c) {
  json j{{"schema_version", kSchemaVersion},
         {"kind", to_string(c.kind)},
         {"name", c.name},
         {"output_dir", c.output_dir},
         {"seeds", c.seeds}};
  if (optimizing(c.kind)) {
    j["hamiltonian"] = hamiltonian_json(*c.hamiltonian);
    j["ansatz"] = {{"template", c.ansatz.name}, {"repetitions", c.ansatz.repetitions}};
    j["methods"] = methods_json(c.methods);
    j["optimizer"] = optimizer_json(c.optimizer);
  }
  if (c.kind == ExperimentKind::kLayerSweep) j["repetitions"] = c.repetitions;
  if (c.kind == ExperimentKind::kJSweep) j["J_values"] = c.j_values;
  if (c.kind == ExperimentKind::kNoise) {
    j["noise"] = {{"p1", c.noise->p1}, {"p2", c.noise->p2}, {"trajectories", c.noise->trajectories},
                  {"seed", c.noise->seed}};
  }
  if (ensembles(c.kind)) {
    j["qubits"] = c.qubits;
    j["moments"] = c.moments;
    j["samples"] = c.samples;
    j["ensembles"] = ensembles_json(c.ensembles);
    j["haar_baseline"] = {{"samples", c.haar_baseline.samples}, {"seed", c.haar_baseline.seed}};
  }
  if (c.kind == ExperimentKind::kPartitionSweep) {
    j["partitions"] = {{"mode", c.partitions.exhaustive ? "all" : "random"},
                       {"trials", c.partitions.trials},
                       {"seed", c.partitions.seed}};
  }
  if (c.kind == ExperimentKind::kGradientVariance) j["variance"] = variance_json(c.variance);
  return j;
}

void override_seed(ExperimentConfig& c, std::uint64_t seed) { c.seeds = {seed}; }

std::vector<TableSchema> output_schema(ExperimentKind kind) {
  const std::vector<std::string> outcome{"steps", "converged", "failed"};
  switch (kind) {
    case ExperimentKind::kGroundState:
      return {{"summary",
               {"method", "seed", "steps", "converged", "failed", "final_energy", "best_energy",
                "exact_ground_energy", "best_energy_error"}},
              {"trace_<method>",
               {"method", "seed", "step", "energy", "energy_error", "grad_phi_norm", "grad_theta_norm", "term_count",
                "circuit_executions"}}};
    case ExperimentKind::kLayerSweep:
      return {{"summary",
               {"method", "repetitions", "seed", "steps", "converged", "failed", "best_energy", "exact_ground_energy",
                "best_energy_error"}}};
    case ExperimentKind::kJSweep:
      return {{"summary",
               {"J", "method", "seed", "steps", "converged", "failed", "best_energy", "exact_ground_energy",
                "best_energy_error"}}};
    case ExperimentKind::kNoise:
      return {{"trace", {"method", "seed", "step", "mean_energy", "error_bar", "repeats", "exact_ground_energy"}},
              {"repeats", {"method", "seed", "repeat", "noise_seed", "step", "energy"}}};
    case ExperimentKind::kExpressivity:
      return {{"delta",
               {"ensemble", "seed", "ansatz", "repetitions", "network", "layers", "t", "delta", "standard_error",
                "haar_mean", "haar_standard_error", "ensemble_mean", "ensemble_standard_error", "samples"}}};
    case ExperimentKind::kPartitionSweep:
      return {{"partitions",
               {"ensemble", "seed", "ansatz", "repetitions", "network", "layers", "t", "trial", "subset",
                "contiguous", "delta", "standard_error"}}};
    case ExperimentKind::kGradientVariance:
      return {{"cells",
               {"seed", "depth", "n", "parameter", "samples", "mean", "mean_standard_error", "variance",
                "variance_standard_error", "log_variance"}},
              {"slopes", {"seed", "depth", "parameter", "log_variance_slope"}}};
  }
  throw std::invalid_argument("unknown experiment kind");
}

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != schema_.columns.size()) {
    throw std::logic_error("table " + schema_.suffix + ": row has " + std::to_string(row.size()) + " cells, expected " +
                           std::to_string(schema_.columns.size()));
  }
  rows_.push_back(std::move(row));
}

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  std::string s(buf);
  std::replace(s.begin(), s.end(), ',', '.');
  return s;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

void write_csv(std::ostream& out, const Table& table) {
  const auto& cols = table.schema().columns;
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << csv_field(cols[i]);
  out << '\n';
  for (const auto& row : table.rows()) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      std::visit(
          [&out](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
              out << format_real(v);
            } else if constexpr (std::is_same_v<T, std::string>) {
              out << csv_field(v);
            } else {
              out << v;
            }
          },
          row[i]);
    }
    out << '\n';
  }
}

int resolve_threads(std::optional<int> requested) {
  if (requested) {
    if (*requested < 1) throw std::invalid_argument("thread count must be >= 1");
    return *requested;
  }
  if (const char* env = std::getenv(kThreadsEnv); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1 || v > 4096) {
      throw std::invalid_argument(std::string(kThreadsEnv) + " must be a positive integer");
    }
    return static_cast<int>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& task) {
  const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, threads)));
  std::vector<std::exception_ptr> errors(count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
        break;
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count && !stop; i = next++) {
          try {
            task(i);
          } catch (...) {
            errors[i] = std::current_exception();
            stop = true;
          }
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

ExperimentResult run_experiment(const ExperimentConfig& c, const RunOptions& options) {
  switch (c.kind) {
    case ExperimentKind::kGroundState: return run_ground_state(c, options);
    case ExperimentKind::kLayerSweep: return run_layer_sweep(c, options);
    case ExperimentKind::kJSweep: return run_j_sweep(c, options);
    case ExperimentKind::kNoise: return run_noise(c, options);
    case ExperimentKind::kExpressivity: return run_expressivity(c, options);
    case ExperimentKind::kPartitionSweep: return run_partition_sweep(c, options);
    case ExperimentKind::kGradientVariance: return run_gradient_variance(c, options);
  }
  throw std::invalid_argument("unknown experiment kind");
}

std::vector<std::filesystem::path> write_outputs(const ExperimentConfig& c, const ExperimentResult& r,
                                                 const json& run_info) {
  namespace fs = std::filesystem;
  const fs::path dir(c.output_dir);
  fs::create_directories(dir);
  std::vector<fs::path> written;
  json files = json::array();
  for (const auto& t : r.tables) {
    const fs::path p = dir / (c.name + "_" + t.schema().suffix + ".csv");
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    write_csv(out, t);
    if (!out) throw std::runtime_error("write failed for " + p.string());
    written.push_back(p);
    files.push_back(p.filename().string());
  }
  json sidecar{{"library", "tnpqc"},
               {"version", library_version()},
               {"schema_version", kSchemaVersion},
               {"config", to_json(c)},
               {"files", files},
               {"summary", r.summary},
               {"failures", r.failures},
               {"written_at", utc_now()}};
  for (const auto& [k, v] : run_info.items()) sidecar[k] = v;
  const fs::path p = dir / (c.name + ".json");
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << sidecar.dump(2) << '\n';
  written.push_back(p);
  return written;
}

}  // namespace tnpqc
