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

#include "tnpqc/optimize.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <unordered_map>

namespace tnpqc {

std::string to_string(EvaluationMode mode) {
  switch (mode) {
    case EvaluationMode::kAuto: return "auto";
    case EvaluationMode::kPauliExpansion: return "pauli";
    case EvaluationMode::kNetwork: return "network";
  }
  return "auto";
}

std::string to_string(GradientMethod method) {
  return method == GradientMethod::kAdjoint ? "adjoint" : "parameter_shift";
}

EvaluationMode evaluation_mode_from_string(const std::string& name) {
  if (name == "auto") return EvaluationMode::kAuto;
  if (name == "pauli") return EvaluationMode::kPauliExpansion;
  if (name == "network") return EvaluationMode::kNetwork;
  throw std::invalid_argument("unknown evaluation mode '" + name + "'");
}

GradientMethod gradient_method_from_string(const std::string& name) {
  if (name == "parameter_shift") return GradientMethod::kParameterShift;
  if (name == "adjoint") return GradientMethod::kAdjoint;
  throw std::invalid_argument("unknown gradient method '" + name + "'");
}

std::string to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::kAlternating: return "alternating";
    case Strategy::kParallel: return "parallel";
    case Strategy::kPureVqe: return "pure";
  }
  return "alternating";
}

Strategy strategy_from_string(const std::string& name) {
  if (name == "alternating") return Strategy::kAlternating;
  if (name == "parallel") return Strategy::kParallel;
  if (name == "pure") return Strategy::kPureVqe;
  throw std::invalid_argument("unknown strategy '" + name + "'");
}

// H(theta) frozen for a fixed theta.
class EnergyModel::Observable {
 public:
  virtual ~Observable() = default;
  virtual double expectation(const StateVector& psi) const = 0;
  virtual StateVector apply(const StateVector& psi) const = 0;
};

namespace {

class PauliObservable final : public EnergyModel::Observable {
 public:
  explicit PauliObservable(PauliSum sum) : sum_(std::move(sum)) {}
  double expectation(const StateVector& psi) const override { return tnpqc::expectation(psi, sum_); }
  StateVector apply(const StateVector& psi) const override { return apply_sum(sum_, psi); }

 private:
  PauliSum sum_;
};

class NetworkObservable final : public EnergyModel::Observable {
 public:
  NetworkObservable(const PauliSum& h, const TnLayout& layout, std::span<const double> theta)
      : h_(h), layout_(layout), theta_(theta.begin(), theta.end()) {}

  double expectation(const StateVector& psi) const override {
    StateVector rotated = psi;
    rotated.apply_network(layout_, theta_);
    return tnpqc::expectation(rotated, h_);
  }

  StateVector apply(const StateVector& psi) const override {
    StateVector rotated = psi;
    rotated.apply_network(layout_, theta_);
    StateVector out = apply_sum(h_, rotated);
    out.apply_network_inverse(layout_, theta_);
    return out;
  }

 private:
  const PauliSum& h_;
  const TnLayout& layout_;
  std::vector<double> theta_;
};

double norm2(std::span<const double> v) {
  double total = 0.0;
  for (double x : v) total += x * x;
  return std::sqrt(total);
}

PauliTerm rotation_generator(int n, const Gate& g) {
  return PauliTerm::single(n, g.q0, g.kind == GateKind::kRY ? 'Y' : 'X');
}

}  // namespace

EnergyModel::EnergyModel(PauliSum h, std::optional<TnLayout> layout, AnsatzSpec ansatz, ModelOptions options)
    : h_(std::move(h)), layout_(std::move(layout)), ansatz_(std::move(ansatz)), options_(std::move(options)) {
  if (ansatz_.n != h_.num_qubits()) {
    throw std::invalid_argument("EnergyModel: ansatz has " + std::to_string(ansatz_.n) +
                                " qubits, Hamiltonian has " + std::to_string(h_.num_qubits()));
  }
  if (layout_ && layout_->n != h_.num_qubits()) throw std::invalid_argument("EnergyModel: layout qubit count mismatch");
  if (options_.noise) validate(*options_.noise);
  mode_ = options_.evaluation;
  if (mode_ == EvaluationMode::kAuto) {
    mode_ = (!layout_ || h_.num_qubits() <= kAutoPauliMaxQubits) ? EvaluationMode::kPauliExpansion
                                                                  : EvaluationMode::kNetwork;
  }
}

std::unique_ptr<EnergyModel::Observable> EnergyModel::observable(std::span<const double> theta) const {
  if (theta.size() != num_theta()) {
    throw std::invalid_argument("EnergyModel: theta has " + std::to_string(theta.size()) + " entries, expected " +
                                std::to_string(num_theta()));
  }
  if (!layout_) return std::make_unique<PauliObservable>(h_);
  if (mode_ == EvaluationMode::kNetwork) return std::make_unique<NetworkObservable>(h_, *layout_, theta);
  return std::make_unique<PauliObservable>(rotate_hamiltonian(h_, *layout_, theta, options_.prune).sum);
}

std::vector<CircuitOp> EnergyModel::circuit(Rng& rng) const {
  if (options_.noise && options_.noise->active()) return sample_trajectory(ansatz_, *options_.noise, rng);
  return noiseless_ops(ansatz_);
}

StateVector EnergyModel::prepare(std::span<const double> phi, Rng& rng) const {
  if (phi.size() != num_phi()) throw std::invalid_argument("EnergyModel: bad phi length");
  return run_ops(ansatz_.n, circuit(rng), phi);
}

double EnergyModel::energy_of_state(std::span<const double> theta, const StateVector& psi) const {
  return observable(theta)->expectation(psi);
}

double EnergyModel::energy(std::span<const double> theta, std::span<const double> phi, Rng& rng) const {
  return energy_of_state(theta, prepare(phi, rng));
}

PhiGradient EnergyModel::phi_gradient(std::span<const double> theta, std::span<const double> phi, Rng& rng) const {
  if (phi.size() != num_phi()) throw std::invalid_argument("EnergyModel: bad phi length");
  const auto obs = observable(theta);
  PhiGradient out;
  out.values.assign(phi.size(), 0.0);

  if (options_.gradient == GradientMethod::kParameterShift) {
    std::vector<double> shifted(phi.begin(), phi.end());
    const double shift = std::numbers::pi / 2.0;
    for (std::size_t k = 0; k < phi.size(); ++k) {
      shifted[k] = phi[k] + shift;
      const double plus = obs->expectation(run_ops(ansatz_.n, circuit(rng), shifted));
      shifted[k] = phi[k] - shift;
      const double minus = obs->expectation(run_ops(ansatz_.n, circuit(rng), shifted));
      shifted[k] = phi[k];
      out.values[k] = 0.5 * (plus - minus);
    }
    out.circuit_executions = 2 * phi.size();
    return out;
  }

  // Adjoint differentiation over one (possibly noisy) execution.
  const auto ops = circuit(rng);
  StateVector psi = run_ops(ansatz_.n, ops, phi);
  StateVector lambda = obs->apply(psi);
  const std::complex<double> minus_half_i(0.0, -0.5);
  for (auto it = ops.rbegin(); it != ops.rend(); ++it) {
    if (it->is_error) {
      psi.apply_pauli(it->error);
      lambda.apply_pauli(it->error);
      continue;
    }
    const Gate& g = it->gate;
    if (g.parametrized()) {
      out.values[g.param] += 2.0 * (minus_half_i * matrix_element(lambda, rotation_generator(ansatz_.n, g), psi)).real();
    }
    psi.apply_gate_inverse(g, phi);
    lambda.apply_gate_inverse(g, phi);
  }
  out.circuit_executions = 1;
  return out;
}

std::vector<double> EnergyModel::theta_gradient(std::span<const double> theta, const StateVector& psi) const {
  if (!layout_) return {};
  if (theta.size() != num_theta()) throw std::invalid_argument("EnergyModel: bad theta length");
  std::vector<double> grad(theta.size(), 0.0);

  if (mode_ == EvaluationMode::kPauliExpansion) {
    const auto sums = coefficient_gradients(h_, *layout_, theta, options_.prune);
    std::unordered_map<PauliTerm, double, PauliTermHash> measured;
    for (std::size_t k = 0; k < sums.size(); ++k) {
      double total = 0.0;
      for (const auto& e : sums[k]) {
        auto [it, inserted] = measured.try_emplace(e.term, 0.0);
        if (inserted) it->second = expectation(psi, e.term);
        total += e.coefficient * it->second;
      }
      grad[k] = total;
    }
    return grad;
  }

  // d/dtheta_{j,k} of <psi|U^dag H U|psi> with dB_j = i G_k B_j.
  StateVector forward = psi;
  forward.apply_network(*layout_, theta);
  StateVector lambda = apply_sum(h_, forward);
  const int n = h_.num_qubits();
  for (std::size_t j = layout_->blocks.size(); j-- > 0;) {
    const Block& b = layout_->blocks[j];
    const std::uint64_t mask = (1ULL << b.site_a) | (1ULL << b.site_b);
    const PauliTerm generators[3] = {PauliTerm(n, mask, 0), PauliTerm(n, mask, mask), PauliTerm(n, 0, mask)};
    for (int k = 0; k < 3; ++k) {
      grad[3 * j + k] = 2.0 * (std::complex<double>(0.0, 1.0) * matrix_element(lambda, generators[k], forward)).real();
    }
    const Eigen::Matrix4cd inv = block_unitary(theta[3 * j], theta[3 * j + 1], theta[3 * j + 2]).adjoint();
    forward.apply_two_qubit(b.site_a, b.site_b, inv);
    lambda.apply_two_qubit(b.site_a, b.site_b, inv);
  }
  return grad;
}

std::size_t EnergyModel::term_count(std::span<const double> theta) const {
  if (!layout_) return h_.size();
  return rotate_hamiltonian(h_, *layout_, theta, options_.prune).term_count();
}

void validate(const OptimizerConfig& cfg) {
  if (!(cfg.learning_rate >= 0.0) || !std::isfinite(cfg.learning_rate)) {
    throw std::invalid_argument("optimizer: learning_rate must be a finite non-negative number");
  }
  if (cfg.max_steps < 0) throw std::invalid_argument("optimizer: max_steps must be >= 0");
  if (!(cfg.tolerance > 0.0)) throw std::invalid_argument("optimizer: tolerance must be > 0");
  if (cfg.n_classical < 1 || cfg.n_quantum < 1) throw std::invalid_argument("optimizer: n_classical, n_quantum >= 1");
  if (cfg.model.noise) validate(*cfg.model.noise);
}

namespace {

class Run {
 public:
  Run(const EnergyModel& model, const OptimizerConfig& cfg)
      : model_(model), cfg_(cfg), noise_rng_(cfg.model.noise ? cfg.model.noise->seed : 0), start_(Clock::now()) {
    validate(cfg);
    Rng init(cfg.seed);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    if (cfg.initial_phi) {
      if (cfg.initial_phi->size() != model.num_phi()) throw std::invalid_argument("optimizer: initial_phi has wrong length");
      phi_ = *cfg.initial_phi;
    } else {
      phi_.resize(model.num_phi());
      for (auto& p : phi_) p = angle(init);
    }
    if (cfg.initial_theta) {
      if (cfg.initial_theta->size() != model.num_theta()) {
        throw std::invalid_argument("optimizer: initial_theta has wrong length");
      }
      theta_ = *cfg.initial_theta;
    } else {
      theta_.assign(model.num_theta(), 0.0);
      if (cfg.theta_init == ThetaInit::kUniform && !cfg.freeze_theta) {
        for (auto& t : theta_) t = angle(init);
      }
    }
  }

  std::vector<double>& theta() { return theta_; }
  std::vector<double>& phi() { return phi_; }
  Rng& noise_rng() { return noise_rng_; }
  void count(std::uint64_t executions) { executions_ += executions; }

  StateVector prepare() {
    ++executions_;
    return model_.prepare(phi_, noise_rng_);
  }

  // Returns false when the run must stop.
  bool record(int step, double energy, double gphi, double gtheta) {
    StepRecord s;
    s.step = step;
    s.energy = energy;
    s.grad_phi_norm = gphi;
    s.grad_theta_norm = gtheta;
    s.term_count = cfg_.record_term_count && model_.mode() == EvaluationMode::kPauliExpansion ? model_.term_count(theta_) : 0;
    s.circuit_executions = executions_;
    s.wall_seconds = std::chrono::duration<double>(Clock::now() - start_).count();
    out_.steps.push_back(s);
    if (!std::isfinite(energy)) {
      out_.failed = true;
      out_.failure = "non-finite energy at step " + std::to_string(step) + " (learning rate too large?)";
      return false;
    }
    if (out_.best_theta.empty() && out_.best_phi.empty() ? true : energy < out_.best_energy) {
      out_.best_energy = energy;
      out_.best_theta = theta_;
      out_.best_phi = phi_;
    }
    if (out_.steps.size() >= 2) {
      const double previous = out_.steps[out_.steps.size() - 2].energy;
      if (std::abs(energy - previous) < cfg_.tolerance) {
        out_.converged = true;
        if (cfg_.stop_on_convergence) return false;
      }
    }
    return true;
  }

  RunRecord finish() {
    out_.final_theta = theta_;
    out_.final_phi = phi_;
    if (out_.best_theta.empty() && out_.best_phi.empty() && !out_.steps.empty()) {
      out_.best_energy = out_.steps.front().energy;
    }
    return std::move(out_);
  }

  void step_down(std::vector<double>& params, const std::vector<double>& grad) const {
    for (std::size_t k = 0; k < params.size(); ++k) params[k] -= cfg_.learning_rate * grad[k];
  }

 private:
  using Clock = std::chrono::steady_clock;
  const EnergyModel& model_;
  const OptimizerConfig& cfg_;
  Rng noise_rng_;
  Clock::time_point start_;
  std::vector<double> theta_;
  std::vector<double> phi_;
  std::uint64_t executions_ = 0;
  RunRecord out_;
};

ModelOptions options_for(const OptimizerConfig& cfg) { return cfg.model; }

RunRecord run_alternating(const EnergyModel& model, const OptimizerConfig& cfg) {
  Run run(model, cfg);
  StateVector psi = run.prepare();
  if (!run.record(0, model.energy_of_state(run.theta(), psi), 0.0, 0.0)) return run.finish();
  for (int step = 1; step <= cfg.max_steps; ++step) {
    const PhiGradient gphi = model.phi_gradient(run.theta(), run.phi(), run.noise_rng());
    run.count(gphi.circuit_executions);
    run.step_down(run.phi(), gphi.values);
    psi = run.prepare();
    double theta_norm = 0.0;
    if (!cfg.freeze_theta && model.num_theta() > 0) {
      const auto gtheta = model.theta_gradient(run.theta(), psi);
      theta_norm = norm2(gtheta);
      run.step_down(run.theta(), gtheta);
    }
    if (!run.record(step, model.energy_of_state(run.theta(), psi), norm2(gphi.values), theta_norm)) break;
  }
  return run.finish();
}

}  // namespace

RunRecord optimize_alternating(const PauliSum& h, const TnLayout& layout, const AnsatzSpec& ansatz,
                               const OptimizerConfig& cfg) {
  const EnergyModel model(h, layout, ansatz, options_for(cfg));
  return run_alternating(model, cfg);
}

RunRecord optimize_parallel(const PauliSum& h, const TnLayout& layout, const AnsatzSpec& ansatz,
                            const OptimizerConfig& cfg) {
  const EnergyModel model(h, layout, ansatz, options_for(cfg));
  Run run(model, cfg);
  StateVector measured = run.prepare();
  if (!run.record(0, model.energy_of_state(run.theta(), measured), 0.0, 0.0)) return run.finish();
  for (int cycle = 1; cycle <= cfg.max_steps; ++cycle) {
    const std::vector<double> theta0 = run.theta();

    // Quantum thread: theta held at theta0.
    double phi_norm = 0.0;
    for (int j = 0; j < cfg.n_quantum; ++j) {
      const PhiGradient g = model.phi_gradient(theta0, run.phi(), run.noise_rng());
      run.count(g.circuit_executions);
      if (j == 0) phi_norm = norm2(g.values);
      run.step_down(run.phi(), g.values);
    }

    // Classical thread: phi held at phi0 through the state measured last cycle.
    double theta_norm = 0.0;
    if (!cfg.freeze_theta && model.num_theta() > 0) {
      std::vector<double> theta = theta0;
      for (int i = 0; i < cfg.n_classical; ++i) {
        const auto g = model.theta_gradient(theta, measured);
        if (i == 0) theta_norm = norm2(g);
        run.step_down(theta, g);
      }
      run.theta() = std::move(theta);
    }

    measured = run.prepare();
    if (!run.record(cycle, model.energy_of_state(run.theta(), measured), phi_norm, theta_norm)) break;
  }
  return run.finish();
}

RunRecord optimize_pure_vqe(const PauliSum& h, const AnsatzSpec& ansatz, const OptimizerConfig& cfg) {
  const EnergyModel model(h, std::nullopt, ansatz, options_for(cfg));
  return run_alternating(model, cfg);
}

RunRecord optimize(const PauliSum& h, const std::optional<TnLayout>& layout, const AnsatzSpec& ansatz,
                   const OptimizerConfig& cfg) {
  switch (cfg.strategy) {
    case Strategy::kPureVqe: return optimize_pure_vqe(h, ansatz, cfg);
    case Strategy::kParallel:
      if (!layout) throw std::invalid_argument("optimize: parallel strategy needs a network layout");
      return optimize_parallel(h, *layout, ansatz, cfg);
    case Strategy::kAlternating:
      if (!layout) return optimize_pure_vqe(h, ansatz, cfg);
      return optimize_alternating(h, *layout, ansatz, cfg);
  }
  throw std::invalid_argument("optimize: unknown strategy");
}

}  // namespace tnpqc
