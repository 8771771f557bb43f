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

#ifndef TNPQC_OPTIMIZE_HPP
#define TNPQC_OPTIMIZE_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tnpqc/pauli.hpp"
#include "tnpqc/simulator.hpp"
#include "tnpqc/tn_rotation.hpp"

namespace tnpqc {

/// How E(theta, phi) is evaluated.
///  - kPauliExpansion: rotate H into sum_P c_P(theta) P and measure every term.
///  - kNetwork: apply U(theta) to the prepared state and measure the original H.
/// Both compute <0|U(phi)^dag U(theta)^dag H U(theta) U(phi)|0>; kAuto picks
/// kPauliExpansion up to kAutoPauliMaxQubits qubits.
enum class EvaluationMode { kAuto, kPauliExpansion, kNetwork };

inline constexpr int kAutoPauliMaxQubits = 12;

enum class GradientMethod { kParameterShift, kAdjoint };

std::string to_string(EvaluationMode mode);
std::string to_string(GradientMethod method);
EvaluationMode evaluation_mode_from_string(const std::string& name);
GradientMethod gradient_method_from_string(const std::string& name);

struct ModelOptions {
  EvaluationMode evaluation = EvaluationMode::kAuto;
  GradientMethod gradient = GradientMethod::kParameterShift;
  double prune = kDefaultPrune;
  /// When set, every circuit execution samples one noise trajectory.
  std::optional<NoiseModel> noise;
};

struct PhiGradient {
  std::vector<double> values;
  std::uint64_t circuit_executions = 0;
};

/// The TN-PQC objective for one Hamiltonian, optional network layout and ansatz.
class EnergyModel {
 public:
  EnergyModel(PauliSum h, std::optional<TnLayout> layout, AnsatzSpec ansatz, ModelOptions options = {});

  std::size_t num_theta() const { return layout_ ? layout_->num_parameters() : 0; }
  std::size_t num_phi() const { return ansatz_.num_parameters; }
  int num_qubits() const { return h_.num_qubits(); }
  EvaluationMode mode() const { return mode_; }
  const PauliSum& hamiltonian() const { return h_; }
  const std::optional<TnLayout>& layout() const { return layout_; }
  const AnsatzSpec& ansatz() const { return ansatz_; }
  const ModelOptions& options() const { return options_; }

  /// Runs U(phi)|0> once: noiseless, or one sampled trajectory under noise.
  StateVector prepare(std::span<const double> phi, Rng& rng) const;

  /// E for a prepared state.
  double energy_of_state(std::span<const double> theta, const StateVector& psi) const;
  double energy(std::span<const double> theta, std::span<const double> phi, Rng& rng) const;

  PhiGradient phi_gradient(std::span<const double> theta, std::span<const double> phi, Rng& rng) const;

  /// dE/dtheta at a fixed prepared state: sum_P (dc_P/dtheta) <P>, or adjoint
  /// differentiation through the network in kNetwork mode.
  std::vector<double> theta_gradient(std::span<const double> theta, const StateVector& psi) const;

  /// Number of Pauli strings in H(theta).
  std::size_t term_count(std::span<const double> theta) const;

  /// H(theta) bound to a fixed theta.
  class Observable;

 private:
  std::unique_ptr<Observable> observable(std::span<const double> theta) const;
  std::vector<CircuitOp> circuit(Rng& rng) const;

  PauliSum h_;
  std::optional<TnLayout> layout_;
  AnsatzSpec ansatz_;
  ModelOptions options_;
  EvaluationMode mode_;
};

enum class Strategy { kAlternating, kParallel, kPureVqe };
enum class ThetaInit { kUniform, kZero };

std::string to_string(Strategy strategy);
Strategy strategy_from_string(const std::string& name);

struct OptimizerConfig {
  Strategy strategy = Strategy::kAlternating;
  double learning_rate = 0.05;
  int max_steps = 100;
  /// Stop once |E_t - E_{t-1}| < tolerance (when stop_on_convergence).
  double tolerance = 1e-3;
  bool stop_on_convergence = true;
  int n_classical = 1;
  int n_quantum = 1;
  std::uint64_t seed = 0;
  ThetaInit theta_init = ThetaInit::kUniform;
  std::optional<std::vector<double>> initial_theta;
  std::optional<std::vector<double>> initial_phi;
  bool freeze_theta = false;
  /// Only honoured on the Pauli-expansion route; network runs record 0.
  bool record_term_count = true;
  ModelOptions model;
};

void validate(const OptimizerConfig& cfg);

struct StepRecord {
  int step = 0;
  double energy = 0.0;
  double grad_phi_norm = 0.0;
  double grad_theta_norm = 0.0;
  std::size_t term_count = 0;
  /// Cumulative PQC executions (state preparations) so far.
  std::uint64_t circuit_executions = 0;
  double wall_seconds = 0.0;
};

struct RunRecord {
  std::vector<StepRecord> steps;
  bool converged = false;
  bool failed = false;
  std::string failure;
  double best_energy = 0.0;
  std::vector<double> best_theta;
  std::vector<double> best_phi;
  std::vector<double> final_theta;
  std::vector<double> final_phi;
};

/// Per cycle: a phi step at (theta_0, phi_0), then a theta step at (theta_0, phi_1).
RunRecord optimize_alternating(const PauliSum& h, const TnLayout& layout, const AnsatzSpec& ansatz,
                               const OptimizerConfig& cfg);

/// Per cycle from (theta_0, phi_0): n_quantum phi steps at fixed theta_0 and
/// n_classical theta steps at fixed phi_0, the latter reusing the state measured
/// at the end of the previous cycle.
RunRecord optimize_parallel(const PauliSum& h, const TnLayout& layout, const AnsatzSpec& ansatz,
                            const OptimizerConfig& cfg);

/// Plain VQE on H.
RunRecord optimize_pure_vqe(const PauliSum& h, const AnsatzSpec& ansatz, const OptimizerConfig& cfg);

/// Dispatches on cfg.strategy; layout is ignored for kPureVqe.
RunRecord optimize(const PauliSum& h, const std::optional<TnLayout>& layout, const AnsatzSpec& ansatz,
                   const OptimizerConfig& cfg);

}  // namespace tnpqc

#endif  // TNPQC_OPTIMIZE_HPP
