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

#ifndef TNPQC_SIMULATOR_HPP
#define TNPQC_SIMULATOR_HPP

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tnpqc/pauli.hpp"
#include "tnpqc/tn_rotation.hpp"

namespace tnpqc {

/// Largest register the state-vector simulator accepts.
inline constexpr int kMaxStateQubits = 26;

using Rng = std::mt19937_64;

enum class GateKind { kRY, kRX, kCZ, kCNOT };

/// RY/RX use `param`; CZ/CNOT use (q0, q1) with q0 the control for CNOT.
struct Gate {
  GateKind kind = GateKind::kRY;
  int q0 = 0;
  int q1 = -1;
  int param = -1;

  bool parametrized() const { return kind == GateKind::kRY || kind == GateKind::kRX; }
  bool two_qubit() const { return kind == GateKind::kCZ || kind == GateKind::kCNOT; }
};

/// Gate program U(phi) acting on |0...0>.
struct AnsatzSpec {
  int n = 0;
  std::string name;
  int repetitions = 1;
  std::vector<Gate> gates;
  std::size_t num_parameters = 0;

  /// Replicates `layer` `repetitions` times, renumbering each copy's parameters
  /// so indices stay dense. Throws on out-of-range sites or a parameter that is
  /// used by more than one gate.
  static AnsatzSpec repeat(int n, std::string name, const std::vector<Gate>& layer, int repetitions);

  /// `tail` appended after this program with its parameters shifted past ours.
  AnsatzSpec followed_by(const AnsatzSpec& tail) const;
};

/// m x [RY on every site, CZ_{i,i+1} chain].
AnsatzSpec template_a(int n, int repetitions = 1);
/// [RY layer, RX layer, CNOT chain] x 2.
AnsatzSpec template_b(int n);
/// m x [RY layer, CNOT chain].
AnsatzSpec template_c(int n, int repetitions = 1);
/// m x [RX layer, RY layer, CNOT chain]; the layer used by the gradient-variance study.
AnsatzSpec template_rx_ry_cnot(int n, int repetitions);
/// `count` rotation parameters laid out as RX/RY/CNOT layers, the last layer
/// truncated so the parameter total is exact.
AnsatzSpec quantum_filler(int n, std::size_t count);

AnsatzSpec make_template(const std::string& name, int n, int repetitions);

class StateVector {
 public:
  StateVector() = default;
  /// |0...0> on n qubits.
  explicit StateVector(int n);
  static StateVector from_amplitudes(int n, std::vector<std::complex<double>> amplitudes);

  int num_qubits() const { return n_; }
  std::size_t dimension() const { return amps_.size(); }
  std::span<const std::complex<double>> amplitudes() const { return amps_; }
  std::span<std::complex<double>> amplitudes() { return amps_; }
  const std::complex<double>& operator[](std::size_t k) const { return amps_[k]; }

  double norm() const;

  void apply_ry(int q, double angle);
  void apply_rx(int q, double angle);
  void apply_cz(int a, int b);
  void apply_cnot(int control, int target);
  void apply_pauli(const PauliTerm& p);
  /// 4x4 unitary with basis index 2*bit_a + bit_b.
  void apply_two_qubit(int a, int b, const Eigen::Matrix4cd& u);
  void apply_gate(const Gate& gate, std::span<const double> phi);
  void apply_gate_inverse(const Gate& gate, std::span<const double> phi);

  /// Applies the network U(theta) (block 0 first) or its inverse.
  void apply_network(const TnLayout& layout, std::span<const double> theta);
  void apply_network_inverse(const TnLayout& layout, std::span<const double> theta);

  std::complex<double> inner(const StateVector& other) const;  // <this|other>

 private:
  int n_ = 0;
  std::vector<std::complex<double>> amps_;
};

/// One step of an executed circuit: an ansatz gate, or a Pauli error inserted
/// by a noise trajectory.
struct CircuitOp {
  bool is_error = false;
  Gate gate;
  PauliTerm error;
};

std::vector<CircuitOp> noiseless_ops(const AnsatzSpec& ansatz);
StateVector run_ops(int n, const std::vector<CircuitOp>& ops, std::span<const double> phi);

/// U(phi)|0...0>. Throws when phi has the wrong length.
StateVector run(const AnsatzSpec& ansatz, std::span<const double> phi);

/// <psi|P|psi>, exact.
double expectation(const StateVector& state, const PauliTerm& p);
/// sum_P c_P <P>.
double expectation(const StateVector& state, const PauliSum& h);

/// <bra|P|ket> in one pass, without materializing P|ket>.
std::complex<double> matrix_element(const StateVector& bra, const PauliTerm& p, const StateVector& ket);
/// H|psi>.
StateVector apply_sum(const PauliSum& h, const StateVector& state);

/// E(theta, phi) = sum over stored terms of c_P <P>_phi.
double energy(const RotatedHamiltonian& r, const AnsatzSpec& ansatz, std::span<const double> phi);

/// dE/dphi_k = [E(phi + pi/2 e_k) - E(phi - pi/2 e_k)] / 2.
std::vector<double> parameter_shift_gradient(const RotatedHamiltonian& r, const AnsatzSpec& ansatz,
                                             std::span<const double> phi);

struct NoiseModel {
  double p1 = 0.0;  // after every single-qubit gate
  double p2 = 0.0;  // after every two-qubit gate
  int trajectories = 1;
  std::uint64_t seed = 0;

  bool active() const { return p1 > 0.0 || p2 > 0.0; }
};

void validate(const NoiseModel& noise);

/// Ansatz gates with depolarizing errors sampled in: after each single-qubit
/// (two-qubit) gate, with probability p1 (p2) a uniformly random non-identity
/// Pauli on the gate's support (3 or 15 choices).
std::vector<CircuitOp> sample_trajectory(const AnsatzSpec& ansatz, const NoiseModel& noise, Rng& rng);

/// 3 * sqrt(sum_i (v_i - mean)^2 / S^2).
double error_bar(std::span<const double> values);

struct NoisyEstimate {
  double mean = 0.0;
  double error_bar = 0.0;
  std::vector<double> values;
};

/// Mean over noise.trajectories sampled trajectories; seeded by noise.seed.
NoisyEstimate noisy_energy(const RotatedHamiltonian& r, const AnsatzSpec& ansatz,
                           std::span<const double> phi, const NoiseModel& noise);

}  // namespace tnpqc

#endif  // TNPQC_SIMULATOR_HPP
