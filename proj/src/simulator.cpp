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

#include "tnpqc/simulator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

namespace tnpqc {
namespace {

using cd = std::complex<double>;

inline double parity_sign(std::uint64_t bits) { return (std::popcount(bits) & 1) ? -1.0 : 1.0; }

void check_site(int n, int q, const char* where) {
  if (q < 0 || q >= n) throw std::out_of_range(std::string(where) + ": qubit index out of range");
}

std::vector<Gate> rotation_layer(int n, GateKind kind, int& next_param) {
  std::vector<Gate> out;
  for (int q = 0; q < n; ++q) out.push_back({kind, q, -1, next_param++});
  return out;
}

std::vector<Gate> entangler_chain(int n, GateKind kind) {
  std::vector<Gate> out;
  for (int q = 0; q + 1 < n; ++q) out.push_back({kind, q, q + 1, -1});
  return out;
}

void append(std::vector<Gate>& dst, const std::vector<Gate>& src) { dst.insert(dst.end(), src.begin(), src.end()); }

void check_template_args(int n, int repetitions) {
  if (n < 2) throw std::invalid_argument("ansatz template: n must be >= 2");
  if (repetitions < 1) throw std::invalid_argument("ansatz template: repetitions must be >= 1");
}

}  // namespace

AnsatzSpec AnsatzSpec::repeat(int n, std::string name, const std::vector<Gate>& layer, int repetitions) {
  if (n < 1 || n > kMaxStateQubits) throw std::invalid_argument("AnsatzSpec: bad qubit count");
  if (repetitions < 1) throw std::invalid_argument("AnsatzSpec: repetitions must be >= 1");
  std::set<int> used;
  int per_layer = 0;
  for (const Gate& g : layer) {
    check_site(n, g.q0, "AnsatzSpec");
    if (g.two_qubit()) {
      check_site(n, g.q1, "AnsatzSpec");
      if (g.q0 == g.q1) throw std::invalid_argument("AnsatzSpec: two-qubit gate on a single site");
    }
    if (g.parametrized()) {
      if (g.param < 0 || !used.insert(g.param).second) {
        throw std::invalid_argument("AnsatzSpec: each rotation needs its own parameter index");
      }
      per_layer = std::max(per_layer, g.param + 1);
    }
  }
  if (static_cast<int>(used.size()) != per_layer) {
    throw std::invalid_argument("AnsatzSpec: parameter indices must be dense");
  }
  AnsatzSpec out;
  out.n = n;
  out.name = std::move(name);
  out.repetitions = repetitions;
  for (int r = 0; r < repetitions; ++r) {
    for (Gate g : layer) {
      if (g.parametrized()) g.param += r * per_layer;
      out.gates.push_back(g);
    }
  }
  out.num_parameters = static_cast<std::size_t>(per_layer) * static_cast<std::size_t>(repetitions);
  return out;
}

AnsatzSpec AnsatzSpec::followed_by(const AnsatzSpec& tail) const {
  if (tail.n != n) throw std::invalid_argument("AnsatzSpec::followed_by: qubit count mismatch");
  AnsatzSpec out = *this;
  out.name = name + "+" + tail.name;
  for (Gate g : tail.gates) {
    if (g.parametrized()) g.param += static_cast<int>(num_parameters);
    out.gates.push_back(g);
  }
  out.num_parameters += tail.num_parameters;
  return out;
}

AnsatzSpec template_a(int n, int repetitions) {
  check_template_args(n, repetitions);
  int p = 0;
  std::vector<Gate> layer = rotation_layer(n, GateKind::kRY, p);
  append(layer, entangler_chain(n, GateKind::kCZ));
  return AnsatzSpec::repeat(n, "A", layer, repetitions);
}

AnsatzSpec template_b(int n) {
  check_template_args(n, 1);
  int p = 0;
  std::vector<Gate> layer;
  for (int block = 0; block < 2; ++block) {
    append(layer, rotation_layer(n, GateKind::kRY, p));
    append(layer, rotation_layer(n, GateKind::kRX, p));
    append(layer, entangler_chain(n, GateKind::kCNOT));
  }
  return AnsatzSpec::repeat(n, "B", layer, 1);
}

AnsatzSpec template_c(int n, int repetitions) {
  check_template_args(n, repetitions);
  int p = 0;
  std::vector<Gate> layer = rotation_layer(n, GateKind::kRY, p);
  append(layer, entangler_chain(n, GateKind::kCNOT));
  return AnsatzSpec::repeat(n, "C", layer, repetitions);
}

AnsatzSpec template_rx_ry_cnot(int n, int repetitions) {
  check_template_args(n, repetitions);
  int p = 0;
  std::vector<Gate> layer = rotation_layer(n, GateKind::kRX, p);
  append(layer, rotation_layer(n, GateKind::kRY, p));
  append(layer, entangler_chain(n, GateKind::kCNOT));
  return AnsatzSpec::repeat(n, "RXRY", layer, repetitions);
}

AnsatzSpec quantum_filler(int n, std::size_t count) {
  if (count == 0) throw std::invalid_argument("quantum_filler: count must be positive");
  std::vector<Gate> gates;
  int p = 0;
  while (static_cast<std::size_t>(p) < count) {
    for (GateKind kind : {GateKind::kRX, GateKind::kRY}) {
      for (int q = 0; q < n && static_cast<std::size_t>(p) < count; ++q) gates.push_back({kind, q, -1, p++});
    }
    append(gates, entangler_chain(n, GateKind::kCNOT));
  }
  return AnsatzSpec::repeat(n, "filler", gates, 1);
}

AnsatzSpec make_template(const std::string& name, int n, int repetitions) {
  if (name == "A") return template_a(n, repetitions);
  if (name == "B") {
    if (repetitions != 1) throw std::invalid_argument("template B has a fixed depth (repetitions must be 1)");
    return template_b(n);
  }
  if (name == "C") return template_c(n, repetitions);
  if (name == "RXRY") return template_rx_ry_cnot(n, repetitions);
  throw std::invalid_argument("unknown ansatz template '" + name + "'");
}

StateVector::StateVector(int n) : n_(n) {
  if (n < 1 || n > kMaxStateQubits) throw std::invalid_argument("StateVector: bad qubit count");
  amps_.assign(std::size_t{1} << n, cd(0.0, 0.0));
  amps_[0] = 1.0;
}

StateVector StateVector::from_amplitudes(int n, std::vector<std::complex<double>> amplitudes) {
  if (n < 1 || n > kMaxStateQubits || amplitudes.size() != (std::size_t{1} << n)) {
    throw std::invalid_argument("StateVector::from_amplitudes: size is not 2^n");
  }
  StateVector s;
  s.n_ = n;
  s.amps_ = std::move(amplitudes);
  return s;
}

double StateVector::norm() const {
  double total = 0.0;
  for (const auto& a : amps_) total += std::norm(a);
  return std::sqrt(total);
}

void StateVector::apply_ry(int q, double angle) {
  check_site(n_, q, "apply_ry");
  const double c = std::cos(0.5 * angle), s = std::sin(0.5 * angle);
  const std::size_t bit = std::size_t{1} << q;
  for (std::size_t base = 0; base < amps_.size(); base += 2 * bit) {
    for (std::size_t k = base; k < base + bit; ++k) {
      const cd a0 = amps_[k], a1 = amps_[k | bit];
      amps_[k] = c * a0 - s * a1;
      amps_[k | bit] = s * a0 + c * a1;
    }
  }
}

void StateVector::apply_rx(int q, double angle) {
  check_site(n_, q, "apply_rx");
  const double c = std::cos(0.5 * angle), s = std::sin(0.5 * angle);
  const std::size_t bit = std::size_t{1} << q;
  for (std::size_t base = 0; base < amps_.size(); base += 2 * bit) {
    for (std::size_t k = base; k < base + bit; ++k) {
      const cd a0 = amps_[k], a1 = amps_[k | bit];
      // -i s a = (s a.imag, -s a.real)
      amps_[k] = cd(c * a0.real() + s * a1.imag(), c * a0.imag() - s * a1.real());
      amps_[k | bit] = cd(c * a1.real() + s * a0.imag(), c * a1.imag() - s * a0.real());
    }
  }
}

void StateVector::apply_cz(int a, int b) {
  check_site(n_, a, "apply_cz");
  check_site(n_, b, "apply_cz");
  const std::size_t mask = (std::size_t{1} << a) | (std::size_t{1} << b);
  for (std::size_t k = 0; k < amps_.size(); ++k) {
    if ((k & mask) == mask) amps_[k] = -amps_[k];
  }
}

void StateVector::apply_cnot(int control, int target) {
  check_site(n_, control, "apply_cnot");
  check_site(n_, target, "apply_cnot");
  const std::size_t cbit = std::size_t{1} << control, tbit = std::size_t{1} << target;
  for (std::size_t k = 0; k < amps_.size(); ++k) {
    if ((k & cbit) && !(k & tbit)) std::swap(amps_[k], amps_[k | tbit]);
  }
}

void StateVector::apply_pauli(const PauliTerm& p) {
  if (p.num_qubits() != n_) throw std::invalid_argument("apply_pauli: qubit count mismatch");
  const cd base = to_complex(static_cast<Phase>(p.y_count() % 4));
  const std::uint64_t x = p.x_bits(), z = p.z_bits();
  if (x == 0) {
    for (std::size_t k = 0; k < amps_.size(); ++k) amps_[k] *= base * parity_sign(z & k);
    return;
  }
  for (std::size_t k = 0; k < amps_.size(); ++k) {
    const std::size_t j = k ^ x;
    if (j < k) continue;
    const cd ak = amps_[k], aj = amps_[j];
    amps_[j] = base * parity_sign(z & k) * ak;
    amps_[k] = base * parity_sign(z & j) * aj;
  }
}

void StateVector::apply_two_qubit(int a, int b, const Eigen::Matrix4cd& u) {
  check_site(n_, a, "apply_two_qubit");
  check_site(n_, b, "apply_two_qubit");
  if (a == b) throw std::invalid_argument("apply_two_qubit: sites must differ");
  const std::size_t ba = std::size_t{1} << a, bb = std::size_t{1} << b;
  const std::size_t lo = std::min(ba, bb), hi = std::max(ba, bb);
  for (std::size_t outer = 0; outer < amps_.size(); outer += 2 * hi) {
    for (std::size_t mid = outer; mid < outer + hi; mid += 2 * lo) {
      for (std::size_t k = mid; k < mid + lo; ++k) {
        const std::size_t idx[4] = {k, k | bb, k | ba, k | ba | bb};
        const cd v[4] = {amps_[idx[0]], amps_[idx[1]], amps_[idx[2]], amps_[idx[3]]};
        for (int r = 0; r < 4; ++r) {
          amps_[idx[r]] = u(r, 0) * v[0] + u(r, 1) * v[1] + u(r, 2) * v[2] + u(r, 3) * v[3];
        }
      }
    }
  }
}

void StateVector::apply_gate(const Gate& gate, std::span<const double> phi) {
  switch (gate.kind) {
    case GateKind::kRY: apply_ry(gate.q0, phi[gate.param]); break;
    case GateKind::kRX: apply_rx(gate.q0, phi[gate.param]); break;
    case GateKind::kCZ: apply_cz(gate.q0, gate.q1); break;
    case GateKind::kCNOT: apply_cnot(gate.q0, gate.q1); break;
  }
}

void StateVector::apply_gate_inverse(const Gate& gate, std::span<const double> phi) {
  switch (gate.kind) {
    case GateKind::kRY: apply_ry(gate.q0, -phi[gate.param]); break;
    case GateKind::kRX: apply_rx(gate.q0, -phi[gate.param]); break;
    case GateKind::kCZ: apply_cz(gate.q0, gate.q1); break;
    case GateKind::kCNOT: apply_cnot(gate.q0, gate.q1); break;
  }
}

void StateVector::apply_network(const TnLayout& layout, std::span<const double> theta) {
  if (layout.n != n_ || theta.size() != layout.num_parameters()) {
    throw std::invalid_argument("apply_network: layout/theta mismatch");
  }
  for (std::size_t j = 0; j < layout.blocks.size(); ++j) {
    const Block& b = layout.blocks[j];
    apply_two_qubit(b.site_a, b.site_b, block_unitary(theta[3 * j], theta[3 * j + 1], theta[3 * j + 2]));
  }
}

void StateVector::apply_network_inverse(const TnLayout& layout, std::span<const double> theta) {
  if (layout.n != n_ || theta.size() != layout.num_parameters()) {
    throw std::invalid_argument("apply_network_inverse: layout/theta mismatch");
  }
  for (std::size_t j = layout.blocks.size(); j-- > 0;) {
    const Block& b = layout.blocks[j];
    apply_two_qubit(b.site_a, b.site_b,
                    block_unitary(theta[3 * j], theta[3 * j + 1], theta[3 * j + 2]).adjoint());
  }
}

std::complex<double> StateVector::inner(const StateVector& other) const {
  if (other.n_ != n_) throw std::invalid_argument("inner: qubit count mismatch");
  cd total = 0.0;
  for (std::size_t k = 0; k < amps_.size(); ++k) total += std::conj(amps_[k]) * other.amps_[k];
  return total;
}

std::vector<CircuitOp> noiseless_ops(const AnsatzSpec& ansatz) {
  std::vector<CircuitOp> ops;
  ops.reserve(ansatz.gates.size());
  for (const Gate& g : ansatz.gates) ops.push_back({false, g, {}});
  return ops;
}

StateVector run_ops(int n, const std::vector<CircuitOp>& ops, std::span<const double> phi) {
  StateVector state(n);
  for (const auto& op : ops) {
    if (op.is_error) {
      state.apply_pauli(op.error);
    } else {
      state.apply_gate(op.gate, phi);
    }
  }
  return state;
}

StateVector run(const AnsatzSpec& ansatz, std::span<const double> phi) {
  if (phi.size() != ansatz.num_parameters) {
    throw std::invalid_argument("run: expected " + std::to_string(ansatz.num_parameters) +
                                " parameters, got " + std::to_string(phi.size()));
  }
  StateVector state(ansatz.n);
  for (const Gate& g : ansatz.gates) state.apply_gate(g, phi);
  return state;
}

double expectation(const StateVector& state, const PauliTerm& p) {
  if (p.num_qubits() != state.num_qubits()) throw std::invalid_argument("expectation: qubit count mismatch");
  return matrix_element(state, p, state).real();
}

std::complex<double> matrix_element(const StateVector& bra, const PauliTerm& p, const StateVector& ket) {
  if (p.num_qubits() != ket.num_qubits() || bra.num_qubits() != ket.num_qubits()) {
    throw std::invalid_argument("matrix_element: qubit count mismatch");
  }
  const auto l = bra.amplitudes();
  const auto r = ket.amplitudes();
  const std::uint64_t x = p.x_bits(), z = p.z_bits();
  double re = 0.0, im = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k) {
    const cd t = std::conj(l[k ^ x]) * r[k];
    const double sign = parity_sign(z & k);
    re += sign * t.real();
    im += sign * t.imag();
  }
  return cd(re, im) * to_complex(static_cast<Phase>(p.y_count() % 4));
}

double expectation(const StateVector& state, const PauliSum& h) {
  if (h.num_qubits() != state.num_qubits()) throw std::invalid_argument("expectation: qubit count mismatch");
  double total = 0.0;
  for (const auto& e : h) total += e.coefficient * expectation(state, e.term);
  return total;
}

StateVector apply_sum(const PauliSum& h, const StateVector& state) {
  if (h.num_qubits() != state.num_qubits()) throw std::invalid_argument("apply_sum: qubit count mismatch");
  const auto in = state.amplitudes();
  std::vector<cd> out(in.size(), cd(0.0, 0.0));
  for (const auto& e : h) {
    const cd base = e.coefficient * to_complex(static_cast<Phase>(e.term.y_count() % 4));
    const std::uint64_t x = e.term.x_bits(), z = e.term.z_bits();
    for (std::size_t k = 0; k < in.size(); ++k) out[k ^ x] += parity_sign(z & k) * base * in[k];
  }
  return StateVector::from_amplitudes(state.num_qubits(), std::move(out));
}

double energy(const RotatedHamiltonian& r, const AnsatzSpec& ansatz, std::span<const double> phi) {
  if (r.sum.num_qubits() != ansatz.n) throw std::invalid_argument("energy: qubit count mismatch");
  return expectation(run(ansatz, phi), r.sum);
}

std::vector<double> parameter_shift_gradient(const RotatedHamiltonian& r, const AnsatzSpec& ansatz,
                                             std::span<const double> phi) {
  if (phi.size() != ansatz.num_parameters) throw std::invalid_argument("parameter_shift_gradient: bad phi length");
  for (const Gate& g : ansatz.gates) {
    if (g.param >= 0 && !g.parametrized()) {
      throw std::invalid_argument("parameter_shift_gradient: parameter on a non-rotation gate");
    }
  }
  std::vector<double> shifted(phi.begin(), phi.end());
  std::vector<double> grad(phi.size());
  const double shift = std::numbers::pi / 2.0;
  for (std::size_t k = 0; k < phi.size(); ++k) {
    shifted[k] = phi[k] + shift;
    const double plus = energy(r, ansatz, shifted);
    shifted[k] = phi[k] - shift;
    const double minus = energy(r, ansatz, shifted);
    shifted[k] = phi[k];
    grad[k] = 0.5 * (plus - minus);
  }
  return grad;
}

void validate(const NoiseModel& noise) {
  if (!(noise.p1 >= 0.0 && noise.p1 <= 1.0) || !(noise.p2 >= 0.0 && noise.p2 <= 1.0)) {
    throw std::invalid_argument("NoiseModel: probabilities must lie in [0, 1]");
  }
  if (noise.trajectories < 1) throw std::invalid_argument("NoiseModel: trajectories must be >= 1");
}

std::vector<CircuitOp> sample_trajectory(const AnsatzSpec& ansatz, const NoiseModel& noise, Rng& rng) {
  std::vector<CircuitOp> ops;
  ops.reserve(ansatz.gates.size() + 4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> one_site(1, 3);
  std::uniform_int_distribution<int> two_site(1, 15);
  static constexpr char kLabels[4] = {'I', 'X', 'Y', 'Z'};
  for (const Gate& g : ansatz.gates) {
    ops.push_back({false, g, {}});
    const double p = g.two_qubit() ? noise.p2 : noise.p1;
    if (p <= 0.0 || unit(rng) >= p) continue;
    PauliTerm err;
    if (g.two_qubit()) {
      const int r = two_site(rng);
      const PauliTerm a = PauliTerm::single(ansatz.n, g.q0, kLabels[r / 4]);
      const PauliTerm b = PauliTerm::single(ansatz.n, g.q1, kLabels[r % 4]);
      err = PauliTerm(ansatz.n, a.x_bits() | b.x_bits(), a.z_bits() | b.z_bits());
    } else {
      err = PauliTerm::single(ansatz.n, g.q0, kLabels[one_site(rng)]);
    }
    ops.push_back({true, g, err});
  }
  return ops;
}

double error_bar(std::span<const double> values) {
  if (values.empty()) return 0.0;
  const double s = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= s;
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return 3.0 * std::sqrt(sq / (s * s));
}

NoisyEstimate noisy_energy(const RotatedHamiltonian& r, const AnsatzSpec& ansatz, std::span<const double> phi,
                           const NoiseModel& noise) {
  validate(noise);
  if (phi.size() != ansatz.num_parameters) throw std::invalid_argument("noisy_energy: bad phi length");
  Rng rng(noise.seed);
  NoisyEstimate out;
  out.values.reserve(noise.trajectories);
  for (int s = 0; s < noise.trajectories; ++s) {
    const auto ops = sample_trajectory(ansatz, noise, rng);
    out.values.push_back(expectation(run_ops(ansatz.n, ops, phi), r.sum));
  }
  double mean = 0.0;
  for (double v : out.values) mean += v;
  out.mean = mean / static_cast<double>(out.values.size());
  out.error_bar = error_bar(out.values);
  return out;
}

}  // namespace tnpqc
