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
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "tnpqc/hamiltonians.hpp"
#include "tnpqc/simulator.hpp"

namespace tnpqc {
namespace {

using oracle::Matrix;

Matrix gate_oracle(int n, const Gate& g, const std::vector<double>& phi) {
  switch (g.kind) {
    case GateKind::kRY: return oracle::embed(n, g.q0, oracle::ry(phi[g.param]));
    case GateKind::kRX: return oracle::embed(n, g.q0, oracle::rx(phi[g.param]));
    case GateKind::kCZ: return oracle::cz(n, g.q0, g.q1);
    case GateKind::kCNOT: return oracle::cnot(n, g.q0, g.q1);
  }
  return {};
}

Eigen::VectorXcd run_oracle(const AnsatzSpec& a, const std::vector<double>& phi) {
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(Eigen::Index{1} << a.n);
  psi(0) = 1.0;
  for (const auto& g : a.gates) psi = gate_oracle(a.n, g, phi) * psi;
  return psi;
}

Eigen::VectorXcd as_vector(const StateVector& s) {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(s.dimension()));
  for (std::size_t k = 0; k < s.dimension(); ++k) v(static_cast<Eigen::Index>(k)) = s[k];
  return v;
}

TEST(Templates, Counts) {
  const auto a = template_a(4, 1);
  EXPECT_EQ(a.num_parameters, 4u);
  int cz = 0;
  for (const auto& g : a.gates) cz += g.kind == GateKind::kCZ;
  EXPECT_EQ(cz, 3);
  EXPECT_EQ(template_c(16, 7).num_parameters, 112u);
  EXPECT_EQ(template_b(11).num_parameters, 44u);
  EXPECT_EQ(template_rx_ry_cnot(5, 3).num_parameters, 30u);
  EXPECT_EQ(quantum_filler(6, 15).num_parameters, 15u);
  EXPECT_EQ(make_template("C", 4, 2).num_parameters, 8u);
  EXPECT_THROW(make_template("Q", 4, 1), std::invalid_argument);
  EXPECT_THROW(template_a(1, 1), std::invalid_argument);
  EXPECT_THROW(template_c(4, 0), std::invalid_argument);
}

TEST(Templates, ParameterIndicesAreDense) {
  const auto a = template_b(5).followed_by(quantum_filler(5, 7));
  std::vector<int> seen(a.num_parameters, 0);
  for (const auto& g : a.gates) {
    if (g.parametrized()) ++seen.at(g.param);
  }
  for (int s : seen) EXPECT_EQ(s, 1);
}

TEST(Run, ConventionsAndTrivialStates) {
  const auto a = template_a(4, 2);
  const auto zero = run(a, std::vector<double>(a.num_parameters, 0.0));
  EXPECT_NEAR(std::abs(zero[0]), 1.0, 1e-15);

  const auto one = AnsatzSpec::repeat(1, "ry", {Gate{GateKind::kRY, 0, -1, 0}}, 1);
  const auto flipped = run(one, std::vector<double>{std::numbers::pi});
  EXPECT_NEAR(std::abs(flipped[1]), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(flipped[0]), 0.0, 1e-15);
  EXPECT_THROW(run(one, std::vector<double>{}), std::invalid_argument);
}

TEST(Run, MatchesDenseGateProducts) {
  std::mt19937_64 rng(6);
  const AnsatzSpec specs[] = {template_a(4, 2), template_b(3), template_c(5, 2), template_rx_ry_cnot(4, 2),
                              template_c(3, 1).followed_by(quantum_filler(3, 5))};
  for (const auto& a : specs) {
    const auto phi = oracle::uniform_angles(a.num_parameters, rng);
    const auto psi = run(a, phi);
    EXPECT_NEAR(psi.norm(), 1.0, 1e-12);
    EXPECT_LT((as_vector(psi) - run_oracle(a, phi)).cwiseAbs().maxCoeff(), 1e-12) << a.name;
  }
}

TEST(Run, InverseGatesUndo) {
  std::mt19937_64 rng(7);
  const auto a = template_b(4);
  const auto phi = oracle::uniform_angles(a.num_parameters, rng);
  auto psi = run(a, phi);
  for (auto it = a.gates.rbegin(); it != a.gates.rend(); ++it) psi.apply_gate_inverse(*it, phi);
  EXPECT_NEAR(std::abs(psi[0]), 1.0, 1e-12);
}

TEST(Network, ApplyMatchesUnitary) {
  std::mt19937_64 rng(10);
  const auto layout = layout_umpo_1d(4, 2);
  const auto theta = oracle::uniform_angles(layout.num_parameters(), rng);
  const auto a = template_a(4, 1);
  const auto phi = oracle::uniform_angles(a.num_parameters, rng);
  auto psi = run(a, phi);
  psi.apply_network(layout, theta);
  const Eigen::VectorXcd expected = network_unitary(layout, theta) * run_oracle(a, phi);
  EXPECT_LT((as_vector(psi) - expected).cwiseAbs().maxCoeff(), 1e-12);
  psi.apply_network_inverse(layout, theta);
  EXPECT_LT((as_vector(psi) - run_oracle(a, phi)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Expectation, BasicValues) {
  const StateVector zero(3);
  EXPECT_DOUBLE_EQ(expectation(zero, PauliTerm::parse("ZII")), 1.0);
  EXPECT_DOUBLE_EQ(expectation(zero, PauliTerm::parse("XII")), 0.0);
  EXPECT_THROW(expectation(zero, PauliTerm::parse("ZZ")), std::invalid_argument);
}

TEST(Expectation, MatchesQuadraticForm) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + trial % 5;
    const auto a = template_b(n);
    const auto phi = oracle::uniform_angles(a.num_parameters, rng);
    const auto psi = run(a, phi);
    const auto text = oracle::random_pauli_text(n, rng);
    const Eigen::VectorXcd v = as_vector(psi);
    const double expected = (v.adjoint() * oracle::kron_string(text) * v)(0).real();
    EXPECT_NEAR(expectation(psi, PauliTerm::parse(text)), expected, 1e-12) << text;
  }
}

TEST(ApplySum, MatchesDense) {
  std::mt19937_64 rng(14);
  const auto h = build_time_crystal(5, 1.0, 0.3, 0.2);
  const auto a = template_c(5, 2);
  const auto psi = run(a, oracle::uniform_angles(a.num_parameters, rng));
  const Eigen::VectorXcd expected = to_dense(h) * as_vector(psi);
  EXPECT_LT((as_vector(apply_sum(h, psi)) - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Energy, ZeroAnglesOnTfim) {
  const auto h = build_tfim_1d(4, 0.1, 1.0);
  const auto layout = layout_umpo_1d(4, 2);
  const auto r = rotate_hamiltonian(h, layout, std::vector<double>(layout.num_parameters(), 0.0));
  const auto a = template_a(4, 1);
  EXPECT_NEAR(energy(r, a, std::vector<double>(a.num_parameters, 0.0)), -0.3, 1e-15);
}

TEST(Energy, MatchesDenseRotatedForm) {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 3 + trial % 4;
    const auto h = build_tfim_1d(n, 0.7, 1.2);
    const auto layout = layout_umpo_1d(n, 1 + trial % 2);
    const auto theta = oracle::uniform_angles(layout.num_parameters(), rng);
    const auto r = rotate_hamiltonian(h, layout, theta, 0.0);
    const auto a = template_a(n, 2);
    const auto phi = oracle::uniform_angles(a.num_parameters, rng);
    const Eigen::VectorXcd v = run_oracle(a, phi);
    const Matrix u = network_unitary(layout, theta);
    const double expected = (v.adjoint() * u.adjoint() * to_dense(h) * u * v)(0).real();
    EXPECT_NEAR(energy(r, a, phi), expected, 1e-9);
  }
}

TEST(ParameterShift, SingleQubitClosedForm) {
  const auto a = AnsatzSpec::repeat(1, "ry", {Gate{GateKind::kRY, 0, -1, 0}}, 1);
  const auto h = PauliSum::from_entries(1, {{PauliTerm::parse("Z"), 1.0}});
  const RotatedHamiltonian r{h, TnLayout{}, {}, 0.0};
  for (double phi : {0.0, 0.3, 1.7, 4.0}) {
    const auto g = parameter_shift_gradient(r, a, std::vector<double>{phi});
    EXPECT_NEAR(g[0], -std::sin(phi), 1e-14);
  }
}

TEST(ParameterShift, MatchesFiniteDifferences) {
  std::mt19937_64 rng(16);
  const double step = 1e-5;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 4;
    const auto h = build_time_crystal(std::max(3, n), 1.0, 0.4, 0.3);
    const int m = h.num_qubits();
    const auto layout = layout_umpo_1d(m, 2);
    const auto r = rotate_hamiltonian(h, layout, oracle::uniform_angles(layout.num_parameters(), rng));
    const auto a = trial % 2 ? template_b(m) : template_rx_ry_cnot(m, 2);
    auto phi = oracle::uniform_angles(a.num_parameters, rng);
    const auto g = parameter_shift_gradient(r, a, phi);
    for (std::size_t k = 0; k < phi.size(); ++k) {
      const double saved = phi[k];
      phi[k] = saved + step;
      const double plus = energy(r, a, phi);
      phi[k] = saved - step;
      const double minus = energy(r, a, phi);
      phi[k] = saved;
      EXPECT_NEAR(g[k], (plus - minus) / (2 * step), 1e-6);
    }
  }
}

TEST(Noise, Validation) {
  EXPECT_THROW(validate(NoiseModel{-0.1, 0.0, 1, 0}), std::invalid_argument);
  EXPECT_THROW(validate(NoiseModel{0.0, 1.5, 1, 0}), std::invalid_argument);
  EXPECT_THROW(validate(NoiseModel{0.0, 0.0, 0, 0}), std::invalid_argument);
  EXPECT_NO_THROW(validate(NoiseModel{2e-5, 5e-5, 40, 1}));
}

TEST(Noise, ErrorBarFormula) {
  const std::vector<double> v{1.0, 2.0, 3.0, 6.0};
  // mean 3, squared deviations 4 + 1 + 0 + 9 = 14.
  EXPECT_NEAR(error_bar(v), 3.0 * std::sqrt(14.0 / 16.0), 1e-15);
  EXPECT_EQ(error_bar(std::vector<double>{2.5}), 0.0);
}

TEST(Noise, ZeroProbabilityIsNoiseless) {
  std::mt19937_64 rng(17);
  const auto h = build_tfim_1d(4, 1.0, 0.5);
  const auto layout = layout_umpo_1d(4, 1);
  const auto r = rotate_hamiltonian(h, layout, oracle::uniform_angles(layout.num_parameters(), rng));
  const auto a = template_c(4, 1);
  const auto phi = oracle::uniform_angles(a.num_parameters, rng);
  const auto est = noisy_energy(r, a, phi, NoiseModel{0.0, 0.0, 5, 3});
  EXPECT_NEAR(est.mean, energy(r, a, phi), 1e-14);
  EXPECT_EQ(est.error_bar, 0.0);
  EXPECT_EQ(est.values.size(), 5u);
}

TEST(Noise, FullSingleQubitDepolarizationAveragesOut) {
  const auto a = AnsatzSpec::repeat(1, "ry", {Gate{GateKind::kRY, 0, -1, 0}}, 1);
  const auto h = PauliSum::from_entries(1, {{PauliTerm::parse("Z"), 1.0}});
  const RotatedHamiltonian r{h, TnLayout{}, {}, 0.0};
  const auto est = noisy_energy(r, a, std::vector<double>{0.0}, NoiseModel{1.0, 0.0, 30000, 5});
  // X or Y flips <Z> to -1 and Z keeps +1: mean -1/3 for p = 1 (the 3-choice
  // Pauli channel is not fully depolarizing at p = 1).
  const double se = est.error_bar / 3.0;
  EXPECT_NEAR(est.mean, -1.0 / 3.0, 3 * se + 1e-12);
}

// Density-matrix evolution with the Pauli channel applied after every gate.
Matrix channel(int n, const Matrix& rho, const std::vector<int>& sites, double p) {
  if (p == 0.0) return rho;
  const char ops[4] = {'I', 'X', 'Y', 'Z'};
  Matrix out = (1.0 - p) * rho;
  const int choices = sites.size() == 1 ? 3 : 15;
  const int limit = sites.size() == 1 ? 4 : 16;
  for (int code = 1; code < limit; ++code) {
    Matrix pm = Matrix::Identity(rho.rows(), rho.cols());
    for (std::size_t s = 0; s < sites.size(); ++s) {
      const int digit = sites.size() == 1 ? code : (s == 0 ? code / 4 : code % 4);
      pm = oracle::embed(n, sites[s], oracle::pauli_matrix(ops[digit])) * pm;
    }
    out += (p / choices) * pm * rho * pm.adjoint();
  }
  return out;
}

TEST(Noise, TrajectoriesMatchDensityMatrix) {
  std::mt19937_64 rng(18);
  const int n = 3;
  const auto a = template_b(n);
  const auto phi = oracle::uniform_angles(a.num_parameters, rng);
  const auto h = build_time_crystal(n, 1.0, 0.5, 0.4);
  const NoiseModel noise{0.05, 0.15, 40000, 21};

  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(8);
  v(0) = 1.0;
  Matrix rho = v * v.adjoint();
  for (const auto& g : a.gates) {
    const Matrix u = gate_oracle(n, g, phi);
    rho = u * rho * u.adjoint();
    if (g.two_qubit()) {
      rho = channel(n, rho, {g.q0, g.q1}, noise.p2);
    } else {
      rho = channel(n, rho, {g.q0}, noise.p1);
    }
  }
  const double exact = (rho * to_dense(h)).trace().real();

  const RotatedHamiltonian r{h, TnLayout{}, {}, 0.0};
  const auto est = noisy_energy(r, a, phi, noise);
  const double se = est.error_bar / 3.0;
  EXPECT_GT(se, 0.0);
  EXPECT_NEAR(est.mean, exact, 3 * se);
  // The noiseless value is well outside the band, so the test has teeth.
  EXPECT_GT(std::abs(energy(r, a, phi) - exact), 3 * se);
}

TEST(Noise, TrajectoriesAreSeeded) {
  const auto a = template_c(4, 2);
  const auto h = build_tfim_1d(4, 1.0, 1.0);
  const RotatedHamiltonian r{h, TnLayout{}, {}, 0.0};
  std::mt19937_64 rng(19);
  const auto phi = oracle::uniform_angles(a.num_parameters, rng);
  const NoiseModel noise{0.1, 0.2, 50, 99};
  EXPECT_EQ(noisy_energy(r, a, phi, noise).values, noisy_energy(r, a, phi, noise).values);
}

}  // namespace
}  // namespace tnpqc
