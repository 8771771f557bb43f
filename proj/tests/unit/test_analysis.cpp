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

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "tnpqc/analysis.hpp"
#include "tnpqc/hamiltonians.hpp"

namespace tnpqc {
namespace {

StateVector basis_superposition(int n, const std::vector<std::pair<std::size_t, std::complex<double>>>& entries) {
  std::vector<std::complex<double>> amps(std::size_t{1} << n);
  for (const auto& [k, a] : entries) amps[k] = a;
  return StateVector::from_amplitudes(n, std::move(amps));
}

double dense_ground(const PauliSum& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> s(to_dense(h), Eigen::EigenvaluesOnly);
  return s.eigenvalues()(0);
}

// Reduced density matrix through an explicit sum over traced basis states.
Eigen::MatrixXcd partial_trace_oracle(const StateVector& psi, const std::vector<int>& kept) {
  const int n = psi.num_qubits();
  const Eigen::Index dim_a = Eigen::Index{1} << kept.size();
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim_a, dim_a);
  for (std::size_t i = 0; i < psi.dimension(); ++i) {
    for (std::size_t j = 0; j < psi.dimension(); ++j) {
      bool same_rest = true;
      for (int q = 0; q < n; ++q) {
        if (std::find(kept.begin(), kept.end(), q) != kept.end()) continue;
        if (((i >> q) & 1U) != ((j >> q) & 1U)) same_rest = false;
      }
      if (!same_rest) continue;
      Eigen::Index r = 0, c = 0;
      for (std::size_t b = 0; b < kept.size(); ++b) {
        r |= static_cast<Eigen::Index>((i >> kept[b]) & 1U) << b;
        c |= static_cast<Eigen::Index>((j >> kept[b]) & 1U) << b;
      }
      rho(r, c) += psi[i] * std::conj(psi[j]);
    }
  }
  return rho;
}

TEST(GroundEnergy, SmallExamples) {
  EXPECT_NEAR(exact_ground_energy(PauliSum::from_entries(1, {{PauliTerm::parse("Z"), -1.0}})), -1.0, 1e-12);
  EXPECT_NEAR(exact_ground_energy(build_tfim_1d(2, 1.0, 0.0)), -1.0, 1e-12);
}

TEST(GroundEnergy, LanczosMatchesDense) {
  for (const auto& h : {build_time_crystal(10, 1.0, 0.1, 0.1), build_tfim_1d(10, 1.0, 0.9), build_tfim_2d(3, 3, 0.1, 1.0)}) {
    const auto gs = ground_state(h);
    EXPECT_LE(gs.residual, 1e-8);
    EXPECT_NEAR(gs.energy, dense_ground(h), 1e-8);
    const auto hv = apply_sum(h, gs.vector);
    double r = 0.0;
    for (std::size_t k = 0; k < hv.dimension(); ++k) r += std::norm(hv[k] - gs.energy * gs.vector[k]);
    EXPECT_LE(std::sqrt(r), 1e-8);
  }
}

TEST(GroundEnergy, TimeCrystalEightSites) {
  const auto h = build_time_crystal(8, 1.0, 0.1, 0.1);
  EXPECT_NEAR(exact_ground_energy(h), dense_ground(h), 1e-8);
}

TEST(GroundEnergy, RejectsOversizedRegister) {
  EXPECT_THROW(exact_ground_energy(build_tfim_1d(kMaxGroundStateQubits + 1, 1, 1)), std::invalid_argument);
}

TEST(Purity, KnownStates) {
  const std::vector<int> a0{0};
  EXPECT_NEAR(purity_moment(StateVector(3), a0, 2), 1.0, 1e-15);
  const double s = 1.0 / std::sqrt(2.0);
  const auto bell = basis_superposition(2, {{0, s}, {3, s}});
  EXPECT_NEAR(purity_moment(bell, a0, 2), 0.5, 1e-15);
  const auto ghz = basis_superposition(4, {{0, s}, {15, s}});
  EXPECT_NEAR(purity_moment(ghz, first_half(4), 3), 0.25, 1e-15);
  EXPECT_NEAR(purity_moment(ghz, first_half(4), 2), 0.5, 1e-15);
}

TEST(Purity, ReducedStateProperties) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 5;
    const auto psi = haar_state(n, rng);
    std::vector<int> kept;
    for (int q = 0; q < n; ++q) {
      if ((trial >> (q % 3)) & 1 || q == 0) kept.push_back(q);
    }
    const auto rho = reduced_density_matrix(psi, kept);
    EXPECT_LT((rho - partial_trace_oracle(psi, kept)).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_NEAR(rho.trace().real(), 1.0, 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(rho, Eigen::EigenvaluesOnly);
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-10);
    const double dim = std::ldexp(1.0, static_cast<int>(kept.size()));
    for (int t : {2, 3}) {
      const double p = purity_moment(psi, kept, t);
      double spectral = 0.0;
      for (Eigen::Index k = 0; k < eig.eigenvalues().size(); ++k) spectral += std::pow(eig.eigenvalues()(k), t);
      EXPECT_NEAR(p, spectral, 1e-12);
      EXPECT_LE(p, 1.0 + 1e-12);
      EXPECT_GE(p, std::pow(dim, -(t - 1)) - 1e-12);
    }
  }
}

TEST(Purity, ComplementGivesSameMoment) {
  std::mt19937_64 rng(6);
  const auto psi = haar_state(6, rng);
  const std::vector<int> a{0, 2, 5};
  const std::vector<int> b{1, 3, 4};
  for (int t : {2, 3}) EXPECT_NEAR(purity_moment(psi, a, t), purity_moment(psi, b, t), 1e-13);
}

TEST(Purity, Validation) {
  const StateVector psi(4);
  EXPECT_THROW(purity_moment(psi, std::vector<int>{}, 2), std::invalid_argument);
  EXPECT_THROW(purity_moment(psi, std::vector<int>{0, 0}, 2), std::invalid_argument);
  EXPECT_THROW(purity_moment(psi, std::vector<int>{4}, 2), std::invalid_argument);
  EXPECT_THROW(purity_moment(psi, std::vector<int>{0}, 0), std::invalid_argument);
  EXPECT_NEAR(purity_moment(psi, std::vector<int>{0, 1, 2, 3}, 2), 1.0, 1e-15);
}

TEST(Haar, MonteCarloAgreesWithClosedForm) {
  struct Case {
    int n;
    int kept;
    int t;
  };
  for (const auto& c : {Case{2, 1, 2}, Case{4, 2, 2}, Case{4, 2, 3}, Case{6, 3, 3}, Case{5, 2, 2}}) {
    const auto est = haar_moment(c.n, first_half(2 * c.kept), c.t, 20000, 3);
    EXPECT_NEAR(est.mean, haar_moment_closed_form(c.n, c.kept, c.t), 3 * est.standard_error)
        << c.n << " " << c.kept << " " << c.t;
  }
  const auto full = haar_moment(3, std::vector<int>{0, 1, 2}, 2, 100, 3);
  EXPECT_NEAR(full.mean, 1.0, 1e-12);
}

TEST(Delta, HaarAgainstHaarIsZero) {
  EnsembleSpec e;
  e.haar = true;
  e.haar_qubits = 6;
  e.samples = 5000;
  e.seed = 77;
  for (int t : {2, 3}) {
    const auto d = delta_t(e, first_half(6), t, HaarBaseline{5000, 78});
    EXPECT_LT(std::abs(d.delta), 3 * d.standard_error);
  }
}

TEST(Delta, ProductEnsembleIsNegative) {
  // RY rotations only: every state is a product state.
  const auto ansatz = AnsatzSpec::repeat(4, "ry", {Gate{GateKind::kRY, 0, -1, 0}, Gate{GateKind::kRY, 1, -1, 1},
                                                   Gate{GateKind::kRY, 2, -1, 2}, Gate{GateKind::kRY, 3, -1, 3}},
                                         1);
  EnsembleSpec e;
  e.ansatz = ansatz;
  e.samples = 50;
  const auto d = delta_t(e, first_half(4), 2);
  EXPECT_NEAR(d.ensemble.mean, 1.0, 1e-12);
  EXPECT_NEAR(d.delta, std::log(d.haar.mean), 1e-12);
  EXPECT_LT(d.delta, 0.0);
}

TEST(Delta, NetworkRaisesExpressivity) {
  EnsembleSpec pqc;
  pqc.ansatz = template_a(6, 1);
  pqc.samples = 400;
  pqc.seed = 3;
  EnsembleSpec tn = pqc;
  tn.layout = layout_umpo_1d(6, 4);
  const auto dp = delta_t(pqc, first_half(6), 2);
  const auto dt = delta_t(tn, first_half(6), 2);
  EXPECT_GT(dt.delta, dp.delta);
  EXPECT_LE(dt.delta, 3 * dt.standard_error);
}

TEST(Partitions, EnumerationAndComplementSymmetry) {
  const auto all = all_half_subsets(4);
  EXPECT_EQ(all.size(), 6u);
  EXPECT_EQ(all.front(), (std::vector<int>{0, 1}));
  EnsembleSpec e;
  e.ansatz = template_a(4, 2);
  e.samples = 100;
  const auto rows = partition_sweep(e, 2, all);
  ASSERT_EQ(rows.size(), 6u);
  // {0,1} vs {2,3}, {0,2} vs {1,3}, {0,3} vs {1,2}.
  EXPECT_NEAR(rows[0].delta.delta, rows[5].delta.delta, 1e-12);
  EXPECT_NEAR(rows[1].delta.delta, rows[4].delta.delta, 1e-12);
  EXPECT_NEAR(rows[2].delta.delta, rows[3].delta.delta, 1e-12);
  EXPECT_TRUE(rows[0].contiguous);
}

TEST(Partitions, RandomSweepLayout) {
  EnsembleSpec e;
  e.ansatz = template_a(6, 1);
  e.samples = 20;
  const auto rows = random_partition_sweep(e, 3, 5, 9, HaarBaseline{500, 2});
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_TRUE(rows.front().contiguous);
  for (const auto& r : rows) EXPECT_EQ(r.subset.size(), 3u);
  EXPECT_THROW(random_partition_sweep(EnsembleSpec{template_a(5, 1)}, 2, 3, 1), std::invalid_argument);
}

TEST(Variance, SingleRotationClosedForm) {
  // C = <Z> after RY(phi) = cos(phi); dC/dphi = -sin(phi), Var = 1/2.
  const auto ansatz = AnsatzSpec::repeat(1, "ry", {Gate{GateKind::kRY, 0, -1, 0}}, 1);
  const auto h = PauliSum::from_entries(1, {{PauliTerm::parse("Z"), 1.0}});
  Rng rng(4);
  const auto values = derivative_samples(h, std::nullopt, ansatz, false, 0, 20000, rng);
  const auto stats = derivative_statistics(values);
  EXPECT_NEAR(stats.variance, 0.5, 3 * stats.variance_standard_error);
  EXPECT_NEAR(stats.mean, 0.0, 3 * stats.mean_standard_error);
}

TEST(Variance, StatisticsOfKnownSample) {
  const std::vector<double> v{1.0, 3.0};
  const auto s = derivative_statistics(v);
  EXPECT_DOUBLE_EQ(s.mean, 2.0);
  EXPECT_DOUBLE_EQ(s.variance, 2.0);
}

TEST(Variance, ClassicalDerivativeMatchesFiniteDifference) {
  const int n = 4;
  const auto h = build_tfim_1d(n, 1.0, 1.0);
  const auto layout = layout_umpo_1d(n, 2);
  const auto ansatz = template_rx_ry_cnot(n, 1);
  Rng a(8), b(8);
  const auto got = derivative_samples(h, layout, ansatz, true, 0, 3, a, 0.0);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  for (double value : got) {
    std::vector<double> phi(ansatz.num_parameters), theta(layout.num_parameters());
    for (auto& p : phi) p = angle(b);
    for (auto& t : theta) t = angle(b);
    const auto psi = run(ansatz, phi);
    const double step = 1e-5;
    theta[0] += step;
    const double plus = expectation(psi, rotate_hamiltonian(h, layout, theta, 0.0).sum);
    theta[0] -= 2 * step;
    const double minus = expectation(psi, rotate_hamiltonian(h, layout, theta, 0.0).sum);
    EXPECT_NEAR(value, (plus - minus) / (2 * step), 1e-6);
  }
}

TEST(Variance, ExperimentGridAndSeedStability) {
  GradientVarianceSetup s;
  s.depths = {1};
  s.qubit_counts = {2, 4};
  s.samples = 300;
  s.seed = 1;
  const auto a = gradient_variance_experiment(s);
  EXPECT_EQ(a.cells.size(), 2u * 4u);
  s.seed = 2;
  const auto b = gradient_variance_experiment(s);
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    const auto& x = a.cells[i].stats;
    const auto& y = b.cells[i].stats;
    EXPECT_GE(x.variance, 0.0);
    const double combined = std::hypot(x.variance_standard_error, y.variance_standard_error);
    EXPECT_LT(std::abs(x.variance - y.variance), 5 * combined + 1e-12) << to_string(a.cells[i].parameter);
  }
  EXPECT_NO_THROW(a.cell(1, 4, TaggedParameter::kTnClassical));
  EXPECT_THROW(a.cell(3, 4, TaggedParameter::kTnClassical), std::out_of_range);
}

TEST(Variance, TagNamesRoundTrip) {
  for (auto p : {TaggedParameter::kTnQuantum, TaggedParameter::kTnClassical, TaggedParameter::kVqeQuantum,
                 TaggedParameter::kReplacedQuantum}) {
    EXPECT_EQ(tagged_parameter_from_string(to_string(p)), p);
  }
}

}  // namespace
}  // namespace tnpqc
