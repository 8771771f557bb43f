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

#include "tnpqc/analysis.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>

#include "tnpqc/hamiltonians.hpp"

namespace tnpqc {

namespace {

using Vec = Eigen::VectorXcd;

Vec to_vec(const StateVector& s) {
  const auto a = s.amplitudes();
  return Eigen::Map<const Vec>(a.data(), static_cast<Eigen::Index>(a.size()));
}

StateVector from_vec(int n, const Vec& v) {
  return StateVector::from_amplitudes(n, std::vector<std::complex<double>>(v.data(), v.data() + v.size()));
}

Vec apply_h(const PauliSum& h, const Vec& v) {
  return to_vec(apply_sum(h, from_vec(h.num_qubits(), v)));
}

GroundState dense_ground_state(const PauliSum& h) {
  const Eigen::MatrixXcd m = to_dense(h);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m);
  if (solver.info() != Eigen::Success) throw ConvergenceError("dense eigensolver failed", 0.0);
  GroundState out;
  out.energy = solver.eigenvalues()(0);
  const Vec v = solver.eigenvectors().col(0);
  out.residual = (m * v - out.energy * v).norm();
  out.vector = from_vec(h.num_qubits(), v);
  return out;
}

std::uint64_t subset_mask(int n, std::span<const int> subset) {
  std::uint64_t mask = 0;
  for (int q : subset) {
    if (q < 0 || q >= n) throw std::invalid_argument("subsystem qubit " + std::to_string(q) + " out of range");
    if (mask & (1ULL << q)) throw std::invalid_argument("subsystem lists qubit " + std::to_string(q) + " twice");
    mask |= 1ULL << q;
  }
  return mask;
}

}  // namespace

GroundState ground_state(const PauliSum& h, const GroundStateOptions& options) {
  const int n = h.num_qubits();
  if (n < 1 || n > kMaxGroundStateQubits) {
    throw std::invalid_argument("ground_state: supports 1.." + std::to_string(kMaxGroundStateQubits) + " qubits");
  }
  if (n <= kDenseGroundStateQubits) return dense_ground_state(h);

  const Eigen::Index dim = Eigen::Index{1} << n;
  const int m = static_cast<int>(std::min<Eigen::Index>(options.krylov_dimension, dim));
  Rng rng(options.seed);
  std::normal_distribution<double> normal;
  Vec start(dim);
  for (Eigen::Index k = 0; k < dim; ++k) start(k) = {normal(rng), normal(rng)};
  start.normalize();

  double residual = 0.0;
  for (int restart = 0; restart <= options.max_restarts; ++restart) {
    std::vector<Vec> basis;
    std::vector<double> alpha;
    std::vector<double> beta;
    basis.push_back(start);
    for (int j = 0; j < m; ++j) {
      Vec w = apply_h(h, basis[j]);
      const double a = basis[j].dot(w).real();
      alpha.push_back(a);
      w -= a * basis[j];
      if (j > 0) w -= beta[j - 1] * basis[j - 1];
      for (int pass = 0; pass < 2; ++pass) {
        for (const Vec& b : basis) w -= b.dot(w) * b;
      }
      const double b = w.norm();
      if (j + 1 == m || b < 1e-13) break;
      beta.push_back(b);
      basis.push_back(w / b);
    }

    const auto k = static_cast<Eigen::Index>(alpha.size());
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
      t(i, i) = alpha[i];
      if (i + 1 < k) t(i, i + 1) = t(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri(t);
    Vec x = Vec::Zero(dim);
    for (Eigen::Index i = 0; i < k; ++i) x += tri.eigenvectors()(i, 0) * basis[i];
    x.normalize();

    const Vec hx = apply_h(h, x);
    const double energy = x.dot(hx).real();
    residual = (hx - energy * x).norm();
    if (residual <= options.tolerance) {
      GroundState out;
      out.energy = energy;
      out.residual = residual;
      out.restarts = restart;
      out.vector = from_vec(n, x);
      return out;
    }
    start = x;
  }
  throw ConvergenceError("ground_state: Lanczos did not converge, residual " + std::to_string(residual), residual);
}

double exact_ground_energy(const PauliSum& h, const GroundStateOptions& options) {
  return ground_state(h, options).energy;
}

void validate_subsystem(int n, std::span<const int> subset) {
  if (subset.empty()) throw std::invalid_argument("subsystem must not be empty");
  subset_mask(n, subset);
  if (static_cast<int>(subset.size()) > kMaxReducedQubits) {
    throw std::invalid_argument("subsystem of " + std::to_string(subset.size()) + " qubits exceeds the limit of " +
                                std::to_string(kMaxReducedQubits));
  }
}

namespace {

// Amplitudes reshaped to (kept index, traced index).
Eigen::MatrixXcd split(const StateVector& state, std::span<const int> subset) {
  const int n = state.num_qubits();
  validate_subsystem(n, subset);
  const std::uint64_t kept = subset_mask(n, subset);
  std::vector<int> rest;
  for (int q = 0; q < n; ++q) {
    if (!(kept & (1ULL << q))) rest.push_back(q);
  }
  const Eigen::Index rows = Eigen::Index{1} << subset.size();
  const Eigen::Index cols = Eigen::Index{1} << rest.size();
  Eigen::MatrixXcd m(rows, cols);
  for (std::size_t k = 0; k < state.dimension(); ++k) {
    Eigen::Index r = 0;
    Eigen::Index c = 0;
    for (std::size_t i = 0; i < subset.size(); ++i) r |= static_cast<Eigen::Index>((k >> subset[i]) & 1U) << i;
    for (std::size_t i = 0; i < rest.size(); ++i) c |= static_cast<Eigen::Index>((k >> rest[i]) & 1U) << i;
    m(r, c) = state[k];
  }
  return m;
}

}  // namespace

Eigen::MatrixXcd reduced_density_matrix(const StateVector& state, std::span<const int> subset) {
  const Eigen::MatrixXcd m = split(state, subset);
  return m * m.adjoint();
}

double purity_moment(const StateVector& state, std::span<const int> subset, int t) {
  if (t < 1) throw std::invalid_argument("purity_moment: t must be >= 1");
  const Eigen::MatrixXcd m = split(state, subset);
  // rho_A and rho_B share their non-zero spectrum; use the smaller Gram matrix.
  const Eigen::MatrixXcd g = m.rows() <= m.cols() ? Eigen::MatrixXcd(m * m.adjoint()) : Eigen::MatrixXcd(m.adjoint() * m);
  if (t == 1) return g.trace().real();
  if (t == 2) return g.squaredNorm();
  Eigen::MatrixXcd power = g;
  for (int k = 2; k < t; ++k) power = power * g;
  return (power.cwiseProduct(g.transpose())).sum().real();
}

Estimate estimate(std::span<const double> values) {
  Estimate out;
  out.samples = values.size();
  if (values.empty()) return out;
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    const double var = ss / static_cast<double>(values.size() - 1);
    out.standard_error = std::sqrt(var / static_cast<double>(values.size()));
  }
  return out;
}

StateVector haar_state(int n, Rng& rng) {
  if (n < 1 || n > kMaxStateQubits) throw std::invalid_argument("haar_state: bad qubit count");
  std::normal_distribution<double> normal;
  std::vector<std::complex<double>> amps(std::size_t{1} << n);
  double norm = 0.0;
  for (auto& a : amps) {
    const double re = normal(rng);
    const double im = normal(rng);
    a = {re, im};
    norm += re * re + im * im;
  }
  const double scale = 1.0 / std::sqrt(norm);
  for (auto& a : amps) a *= scale;
  return StateVector::from_amplitudes(n, std::move(amps));
}

Estimate haar_moment(int n, std::span<const int> subset, int t, std::size_t samples, std::uint64_t seed) {
  validate_subsystem(n, subset);
  if (samples < 2) throw std::invalid_argument("haar_moment: need at least 2 samples");
  Rng rng(seed);
  std::vector<double> values(samples);
  for (auto& v : values) v = purity_moment(haar_state(n, rng), subset, t);
  return estimate(values);
}

double haar_moment_closed_form(int n, int kept, int t) {
  if (kept < 0 || kept > n) throw std::invalid_argument("haar_moment_closed_form: bad subsystem size");
  const double da = std::ldexp(1.0, kept);
  const double db = std::ldexp(1.0, n - kept);
  const double d = da * db;
  if (t == 1) return 1.0;
  if (t == 2) return (da + db) / (d + 1.0);
  if (t == 3) return (da * da + db * db + 3.0 * da * db + 1.0) / ((d + 1.0) * (d + 2.0));
  throw std::invalid_argument("haar_moment_closed_form: t must be 1, 2 or 3");
}

void validate(const EnsembleSpec& e) {
  if (e.samples < 2) throw std::invalid_argument("ensemble: samples must be >= 2");
  if (e.haar) {
    if (e.haar_qubits < 1 || e.haar_qubits > kMaxStateQubits) throw std::invalid_argument("ensemble: bad haar_qubits");
    return;
  }
  if (e.ansatz.n < 1) throw std::invalid_argument("ensemble: ansatz has no qubits");
  if (e.layout && e.layout->n != e.ansatz.n) throw std::invalid_argument("ensemble: layout qubit count mismatch");
}

std::vector<StateVector> sample_ensemble(const EnsembleSpec& e) {
  validate(e);
  Rng rng(e.seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::vector<StateVector> states;
  states.reserve(e.samples);
  std::vector<double> phi(e.ansatz.num_parameters);
  std::vector<double> theta(e.layout ? e.layout->num_parameters() : 0);
  for (std::size_t s = 0; s < e.samples; ++s) {
    if (e.haar) {
      states.push_back(haar_state(e.haar_qubits, rng));
      continue;
    }
    for (auto& p : phi) p = angle(rng);
    for (auto& t : theta) t = angle(rng);
    StateVector psi = run(e.ansatz, phi);
    if (e.layout) psi.apply_network(*e.layout, theta);
    states.push_back(std::move(psi));
  }
  return states;
}

DeltaEstimate combine_delta(const Estimate& haar, const Estimate& ensemble) {
  DeltaEstimate out;
  out.haar = haar;
  out.ensemble = ensemble;
  out.delta = std::log(haar.mean / ensemble.mean);
  const double rh = haar.standard_error / haar.mean;
  const double re = ensemble.standard_error / ensemble.mean;
  out.standard_error = std::sqrt(rh * rh + re * re);
  return out;
}

namespace {

Estimate ensemble_moment(const std::vector<StateVector>& states, std::span<const int> subset, int t) {
  std::vector<double> values;
  values.reserve(states.size());
  for (const auto& s : states) values.push_back(purity_moment(s, subset, t));
  return estimate(values);
}

}  // namespace

DeltaEstimate delta_t(const EnsembleSpec& e, std::span<const int> subset, int t, const HaarBaseline& haar) {
  const int n = e.num_qubits();
  validate_subsystem(n, subset);
  const auto states = sample_ensemble(e);
  return combine_delta(haar_moment(n, subset, t, haar.samples, haar.seed), ensemble_moment(states, subset, t));
}

std::vector<int> first_half(int n) {
  std::vector<int> out(static_cast<std::size_t>(n / 2));
  std::iota(out.begin(), out.end(), 0);
  return out;
}

std::vector<std::vector<int>> all_half_subsets(int n) {
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("all_half_subsets: n must be even and >= 2");
  std::vector<std::vector<int>> out;
  std::vector<bool> pick(static_cast<std::size_t>(n), false);
  std::fill(pick.begin(), pick.begin() + n / 2, true);
  do {
    std::vector<int> subset;
    for (int q = 0; q < n; ++q) {
      if (pick[q]) subset.push_back(q);
    }
    out.push_back(std::move(subset));
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return out;
}

std::vector<PartitionResult> partition_sweep(const EnsembleSpec& e, int t, const std::vector<std::vector<int>>& subsets,
                                             const HaarBaseline& haar) {
  const int n = e.num_qubits();
  for (const auto& s : subsets) validate_subsystem(n, s);
  const auto states = sample_ensemble(e);
  const auto contiguous = first_half(n);
  std::map<std::size_t, Estimate> baselines;
  std::vector<PartitionResult> out;
  for (const auto& s : subsets) {
    auto it = baselines.find(s.size());
    if (it == baselines.end()) {
      it = baselines.emplace(s.size(), haar_moment(n, s, t, haar.samples, haar.seed)).first;
    }
    PartitionResult r;
    r.subset = s;
    r.contiguous = (s == contiguous);
    r.delta = combine_delta(it->second, ensemble_moment(states, s, t));
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<PartitionResult> random_partition_sweep(const EnsembleSpec& e, int t, std::size_t trials,
                                                    std::uint64_t partition_seed, const HaarBaseline& haar) {
  const int n = e.num_qubits();
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("random_partition_sweep: n must be even");
  std::vector<std::vector<int>> subsets{first_half(n)};
  Rng rng(partition_seed);
  std::vector<int> qubits(static_cast<std::size_t>(n));
  for (std::size_t k = 0; k < trials; ++k) {
    std::iota(qubits.begin(), qubits.end(), 0);
    std::shuffle(qubits.begin(), qubits.end(), rng);
    std::vector<int> subset(qubits.begin(), qubits.begin() + n / 2);
    std::sort(subset.begin(), subset.end());
    subsets.push_back(std::move(subset));
  }
  return partition_sweep(e, t, subsets, haar);
}

DerivativeStatistics derivative_statistics(std::span<const double> values) {
  DerivativeStatistics out;
  out.samples = values.size();
  if (values.empty()) return out;
  const double count = static_cast<double>(values.size());
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / count;
  if (values.size() < 2) return out;
  double m2 = 0.0;
  double m4 = 0.0;
  for (double v : values) {
    const double d = (v - out.mean) * (v - out.mean);
    m2 += d;
    m4 += d * d;
  }
  out.variance = m2 / (count - 1.0);
  out.mean_standard_error = std::sqrt(out.variance / count);
  const double pop = m2 / count;
  out.variance_standard_error = std::sqrt(std::max(0.0, m4 / count - pop * pop) / count);
  return out;
}

std::vector<double> derivative_samples(const PauliSum& h, const std::optional<TnLayout>& layout,
                                       const AnsatzSpec& ansatz, bool classical, std::size_t index,
                                       std::size_t samples, Rng& rng, double prune) {
  if (ansatz.n != h.num_qubits()) throw std::invalid_argument("derivative_samples: qubit count mismatch");
  if (classical && !layout) throw std::invalid_argument("derivative_samples: classical parameter needs a layout");
  const std::size_t num_theta = layout ? layout->num_parameters() : 0;
  if (index >= (classical ? num_theta : ansatz.num_parameters)) {
    throw std::invalid_argument("derivative_samples: parameter index out of range");
  }
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::vector<double> phi(ansatz.num_parameters);
  std::vector<double> theta(num_theta);
  std::vector<double> out;
  out.reserve(samples);
  for (std::size_t s = 0; s < samples; ++s) {
    for (auto& p : phi) p = angle(rng);
    for (auto& t : theta) t = angle(rng);
    if (classical) {
      const PauliSum grad = coefficient_gradient(h, *layout, theta, index, prune);
      out.push_back(expectation(run(ansatz, phi), grad));
      continue;
    }
    const PauliSum observable = layout ? rotate_hamiltonian(h, *layout, theta, prune).sum : h;
    const double original = phi[index];
    phi[index] = original + std::numbers::pi / 2.0;
    const double plus = expectation(run(ansatz, phi), observable);
    phi[index] = original - std::numbers::pi / 2.0;
    const double minus = expectation(run(ansatz, phi), observable);
    phi[index] = original;
    out.push_back(0.5 * (plus - minus));
  }
  return out;
}

std::string to_string(TaggedParameter p) {
  switch (p) {
    case TaggedParameter::kTnQuantum: return "tn_quantum";
    case TaggedParameter::kTnClassical: return "tn_classical";
    case TaggedParameter::kVqeQuantum: return "vqe_quantum";
    case TaggedParameter::kReplacedQuantum: return "replaced_quantum";
  }
  return "tn_quantum";
}

TaggedParameter tagged_parameter_from_string(const std::string& name) {
  for (auto p : {TaggedParameter::kTnQuantum, TaggedParameter::kTnClassical, TaggedParameter::kVqeQuantum,
                 TaggedParameter::kReplacedQuantum}) {
    if (to_string(p) == name) return p;
  }
  throw std::invalid_argument("unknown tagged parameter '" + name + "'");
}

void validate(const GradientVarianceSetup& s) {
  if (s.depths.empty() || s.qubit_counts.empty()) throw std::invalid_argument("gradient variance: empty grid");
  for (int d : s.depths) {
    if (d < 1) throw std::invalid_argument("gradient variance: depths must be >= 1");
  }
  for (int n : s.qubit_counts) {
    if (n < 2 || n > kMaxStateQubits) throw std::invalid_argument("gradient variance: qubit counts must be >= 2");
  }
  if (s.tn_layers < 1) throw std::invalid_argument("gradient variance: tn_layers must be >= 1");
  if (s.samples < 2) throw std::invalid_argument("gradient variance: samples must be >= 2");
  if (s.parameters.empty()) throw std::invalid_argument("gradient variance: no tagged parameters");
}

std::vector<double> tagged_derivatives(const GradientVarianceSetup& s, int depth, int n, TaggedParameter p,
                                       std::uint64_t seed) {
  const PauliSum h = build_tfim_1d(n, s.J, s.g);
  const AnsatzSpec pqc = template_rx_ry_cnot(n, depth);
  const TnLayout layout = layout_umpo_1d(n, s.tn_layers);
  Rng rng(seed);
  switch (p) {
    case TaggedParameter::kTnQuantum: return derivative_samples(h, layout, pqc, false, 0, s.samples, rng, s.prune);
    case TaggedParameter::kTnClassical: return derivative_samples(h, layout, pqc, true, 0, s.samples, rng, s.prune);
    case TaggedParameter::kVqeQuantum: return derivative_samples(h, std::nullopt, pqc, false, 0, s.samples, rng);
    case TaggedParameter::kReplacedQuantum: {
      const AnsatzSpec replaced = pqc.followed_by(quantum_filler(n, layout.num_parameters()));
      return derivative_samples(h, std::nullopt, replaced, false, pqc.num_parameters, s.samples, rng);
    }
  }
  return {};
}

std::uint64_t variance_cell_seed(std::uint64_t seed, int depth, int n, TaggedParameter p) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(depth), static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(p)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

VarianceCell variance_cell(const GradientVarianceSetup& s, int depth, int n, TaggedParameter p) {
  VarianceCell cell;
  cell.depth = depth;
  cell.n = n;
  cell.parameter = p;
  cell.stats = derivative_statistics(tagged_derivatives(s, depth, n, p, variance_cell_seed(s.seed, depth, n, p)));
  return cell;
}

VarianceReport gradient_variance_experiment(const GradientVarianceSetup& s) {
  validate(s);
  VarianceReport report;
  for (int depth : s.depths) {
    for (int n : s.qubit_counts) {
      for (TaggedParameter p : s.parameters) report.cells.push_back(variance_cell(s, depth, n, p));
    }
  }
  return report;
}

const VarianceCell& VarianceReport::cell(int depth, int n, TaggedParameter p) const {
  for (const auto& c : cells) {
    if (c.depth == depth && c.n == n && c.parameter == p) return c;
  }
  throw std::out_of_range("VarianceReport: no such cell");
}

double VarianceReport::log_variance_slope(int depth, TaggedParameter p) const {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& c : cells) {
    if (c.depth == depth && c.parameter == p && c.stats.variance > 0.0) {
      xs.push_back(c.n);
      ys.push_back(std::log(c.stats.variance));
    }
  }
  if (xs.size() < 2) throw std::invalid_argument("log_variance_slope: need two grid points");
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace tnpqc
