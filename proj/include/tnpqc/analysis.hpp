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

#ifndef TNPQC_ANALYSIS_HPP
#define TNPQC_ANALYSIS_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tnpqc/pauli.hpp"
#include "tnpqc/simulator.hpp"
#include "tnpqc/tn_rotation.hpp"

namespace tnpqc {

/// Largest register the ground-state solver accepts.
inline constexpr int kMaxGroundStateQubits = 16;
/// Up to this size the ground energy comes from dense diagonalization.
inline constexpr int kDenseGroundStateQubits = 8;
/// Largest kept subsystem for a reduced density matrix.
inline constexpr int kMaxReducedQubits = 13;

struct GroundStateOptions {
  double tolerance = 1e-8;
  int krylov_dimension = 60;
  int max_restarts = 500;
  std::uint64_t seed = 7;
};

struct GroundState {
  double energy = 0.0;
  double residual = 0.0;  // ||H v - E v||
  int restarts = 0;
  StateVector vector;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual) : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Smallest eigenpair of h. Restarted Lanczos through PauliSum products above
/// kDenseGroundStateQubits, dense diagonalization below. Throws
/// ConvergenceError when the residual target is not met.
GroundState ground_state(const PauliSum& h, const GroundStateOptions& options = {});
double exact_ground_energy(const PauliSum& h, const GroundStateOptions& options = {});

/// Kept qubits A; must be a non-empty subset of the register (A equal to the
/// whole register is allowed and gives a pure reduced state).
void validate_subsystem(int n, std::span<const int> subset);

/// rho_A = Tr_{not A} |psi><psi|, with qubit subset[k] as bit k of the row index.
Eigen::MatrixXcd reduced_density_matrix(const StateVector& state, std::span<const int> subset);

/// Tr(rho_A^t) for integer t >= 1.
double purity_moment(const StateVector& state, std::span<const int> subset, int t);

struct Estimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t samples = 0;
};

/// Sample mean with standard error sd / sqrt(N).
Estimate estimate(std::span<const double> values);

/// Haar-random pure state: normalized complex Gaussian vector.
StateVector haar_state(int n, Rng& rng);

/// Monte Carlo E_Haar[Tr rho_A^t].
Estimate haar_moment(int n, std::span<const int> subset, int t, std::size_t samples, std::uint64_t seed);

/// Exact Haar averages of Tr rho_A^t for t in {2, 3} (cross-check only).
double haar_moment_closed_form(int n, int kept, int t);

/// Parameter ensemble: U(theta) U(phi)|0>, every angle Uniform[0, 2 pi).
/// With `haar` set the ansatz is ignored and Haar-random states are drawn.
struct EnsembleSpec {
  AnsatzSpec ansatz;
  std::optional<TnLayout> layout;
  std::size_t samples = 500;
  std::uint64_t seed = 0;
  bool haar = false;
  int haar_qubits = 0;

  int num_qubits() const { return haar ? haar_qubits : ansatz.n; }
};

void validate(const EnsembleSpec& e);

/// The ensemble's states, in sampling order.
std::vector<StateVector> sample_ensemble(const EnsembleSpec& e);

struct DeltaEstimate {
  double delta = 0.0;
  double standard_error = 0.0;
  Estimate haar;
  Estimate ensemble;
};

/// log(haar / ensemble) with first-order error propagation.
DeltaEstimate combine_delta(const Estimate& haar, const Estimate& ensemble);

struct HaarBaseline {
  std::size_t samples = 20000;
  std::uint64_t seed = 1;
};

DeltaEstimate delta_t(const EnsembleSpec& e, std::span<const int> subset, int t, const HaarBaseline& haar = {});

/// First n/2 qubits.
std::vector<int> first_half(int n);
/// Every subset of size n/2, lexicographic.
std::vector<std::vector<int>> all_half_subsets(int n);

struct PartitionResult {
  std::vector<int> subset;
  bool contiguous = false;
  DeltaEstimate delta;
};

/// Delta_t over the contiguous first half followed by `trials` uniformly random
/// half-size subsets. All subsets are evaluated on the same ensemble states;
/// the Haar baseline depends only on |A| and is shared.
std::vector<PartitionResult> random_partition_sweep(const EnsembleSpec& e, int t, std::size_t trials,
                                                    std::uint64_t partition_seed, const HaarBaseline& haar = {});

/// Same, over an explicit list of subsets.
std::vector<PartitionResult> partition_sweep(const EnsembleSpec& e, int t, const std::vector<std::vector<int>>& subsets,
                                             const HaarBaseline& haar = {});

/// Mean, variance and their sampling errors of a derivative sample.
struct DerivativeStatistics {
  std::size_t samples = 0;
  double mean = 0.0;
  double mean_standard_error = 0.0;
  double variance = 0.0;
  double variance_standard_error = 0.0;
};

DerivativeStatistics derivative_statistics(std::span<const double> values);

/// `samples` draws of dC/d(parameter) for C = <0|U(phi)^dag H(theta) U(phi)|0>
/// with every angle Uniform[0, 2 pi). `classical` selects theta[index] (needs
/// a layout), otherwise phi[index].
std::vector<double> derivative_samples(const PauliSum& h, const std::optional<TnLayout>& layout,
                                       const AnsatzSpec& ansatz, bool classical, std::size_t index,
                                       std::size_t samples, Rng& rng, double prune = kDefaultPrune);

/// Tagged parameters of the barren-plateau study.
///  - kTnQuantum: first PQC parameter, with the uMPO present.
///  - kTnClassical: first uMPO parameter.
///  - kVqeQuantum: first PQC parameter, uMPO removed.
///  - kReplacedQuantum: uMPO replaced by PQC layers with as many parameters;
///    the first of those parameters (the classical parameter's counterpart).
enum class TaggedParameter { kTnQuantum, kTnClassical, kVqeQuantum, kReplacedQuantum };

std::string to_string(TaggedParameter p);
TaggedParameter tagged_parameter_from_string(const std::string& name);

struct GradientVarianceSetup {
  std::vector<int> depths{1, 2, 4, 8};
  std::vector<int> qubit_counts{2, 4, 6, 8, 10};
  int tn_layers = 2;
  std::size_t samples = 1000;
  std::uint64_t seed = 0;
  double J = 1.0;
  double g = 1.0;
  double prune = kDefaultPrune;
  std::vector<TaggedParameter> parameters{TaggedParameter::kTnQuantum, TaggedParameter::kTnClassical,
                                          TaggedParameter::kVqeQuantum, TaggedParameter::kReplacedQuantum};
};

void validate(const GradientVarianceSetup& s);

struct VarianceCell {
  int depth = 0;
  int n = 0;
  TaggedParameter parameter = TaggedParameter::kTnQuantum;
  DerivativeStatistics stats;
};

struct VarianceReport {
  std::vector<VarianceCell> cells;

  /// Least-squares slope of ln Var against n at one depth.
  double log_variance_slope(int depth, TaggedParameter p) const;
  const VarianceCell& cell(int depth, int n, TaggedParameter p) const;
};

/// One grid cell: `samples` uniform parameter draws, derivative of
/// C = <0|U^dag H U|0> (H = TFIM1D(J, g)) with respect to the tagged parameter.
/// Quantum derivatives use the parameter shift rule, classical ones the
/// coefficient gradient of the rotated Hamiltonian.
std::vector<double> tagged_derivatives(const GradientVarianceSetup& s, int depth, int n, TaggedParameter p,
                                       std::uint64_t seed);

/// Seed of one (depth, n, parameter) cell, derived from the setup seed.
std::uint64_t variance_cell_seed(std::uint64_t seed, int depth, int n, TaggedParameter p);

/// One cell of the sweep; same numbers as the matching cell of the full experiment.
VarianceCell variance_cell(const GradientVarianceSetup& s, int depth, int n, TaggedParameter p);

VarianceReport gradient_variance_experiment(const GradientVarianceSetup& s);

}  // namespace tnpqc

#endif  // TNPQC_ANALYSIS_HPP
