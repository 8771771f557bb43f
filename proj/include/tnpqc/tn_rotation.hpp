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

#ifndef TNPQC_TN_ROTATION_HPP
#define TNPQC_TN_ROTATION_HPP

#include <Eigen/Dense>

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "tnpqc/pauli.hpp"

namespace tnpqc {

/// Default prune threshold for rotated coefficients.
inline constexpr double kDefaultPrune = 1e-12;

enum class LayoutKind { kUmpo1d, kUttn1d, kUmpo2d, kUttn2d };

std::string to_string(LayoutKind kind);
LayoutKind layout_kind_from_string(const std::string& name);

/// A two-qubit unitary block exp(i(t1 XX + t2 YY + t3 ZZ)) on (site_a, site_b).
/// Layers are 1-based.
struct Block {
  int layer = 1;
  int site_a = 0;
  int site_b = 1;

  friend bool operator==(const Block&, const Block&) = default;
};

/// Ordered block list of a unitary tensor network. U = B_K ... B_1: blocks[0]
/// acts on the state first.
struct TnLayout {
  int n = 0;
  LayoutKind kind = LayoutKind::kUmpo1d;
  int layers = 0;
  int rows = 0;  // lattice shape, 2D kinds only
  int cols = 0;
  std::vector<Block> blocks;

  std::size_t num_parameters() const { return 3 * blocks.size(); }
  /// Blocks grouped by layer index, preserving order.
  std::vector<std::vector<Block>> by_layer() const;
};

/// Brick wall: odd layers pair (0,1),(2,3),..., even layers pair (1,2),(3,4),...
TnLayout layout_umpo_1d(int n, int layers);

/// Binary tree over n = 2^k sites. Layer k pairs representatives spaced 2^{k-1};
/// the higher-index site of each pair carries upward.
TnLayout layout_uttn_1d(int n);

/// Odd layers pair along rows, even layers along columns; within one direction
/// the brick offset alternates 0, 1, 0, ...
TnLayout layout_umpo_2d(int rows, int cols, int layers);

/// Coarse-graining tree alternating row and column pairing; rows * cols = 2^k.
TnLayout layout_uttn_2d(int rows, int cols);

/// Stacks `second` after `first` (second acts on the state after first).
TnLayout concatenate(const TnLayout& first, const TnLayout& second);

/// exp(i(t1 XX + t2 YY + t3 ZZ)); basis index 2*bit_a + bit_b.
Eigen::Matrix4cd block_unitary(double t1, double t2, double t3);

/// Full 2^n x 2^n unitary of the network (n <= kMaxDenseQubits); test oracle.
Eigen::MatrixXcd network_unitary(const TnLayout& layout, std::span<const double> theta);

/// B^dagger (c p) B expanded in the Pauli basis; only the two block sites change.
PauliSum conjugate_term(const PauliTerm& p, double coefficient, const Block& block,
                        const std::array<double, 3>& angles);

struct RotatedHamiltonian {
  PauliSum sum;
  TnLayout layout;
  std::vector<double> theta;
  double prune = kDefaultPrune;

  std::size_t term_count() const { return sum.size(); }
  int max_width() const { return sum.max_neighboring_width(); }
};

/// H(theta) = U^dagger H U by Heisenberg-picture propagation through every
/// block, last block first. Terms are merged after each block, then pruned.
RotatedHamiltonian rotate_hamiltonian(const PauliSum& h, const TnLayout& layout,
                                      std::span<const double> theta, double prune = kDefaultPrune);

/// Entry k is dH(theta)/dtheta_k as a PauliSum.
std::vector<PauliSum> coefficient_gradients(const PauliSum& h, const TnLayout& layout,
                                            std::span<const double> theta,
                                            double prune = kDefaultPrune);

/// Single entry of coefficient_gradients.
PauliSum coefficient_gradient(const PauliSum& h, const TnLayout& layout,
                              std::span<const double> theta, std::size_t index,
                              double prune = kDefaultPrune);

struct StringStatistics {
  std::size_t term_count = 0;
  int max_width = 0;
  std::map<int, std::size_t> width_histogram;
};

StringStatistics string_statistics(const RotatedHamiltonian& r);

nlohmann::json to_json(const TnLayout& layout);
TnLayout layout_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RotatedHamiltonian& r);
RotatedHamiltonian rotated_from_json(const nlohmann::json& j);

}  // namespace tnpqc

#endif  // TNPQC_TN_ROTATION_HPP
