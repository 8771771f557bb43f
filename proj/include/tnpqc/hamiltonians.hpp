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

#ifndef TNPQC_HAMILTONIANS_HPP
#define TNPQC_HAMILTONIANS_HPP

#include <Eigen/Dense>

#include <string>
#include <variant>
#include <vector>

#include "tnpqc/pauli.hpp"

namespace tnpqc {

struct Tfim1d {
  int n = 2;
  double J = 1.0;
  double g = 1.0;
};

struct Tfim2d {
  int rows = 2;
  int cols = 2;
  double J = 1.0;
  double g = 1.0;
};

struct TimeCrystal {
  int n = 3;
  double J = 1.0;
  double V = 0.1;
  double h = 0.1;
};

using HamiltonianSpec = std::variant<Tfim1d, Tfim2d, TimeCrystal>;

/// H = -J sum_i Z_i Z_{i+1} - g sum_i X_i on an open chain.
PauliSum build_tfim_1d(int n, double J, double g);

/// Open-boundary nearest-neighbour ZZ on a row-major rows x cols grid plus on-site X.
PauliSum build_tfim_2d(int rows, int cols, double J, double g);

/// H = -sum_k (J Z_{k-1} X_k Z_{k+1} + V X_k X_{k+1} + h X_k), open chain: the
/// ZXZ term lives on interior sites only.
PauliSum build_time_crystal(int n, double J, double V, double h);

PauliSum build_hamiltonian(const HamiltonianSpec& spec);
int num_qubits(const HamiltonianSpec& spec);
std::string describe(const HamiltonianSpec& spec);

/// One MPO tensor: a rows x cols grid of single-site 2x2 operators.
/// Boundary tensors are 1x3 (left) and 3x1 (right); bulk tensors are 3x3.
struct MpoBlock {
  int rows = 0;
  int cols = 0;
  std::vector<Eigen::Matrix2cd> slots;  // row-major

  const Eigen::Matrix2cd& at(int r, int c) const { return slots[r * cols + c]; }
  Eigen::Matrix2cd& at(int r, int c) { return slots[r * cols + c]; }
};

struct Mpo {
  double prefactor = 1.0;
  std::vector<MpoBlock> blocks;

  int num_sites() const { return static_cast<int>(blocks.size()); }
};

/// MPO of H = -J sum_i (Z_i Z_{i+1} + g X_i) as J * W[1] W[2] ... W[n], with
///   W[1] = (I, -Z, -gX),  W[i] = ((I, -Z, -gX), (0, 0, Z), (0, 0, I)),
///   W[n] = (-gX, Z, I)^T.
/// The field slots and the right-boundary Z slot carry the signs that make the
/// contraction reproduce a uniform -ZZ coupling and a -gX field. In the
/// parametrization of build_tfim_1d this is build_tfim_1d(n, J, J * g).
Mpo build_tfim_mpo(int n, double J, double g);

/// Left-to-right contraction over the bond index. n <= kMaxDenseQubits.
Eigen::MatrixXcd mpo_to_dense(const Mpo& mpo);

}  // namespace tnpqc

#endif  // TNPQC_HAMILTONIANS_HPP
