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

#include "tnpqc/hamiltonians.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace tnpqc {
namespace {

void require_finite(std::initializer_list<double> values, const char* where) {
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(where) + ": non-finite coupling");
  }
}

PauliTerm two_site(int n, int a, char pa, int b, char pb) {
  const auto p = PauliTerm::single(n, a, pa);
  const auto q = PauliTerm::single(n, b, pb);
  return PauliTerm(n, p.x_bits() | q.x_bits(), p.z_bits() | q.z_bits());
}

}  // namespace

PauliSum build_tfim_1d(int n, double J, double g) {
  if (n < 2) throw std::invalid_argument("build_tfim_1d: n must be >= 2");
  require_finite({J, g}, "build_tfim_1d");
  std::vector<PauliSum::Entry> terms;
  for (int i = 0; i + 1 < n; ++i) terms.push_back({two_site(n, i, 'Z', i + 1, 'Z'), -J});
  for (int i = 0; i < n; ++i) terms.push_back({PauliTerm::single(n, i, 'X'), -g});
  return PauliSum::from_entries(n, std::move(terms));
}

PauliSum build_tfim_2d(int rows, int cols, double J, double g) {
  if (rows < 2 || cols < 2) throw std::invalid_argument("build_tfim_2d: rows and cols must be >= 2");
  require_finite({J, g}, "build_tfim_2d");
  const int n = rows * cols;
  std::vector<PauliSum::Entry> terms;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int site = r * cols + c;
      if (c + 1 < cols) terms.push_back({two_site(n, site, 'Z', site + 1, 'Z'), -J});
      if (r + 1 < rows) terms.push_back({two_site(n, site, 'Z', site + cols, 'Z'), -J});
      terms.push_back({PauliTerm::single(n, site, 'X'), -g});
    }
  }
  return PauliSum::from_entries(n, std::move(terms));
}

PauliSum build_time_crystal(int n, double J, double V, double h) {
  if (n < 3) throw std::invalid_argument("build_time_crystal: n must be >= 3");
  require_finite({J, V, h}, "build_time_crystal");
  std::vector<PauliSum::Entry> terms;
  for (int k = 1; k + 1 < n; ++k) {
    const std::uint64_t z = (1ULL << (k - 1)) | (1ULL << (k + 1));
    terms.push_back({PauliTerm(n, 1ULL << k, z), -J});
  }
  for (int k = 0; k + 1 < n; ++k) terms.push_back({two_site(n, k, 'X', k + 1, 'X'), -V});
  for (int k = 0; k < n; ++k) terms.push_back({PauliTerm::single(n, k, 'X'), -h});
  return PauliSum::from_entries(n, std::move(terms));
}

PauliSum build_hamiltonian(const HamiltonianSpec& spec) {
  return std::visit(
      [](const auto& s) -> PauliSum {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Tfim1d>) return build_tfim_1d(s.n, s.J, s.g);
        if constexpr (std::is_same_v<T, Tfim2d>) return build_tfim_2d(s.rows, s.cols, s.J, s.g);
        if constexpr (std::is_same_v<T, TimeCrystal>) return build_time_crystal(s.n, s.J, s.V, s.h);
      },
      spec);
}

int num_qubits(const HamiltonianSpec& spec) {
  return std::visit(
      [](const auto& s) -> int {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Tfim2d>) return s.rows * s.cols;
        else return s.n;
      },
      spec);
}

std::string describe(const HamiltonianSpec& spec) {
  std::ostringstream os;
  std::visit(
      [&os](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Tfim1d>) {
          os << "tfim1d(n=" << s.n << ", J=" << s.J << ", g=" << s.g << ")";
        } else if constexpr (std::is_same_v<T, Tfim2d>) {
          os << "tfim2d(" << s.rows << "x" << s.cols << ", J=" << s.J << ", g=" << s.g << ")";
        } else {
          os << "time_crystal(n=" << s.n << ", J=" << s.J << ", V=" << s.V << ", h=" << s.h << ")";
        }
      },
      spec);
  return os.str();
}

Mpo build_tfim_mpo(int n, double J, double g) {
  if (n < 2) throw std::invalid_argument("build_tfim_mpo: n must be >= 2");
  require_finite({J, g}, "build_tfim_mpo");
  const Eigen::Matrix2cd I = Eigen::Matrix2cd::Identity();
  Eigen::Matrix2cd X, Z;
  X << 0, 1, 1, 0;
  Z << 1, 0, 0, -1;
  const Eigen::Matrix2cd O = Eigen::Matrix2cd::Zero();

  Mpo mpo;
  mpo.prefactor = J;
  mpo.blocks.reserve(n);
  mpo.blocks.push_back({1, 3, {I, -Z, -g * X}});
  for (int i = 1; i + 1 < n; ++i) {
    mpo.blocks.push_back({3, 3, {I, -Z, -g * X,
                                 O, O, Z,
                                 O, O, I}});
  }
  mpo.blocks.push_back({3, 1, {-g * X, Z, I}});
  return mpo;
}

Eigen::MatrixXcd mpo_to_dense(const Mpo& mpo) {
  const int n = mpo.num_sites();
  if (n < 1) throw std::invalid_argument("mpo_to_dense: empty MPO");
  if (n > kMaxDenseQubits) throw std::invalid_argument("mpo_to_dense: n must be <= 12");

  // partial[b] is the operator on sites [0, i) attached to right bond index b.
  // The new site is the more significant factor, matching bit i <-> qubit i.
  const MpoBlock& first = mpo.blocks.front();
  if (first.rows != 1) throw std::invalid_argument("mpo_to_dense: left block must have one row");
  std::vector<Eigen::MatrixXcd> partial;
  for (int b = 0; b < first.cols; ++b) partial.emplace_back(first.at(0, b));

  for (int i = 1; i < n; ++i) {
    const MpoBlock& w = mpo.blocks[i];
    if (w.rows != static_cast<int>(partial.size())) {
      throw std::invalid_argument("mpo_to_dense: bond dimension mismatch at site " + std::to_string(i));
    }
    const Eigen::Index dim = partial.front().rows();
    std::vector<Eigen::MatrixXcd> next(w.cols, Eigen::MatrixXcd::Zero(2 * dim, 2 * dim));
    for (int a = 0; a < w.rows; ++a) {
      for (int b = 0; b < w.cols; ++b) {
        const Eigen::Matrix2cd& op = w.at(a, b);
        if (op.isZero(0.0)) continue;
        for (int r = 0; r < 2; ++r) {
          for (int c = 0; c < 2; ++c) {
            if (op(r, c) == 0.0) continue;
            next[b].block(r * dim, c * dim, dim, dim) += op(r, c) * partial[a];
          }
        }
      }
    }
    partial = std::move(next);
  }
  if (partial.size() != 1) throw std::invalid_argument("mpo_to_dense: right block must have one column");
  return mpo.prefactor * partial.front();
}

}  // namespace tnpqc
