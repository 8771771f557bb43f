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

#ifndef TNPQC_PAULI_HPP
#define TNPQC_PAULI_HPP

#include <Eigen/Dense>

#include <bit>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tnpqc {

/// Largest qubit count a PauliTerm can address (one 64-bit word per component).
inline constexpr int kMaxPauliQubits = 64;

/// Largest qubit count accepted by the dense materialization oracles.
inline constexpr int kMaxDenseQubits = 12;

/// A phase-free Pauli string in symplectic form. Site i carries I/X/Z/Y for
/// (x_i, z_i) = (0,0)/(1,0)/(0,1)/(1,1); Y is the Hermitian i*X*Z.
class PauliTerm {
 public:
  PauliTerm() = default;
  PauliTerm(int num_qubits, std::uint64_t x_bits, std::uint64_t z_bits);

  static PauliTerm identity(int num_qubits);
  /// `op` is one of 'I', 'X', 'Y', 'Z'.
  static PauliTerm single(int num_qubits, int site, char op);
  /// Parses "XIZY..." with site 0 leftmost. '_' is accepted for identity.
  static PauliTerm parse(std::string_view text);

  int num_qubits() const { return n_; }
  std::uint64_t x_bits() const { return x_; }
  std::uint64_t z_bits() const { return z_; }
  std::uint64_t support() const { return x_ | z_; }
  int weight() const { return std::popcount(support()); }
  bool is_identity() const { return support() == 0; }
  char at(int site) const;

  /// Number of Y sites, i.e. popcount(x & z).
  int y_count() const { return std::popcount(x_ & z_); }

  bool commutes_with(const PauliTerm& other) const {
    return (std::popcount((x_ & other.z_) ^ (z_ & other.x_)) & 1) == 0;
  }

  std::string to_string() const;

  friend bool operator==(const PauliTerm&, const PauliTerm&) = default;
  friend auto operator<=>(const PauliTerm& a, const PauliTerm& b) {
    if (auto c = a.n_ <=> b.n_; c != 0) return c;
    if (auto c = a.x_ <=> b.x_; c != 0) return c;
    return a.z_ <=> b.z_;
  }

 private:
  int n_ = 0;
  std::uint64_t x_ = 0;
  std::uint64_t z_ = 0;
};

struct PauliTermHash {
  std::size_t operator()(const PauliTerm& p) const noexcept {
    std::uint64_t h = p.x_bits() * 0x9E3779B97F4A7C15ULL;
    h ^= p.z_bits() + 0x7F4A7C159E3779B9ULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h ^ static_cast<std::uint64_t>(p.num_qubits()));
  }
};

/// A power of i: value = i^k for k in {0,1,2,3}.
enum class Phase : std::uint8_t { kPlusOne = 0, kPlusI = 1, kMinusOne = 2, kMinusI = 3 };

std::complex<double> to_complex(Phase phase);

struct PhasedPauli {
  Phase phase;
  PauliTerm term;
};

/// Matrix product a*b = phase * term. Throws std::invalid_argument on size mismatch.
PhasedPauli mul(const PauliTerm& a, const PauliTerm& b);

/// Span (max - min + 1) of non-identity sites in 1D order; 0 for the identity.
int neighboring_width(const PauliTerm& p);

/// Chebyshev span over a row-major rows x cols lattice: the larger of the row
/// and column extents of the support. 0 for the identity.
int lattice_width(const PauliTerm& p, int rows, int cols);

/// Hermitian operator sum_P c_P P with real coefficients. Terms are unique and
/// kept in canonical (sorted) order; the value is immutable once built.
class PauliSum {
 public:
  struct Entry {
    PauliTerm term;
    double coefficient = 0.0;
  };

  PauliSum() = default;
  explicit PauliSum(int num_qubits) : n_(num_qubits) {}

  /// Merges duplicates, then drops entries with |c| <= prune. prune = 0 keeps
  /// every nonzero coefficient.
  static PauliSum from_entries(int num_qubits, std::vector<Entry> entries, double prune = 0.0);

  int num_qubits() const { return n_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  std::span<const Entry> terms() const { return terms_; }
  auto begin() const { return terms_.begin(); }
  auto end() const { return terms_.end(); }

  /// Coefficient of `term`, or 0 when absent.
  double coefficient(const PauliTerm& term) const;
  /// sum_P c_P^2, the normalized Hilbert-Schmidt norm squared.
  double norm_squared() const;
  int max_neighboring_width() const;

  PauliSum scaled(double factor) const;
  friend PauliSum operator+(const PauliSum& a, const PauliSum& b);
  friend PauliSum operator-(const PauliSum& a, const PauliSum& b);

  std::string to_string() const;

 private:
  int n_ = 0;
  std::vector<Entry> terms_;
};

/// Unordered scratch space for building a PauliSum term by term.
class PauliAccumulator {
 public:
  explicit PauliAccumulator(int num_qubits, std::size_t reserve = 0);

  void add(const PauliTerm& term, double coefficient);
  void add(const PauliSum& sum, double scale = 1.0);
  std::size_t size() const { return terms_.size(); }
  int num_qubits() const { return n_; }

  PauliSum finish(double prune = 0.0) &&;

 private:
  int n_;
  std::unordered_map<PauliTerm, double, PauliTermHash> terms_;
};

/// Dense 2^n x 2^n matrix; basis index bit i holds qubit i. n <= kMaxDenseQubits.
Eigen::MatrixXcd to_dense(const PauliSum& sum);
Eigen::MatrixXcd to_dense(const PauliTerm& term);

/// c_P = Tr(P m) / 2^n for every P with |c_P| > prune. Throws on non-Hermitian
/// input or a size that is not 2^n.
PauliSum decompose_dense(const Eigen::MatrixXcd& m, int num_qubits, double prune = 0.0,
                         double hermiticity_tolerance = 1e-10);

}  // namespace tnpqc

#endif  // TNPQC_PAULI_HPP
