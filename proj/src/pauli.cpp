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

#include "tnpqc/pauli.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace tnpqc {
namespace {

std::uint64_t low_mask(int n) { return n >= 64 ? ~0ULL : ((1ULL << n) - 1); }

void check_qubits(int n) {
  if (n < 0 || n > kMaxPauliQubits) {
    throw std::invalid_argument("PauliTerm: qubit count " + std::to_string(n) +
                                " outside [0, 64]");
  }
}

}  // namespace

PauliTerm::PauliTerm(int num_qubits, std::uint64_t x_bits, std::uint64_t z_bits)
    : n_(num_qubits), x_(x_bits), z_(z_bits) {
  check_qubits(num_qubits);
  if ((x_bits | z_bits) & ~low_mask(num_qubits)) {
    throw std::invalid_argument("PauliTerm: bits set beyond qubit count");
  }
}

PauliTerm PauliTerm::identity(int num_qubits) { return PauliTerm(num_qubits, 0, 0); }

PauliTerm PauliTerm::single(int num_qubits, int site, char op) {
  if (site < 0 || site >= num_qubits) {
    throw std::out_of_range("PauliTerm::single: site out of range");
  }
  const std::uint64_t bit = 1ULL << site;
  switch (op) {
    case 'I': return PauliTerm(num_qubits, 0, 0);
    case 'X': return PauliTerm(num_qubits, bit, 0);
    case 'Y': return PauliTerm(num_qubits, bit, bit);
    case 'Z': return PauliTerm(num_qubits, 0, bit);
    default: throw std::invalid_argument(std::string("PauliTerm::single: bad operator ") + op);
  }
}

PauliTerm PauliTerm::parse(std::string_view text) {
  const int n = static_cast<int>(text.size());
  if (n == 0) throw std::invalid_argument("PauliTerm::parse: empty string");
  check_qubits(n);
  std::uint64_t x = 0, z = 0;
  for (int i = 0; i < n; ++i) {
    const std::uint64_t bit = 1ULL << i;
    switch (text[i]) {
      case 'I': case '_': break;
      case 'X': x |= bit; break;
      case 'Y': x |= bit; z |= bit; break;
      case 'Z': z |= bit; break;
      default:
        throw std::invalid_argument("PauliTerm::parse: unexpected character '" +
                                    std::string(1, text[i]) + "'");
    }
  }
  return PauliTerm(n, x, z);
}

char PauliTerm::at(int site) const {
  const bool x = (x_ >> site) & 1;
  const bool z = (z_ >> site) & 1;
  return x ? (z ? 'Y' : 'X') : (z ? 'Z' : 'I');
}

std::string PauliTerm::to_string() const {
  std::string s(n_, 'I');
  for (int i = 0; i < n_; ++i) s[i] = at(i);
  return s;
}

std::complex<double> to_complex(Phase phase) {
  switch (phase) {
    case Phase::kPlusOne: return {1.0, 0.0};
    case Phase::kPlusI: return {0.0, 1.0};
    case Phase::kMinusOne: return {-1.0, 0.0};
    case Phase::kMinusI: return {0.0, -1.0};
  }
  return {1.0, 0.0};
}

PhasedPauli mul(const PauliTerm& a, const PauliTerm& b) {
  if (a.num_qubits() != b.num_qubits()) {
    throw std::invalid_argument("mul: qubit count mismatch");
  }
  // P(x,z) = i^{x.z} X^x Z^z, and Z^z1 X^x2 = (-1)^{z1.x2} X^x2 Z^z1.
  const std::uint64_t x = a.x_bits() ^ b.x_bits();
  const std::uint64_t z = a.z_bits() ^ b.z_bits();
  int k = std::popcount(a.x_bits() & a.z_bits()) + std::popcount(b.x_bits() & b.z_bits()) -
          std::popcount(x & z) + 2 * std::popcount(a.z_bits() & b.x_bits());
  k = ((k % 4) + 4) % 4;
  return {static_cast<Phase>(k), PauliTerm(a.num_qubits(), x, z)};
}

int neighboring_width(const PauliTerm& p) {
  const std::uint64_t s = p.support();
  if (s == 0) return 0;
  const int lo = std::countr_zero(s);
  const int hi = 63 - std::countl_zero(s);
  return hi - lo + 1;
}

int lattice_width(const PauliTerm& p, int rows, int cols) {
  if (rows * cols != p.num_qubits()) {
    throw std::invalid_argument("lattice_width: rows*cols must equal the qubit count");
  }
  std::uint64_t s = p.support();
  if (s == 0) return 0;
  int rmin = rows, rmax = -1, cmin = cols, cmax = -1;
  while (s) {
    const int site = std::countr_zero(s);
    s &= s - 1;
    const int r = site / cols, c = site % cols;
    rmin = std::min(rmin, r);
    rmax = std::max(rmax, r);
    cmin = std::min(cmin, c);
    cmax = std::max(cmax, c);
  }
  return std::max(rmax - rmin + 1, cmax - cmin + 1);
}

PauliSum PauliSum::from_entries(int num_qubits, std::vector<Entry> entries, double prune) {
  check_qubits(num_qubits);
  for (const auto& e : entries) {
    if (e.term.num_qubits() != num_qubits) {
      throw std::invalid_argument("PauliSum: term qubit count mismatch");
    }
  }
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.term < b.term; });
  PauliSum out(num_qubits);
  out.terms_.reserve(entries.size());
  for (auto& e : entries) {
    if (!out.terms_.empty() && out.terms_.back().term == e.term) {
      out.terms_.back().coefficient += e.coefficient;
    } else {
      out.terms_.push_back(e);
    }
  }
  std::erase_if(out.terms_, [prune](const Entry& e) { return std::abs(e.coefficient) <= prune; });
  return out;
}

double PauliSum::coefficient(const PauliTerm& term) const {
  auto it = std::lower_bound(terms_.begin(), terms_.end(), term,
                             [](const Entry& e, const PauliTerm& t) { return e.term < t; });
  return (it != terms_.end() && it->term == term) ? it->coefficient : 0.0;
}

double PauliSum::norm_squared() const {
  double total = 0.0;
  for (const auto& e : terms_) total += e.coefficient * e.coefficient;
  return total;
}

int PauliSum::max_neighboring_width() const {
  int w = 0;
  for (const auto& e : terms_) w = std::max(w, neighboring_width(e.term));
  return w;
}

PauliSum PauliSum::scaled(double factor) const {
  std::vector<Entry> entries(terms_.begin(), terms_.end());
  for (auto& e : entries) e.coefficient *= factor;
  return from_entries(n_, std::move(entries));
}

PauliSum operator+(const PauliSum& a, const PauliSum& b) {
  if (a.n_ != b.n_) throw std::invalid_argument("PauliSum: qubit count mismatch");
  std::vector<PauliSum::Entry> entries(a.terms_.begin(), a.terms_.end());
  entries.insert(entries.end(), b.terms_.begin(), b.terms_.end());
  return PauliSum::from_entries(a.n_, std::move(entries));
}

PauliSum operator-(const PauliSum& a, const PauliSum& b) { return a + b.scaled(-1.0); }

std::string PauliSum::to_string() const {
  std::ostringstream os;
  os.precision(17);
  for (const auto& e : terms_) os << e.coefficient << " " << e.term.to_string() << "\n";
  return os.str();
}

PauliAccumulator::PauliAccumulator(int num_qubits, std::size_t reserve) : n_(num_qubits) {
  check_qubits(num_qubits);
  if (reserve) terms_.reserve(reserve);
}

void PauliAccumulator::add(const PauliTerm& term, double coefficient) {
  if (coefficient == 0.0) return;
  terms_[term] += coefficient;
}

void PauliAccumulator::add(const PauliSum& sum, double scale) {
  if (sum.num_qubits() != n_) throw std::invalid_argument("PauliAccumulator: qubit count mismatch");
  for (const auto& e : sum) add(e.term, scale * e.coefficient);
}

PauliSum PauliAccumulator::finish(double prune) && {
  std::vector<PauliSum::Entry> entries;
  entries.reserve(terms_.size());
  for (const auto& [term, c] : terms_) entries.push_back({term, c});
  terms_.clear();
  return PauliSum::from_entries(n_, std::move(entries), prune);
}

namespace {

void check_dense(int n) {
  if (n < 0 || n > kMaxDenseQubits) {
    throw std::invalid_argument("dense materialization limited to n <= 12 (got " +
                                std::to_string(n) + ")");
  }
}

// P|k> = i^{|x&z|} (-1)^{|z&k|} |k ^ x>.
void add_term(Eigen::MatrixXcd& m, const PauliTerm& p, std::complex<double> c) {
  const std::uint64_t dim = 1ULL << p.num_qubits();
  const std::complex<double> base = c * to_complex(static_cast<Phase>(p.y_count() % 4));
  for (std::uint64_t k = 0; k < dim; ++k) {
    const double sign = (std::popcount(p.z_bits() & k) & 1) ? -1.0 : 1.0;
    m(static_cast<Eigen::Index>(k ^ p.x_bits()), static_cast<Eigen::Index>(k)) += sign * base;
  }
}

}  // namespace

Eigen::MatrixXcd to_dense(const PauliTerm& term) {
  check_dense(term.num_qubits());
  const auto dim = static_cast<Eigen::Index>(1ULL << term.num_qubits());
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  add_term(m, term, 1.0);
  return m;
}

Eigen::MatrixXcd to_dense(const PauliSum& sum) {
  check_dense(sum.num_qubits());
  const auto dim = static_cast<Eigen::Index>(1ULL << sum.num_qubits());
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& e : sum) add_term(m, e.term, e.coefficient);
  return m;
}

PauliSum decompose_dense(const Eigen::MatrixXcd& m, int num_qubits, double prune,
                         double hermiticity_tolerance) {
  check_dense(num_qubits);
  const std::uint64_t dim = 1ULL << num_qubits;
  if (static_cast<std::uint64_t>(m.rows()) != dim || static_cast<std::uint64_t>(m.cols()) != dim) {
    throw std::invalid_argument("decompose_dense: matrix is not 2^n x 2^n");
  }
  const double residue = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (residue > hermiticity_tolerance) {
    throw std::invalid_argument("decompose_dense: non-Hermitian input (anti-Hermitian residue " +
                                std::to_string(residue) + ")");
  }
  std::vector<PauliSum::Entry> entries;
  for (std::uint64_t x = 0; x < dim; ++x) {
    for (std::uint64_t z = 0; z < dim; ++z) {
      // Tr(P m) = sum_j P_{j^x,j} m_{j,j^x}.
      const PauliTerm p(num_qubits, x, z);
      const std::complex<double> base = to_complex(static_cast<Phase>(p.y_count() % 4));
      std::complex<double> trace = 0.0;
      for (std::uint64_t j = 0; j < dim; ++j) {
        const double sign = (std::popcount(z & j) & 1) ? -1.0 : 1.0;
        trace += sign * m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j ^ x));
      }
      const double c = (base * trace).real() / static_cast<double>(dim);
      if (std::abs(c) > prune) entries.push_back({p, c});
    }
  }
  return PauliSum::from_entries(num_qubits, std::move(entries), prune);
}

}  // namespace tnpqc
