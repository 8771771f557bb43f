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

#include "tnpqc/tn_rotation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace tnpqc {
namespace {

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

int log2_exact(int v) { return std::countr_zero(static_cast<unsigned>(v)); }

// Generator k of a block on (a, b): XX, YY, ZZ for k = 0, 1, 2.
PauliTerm generator(int n, const Block& block, int k) {
  const std::uint64_t mask = (1ULL << block.site_a) | (1ULL << block.site_b);
  switch (k) {
    case 0: return PauliTerm(n, mask, 0);
    case 1: return PauliTerm(n, mask, mask);
    default: return PauliTerm(n, 0, mask);
  }
}

// i * phase for an anticommuting product, which is always real.
double real_of_i_times(Phase phase) { return phase == Phase::kPlusI ? -1.0 : 1.0; }

struct Weighted {
  PauliTerm term;
  double coefficient;
};

// Conjugates every entry of `items` by exp(i angle G) in place (appending split terms).
void conjugate_by_generator(std::vector<Weighted>& items, const PauliTerm& g, double angle) {
  if (angle == 0.0) return;
  const double c = std::cos(2.0 * angle);
  const double s = std::sin(2.0 * angle);
  const std::size_t count = items.size();
  for (std::size_t i = 0; i < count; ++i) {
    if (items[i].term.commutes_with(g)) continue;
    const PhasedPauli pg = mul(items[i].term, g);
    const double coefficient = items[i].coefficient;
    items[i].coefficient = coefficient * c;
    if (s != 0.0) items.push_back({pg.term, coefficient * s * real_of_i_times(pg.phase)});
  }
}

void check_theta(const TnLayout& layout, std::span<const double> theta) {
  if (theta.size() != layout.num_parameters()) {
    throw std::invalid_argument("theta has " + std::to_string(theta.size()) + " entries, layout needs " +
                                std::to_string(layout.num_parameters()));
  }
}

// Blocks of one layer indexed by their position in layout.blocks.
struct LayerView {
  std::vector<std::size_t> block_indices;
  std::uint64_t mask = 0;
};

std::vector<LayerView> layer_views(const TnLayout& layout) {
  std::vector<LayerView> views;
  int current = -1;
  for (std::size_t i = 0; i < layout.blocks.size(); ++i) {
    const Block& b = layout.blocks[i];
    if (views.empty() || b.layer != current) {
      views.push_back({});
      current = b.layer;
    }
    const std::uint64_t m = (1ULL << b.site_a) | (1ULL << b.site_b);
    if (views.back().mask & m) {
      // Overlapping blocks within a layer do not commute; give them their own layer.
      views.push_back({});
    }
    views.back().block_indices.push_back(i);
    views.back().mask |= m;
  }
  return views;
}

// Conjugates `sum` by every block of one layer; blocks in a layer are disjoint
// and therefore commute.
PauliSum propagate_layer(const PauliSum& sum, const TnLayout& layout, const LayerView& view,
                         std::span<const double> theta, double prune) {
  PauliAccumulator acc(sum.num_qubits(), sum.size() * 2);
  std::vector<Weighted> items;
  const int n = sum.num_qubits();
  for (const auto& e : sum) {
    if ((e.term.support() & view.mask) == 0) {
      acc.add(e.term, e.coefficient);
      continue;
    }
    items.clear();
    items.push_back({e.term, e.coefficient});
    for (auto it = view.block_indices.rbegin(); it != view.block_indices.rend(); ++it) {
      const Block& b = layout.blocks[*it];
      const std::uint64_t m = (1ULL << b.site_a) | (1ULL << b.site_b);
      if ((e.term.support() & m) == 0) continue;
      for (int k = 0; k < 3; ++k) conjugate_by_generator(items, generator(n, b, k), theta[3 * *it + k]);
    }
    for (const auto& w : items) acc.add(w.term, w.coefficient);
  }
  return std::move(acc).finish(prune);
}

// i [A, G] term by term: anticommuting terms pick up 2 i (A G).
PauliSum commutator_with(const PauliSum& a, const PauliTerm& g, double prune) {
  PauliAccumulator acc(a.num_qubits());
  for (const auto& e : a) {
    if (e.term.commutes_with(g)) continue;
    const PhasedPauli p = mul(e.term, g);
    acc.add(p.term, 2.0 * e.coefficient * real_of_i_times(p.phase));
  }
  return std::move(acc).finish(prune);
}

void check_rotation_inputs(const PauliSum& h, const TnLayout& layout, std::span<const double> theta) {
  if (h.num_qubits() != layout.n) {
    throw std::invalid_argument("rotate: Hamiltonian has " + std::to_string(h.num_qubits()) +
                                " qubits, layout has " + std::to_string(layout.n));
  }
  check_theta(layout, theta);
}

void apply_block_to_columns(Eigen::MatrixXcd& m, int a, int b, const Eigen::Matrix4cd& u) {
  const Eigen::Index dim = m.rows();
  const std::uint64_t ba = 1ULL << a, bb = 1ULL << b;
  for (Eigen::Index col = 0; col < m.cols(); ++col) {
    for (std::uint64_t k = 0; k < static_cast<std::uint64_t>(dim); ++k) {
      if (k & (ba | bb)) continue;
      const std::uint64_t idx[4] = {k, k | bb, k | ba, k | ba | bb};
      std::complex<double> v[4];
      for (int r = 0; r < 4; ++r) v[r] = m(static_cast<Eigen::Index>(idx[r]), col);
      for (int r = 0; r < 4; ++r) {
        std::complex<double> acc = 0.0;
        for (int c = 0; c < 4; ++c) acc += u(r, c) * v[c];
        m(static_cast<Eigen::Index>(idx[r]), col) = acc;
      }
    }
  }
}

}  // namespace

std::string to_string(LayoutKind kind) {
  switch (kind) {
    case LayoutKind::kUmpo1d: return "umpo1d";
    case LayoutKind::kUttn1d: return "uttn1d";
    case LayoutKind::kUmpo2d: return "umpo2d";
    case LayoutKind::kUttn2d: return "uttn2d";
  }
  return "unknown";
}

LayoutKind layout_kind_from_string(const std::string& name) {
  if (name == "umpo1d") return LayoutKind::kUmpo1d;
  if (name == "uttn1d") return LayoutKind::kUttn1d;
  if (name == "umpo2d") return LayoutKind::kUmpo2d;
  if (name == "uttn2d") return LayoutKind::kUttn2d;
  throw std::invalid_argument("unknown layout kind '" + name + "'");
}

std::vector<std::vector<Block>> TnLayout::by_layer() const {
  std::vector<std::vector<Block>> out;
  for (const auto& b : blocks) {
    if (out.empty() || out.back().front().layer != b.layer) out.emplace_back();
    out.back().push_back(b);
  }
  return out;
}

TnLayout layout_umpo_1d(int n, int layers) {
  if (n < 2) throw std::invalid_argument("layout_umpo_1d: n must be >= 2");
  if (layers < 1) throw std::invalid_argument("layout_umpo_1d: layers must be >= 1");
  TnLayout out{n, LayoutKind::kUmpo1d, layers, 0, 0, {}};
  for (int layer = 1; layer <= layers; ++layer) {
    const int offset = (layer % 2 == 1) ? 0 : 1;
    for (int a = offset; a + 1 < n; a += 2) out.blocks.push_back({layer, a, a + 1});
  }
  return out;
}

TnLayout layout_uttn_1d(int n) {
  if (n < 2 || !is_power_of_two(n)) {
    throw std::invalid_argument("layout_uttn_1d: n must be a power of two >= 2 (got " +
                                std::to_string(n) + ")");
  }
  const int layers = log2_exact(n);
  TnLayout out{n, LayoutKind::kUttn1d, layers, 0, 0, {}};
  for (int layer = 1; layer <= layers; ++layer) {
    const int spacing = 1 << (layer - 1);
    // Representatives after layer-1 coarse-graining are sites spacing-1, 2*spacing-1, ...
    for (int a = spacing - 1; a + spacing < n; a += 2 * spacing) {
      out.blocks.push_back({layer, a, a + spacing});
    }
  }
  return out;
}

TnLayout layout_umpo_2d(int rows, int cols, int layers) {
  if (rows < 2 || cols < 2) throw std::invalid_argument("layout_umpo_2d: rows and cols must be >= 2");
  if (layers < 1) throw std::invalid_argument("layout_umpo_2d: layers must be >= 1");
  TnLayout out{rows * cols, LayoutKind::kUmpo2d, layers, rows, cols, {}};
  for (int layer = 1; layer <= layers; ++layer) {
    const bool along_rows = (layer % 2 == 1);
    const int offset = ((layer - 1) / 2) % 2;
    if (along_rows) {
      for (int r = 0; r < rows; ++r) {
        for (int c = offset; c + 1 < cols; c += 2) {
          out.blocks.push_back({layer, r * cols + c, r * cols + c + 1});
        }
      }
    } else {
      for (int c = 0; c < cols; ++c) {
        for (int r = offset; r + 1 < rows; r += 2) {
          out.blocks.push_back({layer, r * cols + c, (r + 1) * cols + c});
        }
      }
    }
  }
  // Keep blocks layer-major and left-to-right by first site.
  std::stable_sort(out.blocks.begin(), out.blocks.end(), [](const Block& a, const Block& b) {
    return a.layer != b.layer ? a.layer < b.layer : a.site_a < b.site_a;
  });
  return out;
}

TnLayout layout_uttn_2d(int rows, int cols) {
  if (rows < 2 || cols < 2) throw std::invalid_argument("layout_uttn_2d: rows and cols must be >= 2");
  if (!is_power_of_two(rows * cols)) {
    throw std::invalid_argument("layout_uttn_2d: rows*cols must be a power of two");
  }
  TnLayout out{rows * cols, LayoutKind::kUttn2d, 0, rows, cols, {}};
  // Representative rows/columns still carried upward.
  std::vector<int> live_rows(rows), live_cols(cols);
  for (int r = 0; r < rows; ++r) live_rows[r] = r;
  for (int c = 0; c < cols; ++c) live_cols[c] = c;
  bool along_rows = true;
  int layer = 0;
  while (live_rows.size() > 1 || live_cols.size() > 1) {
    if (along_rows && live_cols.size() == 1) along_rows = false;
    if (!along_rows && live_rows.size() == 1) along_rows = true;
    ++layer;
    if (along_rows) {
      std::vector<int> kept;
      for (int r : live_rows) {
        for (std::size_t i = 0; i + 1 < live_cols.size(); i += 2) {
          out.blocks.push_back({layer, r * cols + live_cols[i], r * cols + live_cols[i + 1]});
        }
      }
      for (std::size_t i = 1; i < live_cols.size(); i += 2) kept.push_back(live_cols[i]);
      live_cols = kept;
    } else {
      std::vector<int> kept;
      for (int c : live_cols) {
        for (std::size_t i = 0; i + 1 < live_rows.size(); i += 2) {
          out.blocks.push_back({layer, live_rows[i] * cols + c, live_rows[i + 1] * cols + c});
        }
      }
      for (std::size_t i = 1; i < live_rows.size(); i += 2) kept.push_back(live_rows[i]);
      live_rows = kept;
    }
    along_rows = !along_rows;
  }
  out.layers = layer;
  std::stable_sort(out.blocks.begin(), out.blocks.end(), [](const Block& a, const Block& b) {
    return a.layer != b.layer ? a.layer < b.layer : a.site_a < b.site_a;
  });
  return out;
}

TnLayout concatenate(const TnLayout& first, const TnLayout& second) {
  if (first.n != second.n) throw std::invalid_argument("concatenate: qubit count mismatch");
  TnLayout out = first;
  out.layers = first.layers + second.layers;
  for (Block b : second.blocks) {
    b.layer += first.layers;
    out.blocks.push_back(b);
  }
  return out;
}

Eigen::Matrix4cd block_unitary(double t1, double t2, double t3) {
  Eigen::Matrix2cd X, Y, Z;
  X << 0, 1, 1, 0;
  Y << 0, std::complex<double>(0, -1), std::complex<double>(0, 1), 0;
  Z << 1, 0, 0, -1;
  auto kron = [](const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
    Eigen::Matrix4cd out;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return out;
  };
  const std::complex<double> i(0.0, 1.0);
  const Eigen::Matrix4cd id = Eigen::Matrix4cd::Identity();
  // Each generator squares to the identity and all three commute.
  const Eigen::Matrix4cd ex = std::cos(t1) * id + i * std::sin(t1) * kron(X, X);
  const Eigen::Matrix4cd ey = std::cos(t2) * id + i * std::sin(t2) * kron(Y, Y);
  const Eigen::Matrix4cd ez = std::cos(t3) * id + i * std::sin(t3) * kron(Z, Z);
  return ex * ey * ez;
}

Eigen::MatrixXcd network_unitary(const TnLayout& layout, std::span<const double> theta) {
  check_theta(layout, theta);
  if (layout.n > kMaxDenseQubits) throw std::invalid_argument("network_unitary: n must be <= 12");
  const auto dim = static_cast<Eigen::Index>(1ULL << layout.n);
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(dim, dim);
  for (std::size_t j = 0; j < layout.blocks.size(); ++j) {
    const Block& b = layout.blocks[j];
    apply_block_to_columns(u, b.site_a, b.site_b,
                           block_unitary(theta[3 * j], theta[3 * j + 1], theta[3 * j + 2]));
  }
  return u;
}

PauliSum conjugate_term(const PauliTerm& p, double coefficient, const Block& block,
                        const std::array<double, 3>& angles) {
  const int n = p.num_qubits();
  if (block.site_a == block.site_b || block.site_a < 0 || block.site_b < 0 || block.site_a >= n ||
      block.site_b >= n) {
    throw std::invalid_argument("conjugate_term: invalid block sites");
  }
  std::vector<Weighted> items{{p, coefficient}};
  for (int k = 0; k < 3; ++k) conjugate_by_generator(items, generator(n, block, k), angles[k]);
  PauliAccumulator acc(n);
  for (const auto& w : items) acc.add(w.term, w.coefficient);
  return std::move(acc).finish();
}

RotatedHamiltonian rotate_hamiltonian(const PauliSum& h, const TnLayout& layout,
                                      std::span<const double> theta, double prune) {
  check_rotation_inputs(h, layout, theta);
  const auto views = layer_views(layout);
  PauliSum current = h;
  for (auto it = views.rbegin(); it != views.rend(); ++it) {
    current = propagate_layer(current, layout, *it, theta, prune);
  }
  return {std::move(current), layout, std::vector<double>(theta.begin(), theta.end()), prune};
}

namespace {

// Shared driver: visits dH/dtheta_k for every requested k.
template <typename Visit>
void for_each_gradient(const PauliSum& h, const TnLayout& layout, std::span<const double> theta,
                       double prune, const std::vector<bool>& wanted, Visit&& visit) {
  check_rotation_inputs(h, layout, theta);
  const auto views = layer_views(layout);
  PauliSum current = h;
  for (std::size_t v = views.size(); v-- > 0;) {
    current = propagate_layer(current, layout, views[v], theta, prune);
    for (std::size_t j : views[v].block_indices) {
      for (int k = 0; k < 3; ++k) {
        const std::size_t index = 3 * j + static_cast<std::size_t>(k);
        if (!wanted[index]) continue;
        PauliSum d = commutator_with(current, generator(layout.n, layout.blocks[j], k), prune);
        for (std::size_t w = v; w-- > 0;) d = propagate_layer(d, layout, views[w], theta, prune);
        visit(index, std::move(d));
      }
    }
  }
}

}  // namespace

std::vector<PauliSum> coefficient_gradients(const PauliSum& h, const TnLayout& layout,
                                            std::span<const double> theta, double prune) {
  std::vector<PauliSum> out(layout.num_parameters(), PauliSum(h.num_qubits()));
  std::vector<bool> wanted(layout.num_parameters(), true);
  for_each_gradient(h, layout, theta, prune, wanted,
                    [&out](std::size_t k, PauliSum d) { out[k] = std::move(d); });
  return out;
}

PauliSum coefficient_gradient(const PauliSum& h, const TnLayout& layout, std::span<const double> theta,
                              std::size_t index, double prune) {
  if (index >= layout.num_parameters()) throw std::out_of_range("coefficient_gradient: index out of range");
  std::vector<bool> wanted(layout.num_parameters(), false);
  wanted[index] = true;
  PauliSum out(h.num_qubits());
  for_each_gradient(h, layout, theta, prune, wanted, [&out](std::size_t, PauliSum d) { out = std::move(d); });
  return out;
}

StringStatistics string_statistics(const RotatedHamiltonian& r) {
  StringStatistics stats;
  stats.term_count = r.sum.size();
  for (const auto& e : r.sum) {
    const int w = neighboring_width(e.term);
    stats.max_width = std::max(stats.max_width, w);
    ++stats.width_histogram[w];
  }
  return stats;
}

nlohmann::json to_json(const TnLayout& layout) {
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : layout.blocks) blocks.push_back({b.layer, b.site_a, b.site_b});
  return {{"n", layout.n},           {"kind", to_string(layout.kind)}, {"layers", layout.layers},
          {"rows", layout.rows},     {"cols", layout.cols},            {"blocks", blocks}};
}

TnLayout layout_from_json(const nlohmann::json& j) {
  TnLayout out;
  out.n = j.at("n").get<int>();
  out.kind = layout_kind_from_string(j.at("kind").get<std::string>());
  out.layers = j.at("layers").get<int>();
  out.rows = j.value("rows", 0);
  out.cols = j.value("cols", 0);
  for (const auto& b : j.at("blocks")) {
    out.blocks.push_back({b.at(0).get<int>(), b.at(1).get<int>(), b.at(2).get<int>()});
  }
  return out;
}

nlohmann::json to_json(const RotatedHamiltonian& r) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& e : r.sum) terms.push_back({{"pauli", e.term.to_string()}, {"coefficient", e.coefficient}});
  return {{"n", r.sum.num_qubits()},
          {"layout", to_json(r.layout)},
          {"theta", r.theta},
          {"prune", r.prune},
          {"term_count", r.term_count()},
          {"max_width", r.max_width()},
          {"terms", terms}};
}

RotatedHamiltonian rotated_from_json(const nlohmann::json& j) {
  const int n = j.at("n").get<int>();
  std::vector<PauliSum::Entry> entries;
  for (const auto& t : j.at("terms")) {
    entries.push_back({PauliTerm::parse(t.at("pauli").get<std::string>()), t.at("coefficient").get<double>()});
  }
  RotatedHamiltonian r;
  r.sum = PauliSum::from_entries(n, std::move(entries));
  r.layout = layout_from_json(j.at("layout"));
  r.theta = j.at("theta").get<std::vector<double>>();
  r.prune = j.at("prune").get<double>();
  return r;
}

}  // namespace tnpqc
