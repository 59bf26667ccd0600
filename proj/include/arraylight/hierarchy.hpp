// Copyright 2026 The arraylight Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>

#include <array>
#include <span>
#include <utility>
#include <vector>

#include "arraylight/core.hpp"

namespace arraylight {

/// Index of j in {-1, 0, +1} within a 3-slot axis.
constexpr int jslot(int j) noexcept { return j + 1; }

/// Offsets of singles, pairs and triples inside the flat hierarchy vector.
///
/// Pairs are keyed by n < m in colex order, triples by n < m < p; each key owns
/// 9 (27) consecutive slots indexed by the j values in atom order.
struct HierarchyLayout {
  int n_atoms = 0;
  int order = 1;
  Eigen::Index pair_count = 0;
  Eigen::Index triple_count = 0;
  Eigen::Index pairs_begin = 0;
  Eigen::Index triples_begin = 0;
  Eigen::Index size = 0;

  HierarchyLayout() = default;
  HierarchyLayout(int n_atoms, int order);

  Eigen::Index single_offset(int n) const noexcept { return 3 * n; }
  Eigen::Index pair_offset(int n, int m) const noexcept {
    return pairs_begin + 9 * (Eigen::Index{m} * (m - 1) / 2 + n);
  }
  Eigen::Index triple_offset(int n, int m, int p) const noexcept {
    return triples_begin +
           27 * (Eigen::Index{p} * (p - 1) * (p - 2) / 6 + Eigen::Index{m} * (m - 1) / 2 + n);
  }
};

/// Read access to a flat hierarchy vector with transposing accessors.
class HierarchyView {
 public:
  HierarchyView(const HierarchyLayout& layout, const cplx* data) noexcept : layout_(&layout), data_(data) {}

  cplx single(int n, int j) const noexcept { return data_[layout_->single_offset(n) + jslot(j)]; }

  /// <Q_n^a Q_m^b> for any n != m (order >= 2).
  cplx pair(int n, int a, int m, int b) const noexcept {
    return n < m ? data_[layout_->pair_offset(n, m) + 3 * jslot(a) + jslot(b)]
                 : data_[layout_->pair_offset(m, n) + 3 * jslot(b) + jslot(a)];
  }

  /// <Q_n^a Q_m^b Q_p^c> for distinct atoms in any order (order 3).
  cplx triple(int n, int a, int m, int b, int p, int c) const noexcept {
    if (n > m) {
      std::swap(n, m);
      std::swap(a, b);
    }
    if (m > p) {
      std::swap(m, p);
      std::swap(b, c);
    }
    if (n > m) {
      std::swap(n, m);
      std::swap(a, b);
    }
    return data_[layout_->triple_offset(n, m, p) + 9 * jslot(a) + 3 * jslot(b) + jslot(c)];
  }

 private:
  const HierarchyLayout* layout_;
  const cplx* data_;
};

/// Truncated hierarchy of expectation values up to `order` operators.
///
/// singles <Q_n^j>, pairs <Q_n^j Q_m^j'> for n < m and triples for n < m < p
/// live in one flat vector so the integrator can treat the state as a plain
/// Eigen vector. Both sigma+ and sigma- slots are stored; their conjugate
/// relation is checked, never assumed. Other atom orders are served by the
/// accessors through transposition.
class HierarchyState {
 public:
  HierarchyState(int n_atoms, int order);

  int n_atoms() const noexcept { return layout_.n_atoms; }
  int order() const noexcept { return layout_.order; }
  const HierarchyLayout& layout() const noexcept { return layout_; }
  HierarchyView view() const noexcept { return HierarchyView(layout_, values_.data()); }

  Eigen::VectorXcd& values() noexcept { return values_; }
  const Eigen::VectorXcd& values() const noexcept { return values_; }

  Eigen::Index pair_offset(int n, int m) const noexcept { return layout_.pair_offset(n, m); }
  Eigen::Index triple_offset(int n, int m, int p) const noexcept { return layout_.triple_offset(n, m, p); }

  cplx single(int n, int j) const noexcept { return values_(layout_.single_offset(n) + jslot(j)); }
  cplx& single(int n, int j) noexcept { return values_(layout_.single_offset(n) + jslot(j)); }

  cplx pair(int n, int a, int m, int b) const noexcept { return view().pair(n, a, m, b); }
  cplx triple(int n, int a, int m, int b, int p, int c) const noexcept { return view().triple(n, a, m, b, p, c); }

  /// Stored value for distinct atoms, any order, length <= order.
  cplx stored(std::span<const int> atoms, std::span<const int> js) const;

 private:
  HierarchyLayout layout_;
  Eigen::VectorXcd values_;
};

/// Expectation of up to five operators on distinct atoms.
///
/// Values within the truncation order are read from the state. Longer
/// products are rebuilt by setting every cumulant above the order to zero:
/// pairs at order 1 factorize, triples at order 2 use the three-operator
/// cumulant rule, quadruples at order 3 the four-operator rule. Five-operator
/// values at order 3 (and four at order 2) reuse the same rule with the
/// intermediate above-order moments closed recursively.
cplx get_expectation(const HierarchyState& state, std::span<const int> atoms, std::span<const int> js);

/// Sum over set partitions of k <= 5 items, excluding the single block, of
/// coef(|pi|) * prod_B moment(B), coef(b) = (-1)^b (b-1)!. `moment` maps a
/// bit mask of items to the moment of that subset. This is the value of the
/// full moment that makes the k-th cumulant vanish.
template <class Moment>
cplx vanishing_cumulant_moment(int k, Moment&& moment);

HierarchyState initial_ground(int n_atoms, int order);
HierarchyState initial_all_excited(int n_atoms, int order);

/// Hierarchy state holding exact expectations of a density-matrix-like source.
/// `expect(atoms, js)` must return the full expectation value.
template <class Expect>
HierarchyState hierarchy_from(int n_atoms, int order, Expect&& expect);

/// Largest |<X> - conj(<X with every j negated>)| over the stored entries.
double conjugation_defect(const HierarchyState& state);

namespace detail {

struct PartitionTable {
  // For each k in 1..5: list of partitions (as block masks) excluding the
  // single-block partition.
  std::array<std::vector<std::vector<unsigned>>, 6> partitions;
};

const PartitionTable& partition_table();

inline double partition_coefficient(std::size_t blocks) {
  // (-1)^b (b - 1)!
  double f = 1.0;
  for (std::size_t i = 2; i < blocks; ++i) f *= static_cast<double>(i);
  return (blocks % 2 == 0) ? f : -f;
}

}  // namespace detail

template <class Moment>
cplx vanishing_cumulant_moment(int k, Moment&& moment) {
  cplx total = 0.0;
  for (const auto& blocks : detail::partition_table().partitions[static_cast<std::size_t>(k)]) {
    cplx product = detail::partition_coefficient(blocks.size());
    for (unsigned mask : blocks) product *= moment(mask);
    total += product;
  }
  return total;
}

template <class Expect>
HierarchyState hierarchy_from(int n_atoms, int order, Expect&& expect) {
  HierarchyState s(n_atoms, order);
  for (int n = 0; n < n_atoms; ++n)
    for (int a = -1; a <= 1; ++a) {
      const int atoms[1] = {n};
      const int js[1] = {a};
      s.single(n, a) = expect(std::span<const int>(atoms), std::span<const int>(js));
    }
  if (order >= 2) {
    for (int m = 1; m < n_atoms; ++m)
      for (int n = 0; n < m; ++n)
        for (int a = -1; a <= 1; ++a)
          for (int b = -1; b <= 1; ++b) {
            const int atoms[2] = {n, m};
            const int js[2] = {a, b};
            s.values()(s.pair_offset(n, m) + 3 * jslot(a) + jslot(b)) =
                expect(std::span<const int>(atoms), std::span<const int>(js));
          }
  }
  if (order >= 3) {
    for (int p = 2; p < n_atoms; ++p)
      for (int m = 1; m < p; ++m)
        for (int n = 0; n < m; ++n)
          for (int a = -1; a <= 1; ++a)
            for (int b = -1; b <= 1; ++b)
              for (int c = -1; c <= 1; ++c) {
                const int atoms[3] = {n, m, p};
                const int js[3] = {a, b, c};
                s.values()(s.triple_offset(n, m, p) + 9 * jslot(a) + 3 * jslot(b) + jslot(c)) =
                    expect(std::span<const int>(atoms), std::span<const int>(js));
              }
  }
  return s;
}

}  // namespace arraylight
