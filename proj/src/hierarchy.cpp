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

#include "arraylight/hierarchy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <optional>
#include <utility>

#include "arraylight/errors.hpp"

namespace arraylight {

HierarchyLayout::HierarchyLayout(int n, int k) : n_atoms(n), order(k) {
  if (n < 1) fail(ErrorKind::InvalidArgument, "hierarchy needs at least one atom");
  if (k < 1 || k > 3) fail(ErrorKind::InvalidArgument, "hierarchy order must be 1, 2 or 3");
  const Eigen::Index atoms = n;
  pairs_begin = 3 * atoms;
  if (k >= 2) pair_count = atoms * (atoms - 1) / 2;
  triples_begin = pairs_begin + 9 * pair_count;
  if (k >= 3) triple_count = atoms * (atoms - 1) * (atoms - 2) / 6;
  size = triples_begin + 27 * triple_count;
}

HierarchyState::HierarchyState(int n_atoms, int order)
    : layout_(n_atoms, order), values_(Eigen::VectorXcd::Zero(layout_.size)) {}

cplx HierarchyState::stored(std::span<const int> atoms, std::span<const int> js) const {
  if (atoms.size() != js.size()) fail(ErrorKind::DimensionMismatch, "atoms and operator indices differ in length");
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (atoms[i] < 0 || atoms[i] >= n_atoms()) fail(ErrorKind::InvalidArgument, "atom index out of range");
    if (js[i] < -1 || js[i] > 1) fail(ErrorKind::InvalidArgument, "operator index must be -1, 0 or +1");
    for (std::size_t k = 0; k < i; ++k)
      if (atoms[k] == atoms[i]) fail(ErrorKind::InvalidArgument, "atoms in a product must be distinct");
  }
  if (static_cast<int>(atoms.size()) > order())
    fail(ErrorKind::InvalidArgument, "product longer than the stored order");
  switch (atoms.size()) {
    case 0:
      return 1.0;
    case 1:
      return single(atoms[0], js[0]);
    case 2:
      return pair(atoms[0], js[0], atoms[1], js[1]);
    default:
      return triple(atoms[0], js[0], atoms[1], js[1], atoms[2], js[2]);
  }
}

namespace detail {

namespace {

PartitionTable make_partition_table() {
  PartitionTable table;
  for (int k = 1; k <= 5; ++k) {
    // Restricted growth strings enumerate set partitions.
    std::vector<int> label(static_cast<std::size_t>(k), 0);
    while (true) {
      int blocks = *std::max_element(label.begin(), label.end()) + 1;
      if (blocks > 1) {
        std::vector<unsigned> masks(static_cast<std::size_t>(blocks), 0u);
        for (int i = 0; i < k; ++i) masks[static_cast<std::size_t>(label[i])] |= 1u << i;
        table.partitions[static_cast<std::size_t>(k)].push_back(std::move(masks));
      }
      int i = k - 1;
      for (; i > 0; --i) {
        int prefix_max = *std::max_element(label.begin(), label.begin() + i);
        if (label[i] <= prefix_max) {
          ++label[i];
          std::fill(label.begin() + i + 1, label.end(), 0);
          break;
        }
      }
      if (i == 0) break;
    }
  }
  return table;
}

}  // namespace

const PartitionTable& partition_table() {
  static const PartitionTable table = make_partition_table();
  return table;
}

}  // namespace detail

cplx get_expectation(const HierarchyState& state, std::span<const int> atoms, std::span<const int> js) {
  const int k = static_cast<int>(atoms.size());
  if (k > 5) fail(ErrorKind::InvalidArgument, "closure supports at most five operators");
  if (k <= state.order()) return state.stored(atoms, js);
  for (int i = 0; i < k; ++i)
    for (int l = 0; l < i; ++l)
      if (atoms[i] == atoms[l]) fail(ErrorKind::InvalidArgument, "atoms in a product must be distinct");
  if (atoms.size() != js.size()) fail(ErrorKind::DimensionMismatch, "atoms and operator indices differ in length");

  std::array<std::optional<cplx>, 32> memo;
  auto moment = [&](auto&& self, unsigned mask) -> cplx {
    if (memo[mask]) return *memo[mask];
    std::array<int, 5> idx{};
    int count = 0;
    for (int i = 0; i < k; ++i)
      if (mask & (1u << i)) idx[static_cast<std::size_t>(count++)] = i;
    cplx value;
    if (count <= state.order()) {
      std::array<int, 5> sub_atoms{}, sub_js{};
      for (int i = 0; i < count; ++i) {
        sub_atoms[static_cast<std::size_t>(i)] = atoms[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
        sub_js[static_cast<std::size_t>(i)] = js[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
      }
      value = state.stored(std::span<const int>(sub_atoms.data(), static_cast<std::size_t>(count)),
                           std::span<const int>(sub_js.data(), static_cast<std::size_t>(count)));
    } else {
      value = vanishing_cumulant_moment(count, [&](unsigned local) {
        unsigned global = 0;
        for (int i = 0; i < count; ++i)
          if (local & (1u << i)) global |= 1u << idx[static_cast<std::size_t>(i)];
        return self(self, global);
      });
    }
    memo[mask] = value;
    return value;
  };
  return moment(moment, (1u << k) - 1u);
}

HierarchyState initial_ground(int n_atoms, int order) { return HierarchyState(n_atoms, order); }

HierarchyState initial_all_excited(int n_atoms, int order) {
  return hierarchy_from(n_atoms, order, [](std::span<const int>, std::span<const int> js) -> cplx {
    for (int j : js)
      if (j != 0) return 0.0;
    return 1.0;
  });
}

double conjugation_defect(const HierarchyState& state) {
  double worst = 0.0;
  const int n_atoms = state.n_atoms();
  for (int n = 0; n < n_atoms; ++n)
    for (int a = -1; a <= 1; ++a)
      worst = std::max(worst, std::abs(state.single(n, a) - std::conj(state.single(n, -a))));
  if (state.order() >= 2)
    for (int m = 1; m < n_atoms; ++m)
      for (int n = 0; n < m; ++n)
        for (int a = -1; a <= 1; ++a)
          for (int b = -1; b <= 1; ++b)
            worst = std::max(worst, std::abs(state.pair(n, a, m, b) - std::conj(state.pair(n, -a, m, -b))));
  if (state.order() >= 3)
    for (int p = 2; p < n_atoms; ++p)
      for (int m = 1; m < p; ++m)
        for (int n = 0; n < m; ++n)
          for (int a = -1; a <= 1; ++a)
            for (int b = -1; b <= 1; ++b)
              for (int c = -1; c <= 1; ++c)
                worst = std::max(worst, std::abs(state.triple(n, a, m, b, p, c) -
                                                 std::conj(state.triple(n, -a, m, -b, p, -c))));
  return worst;
}

}  // namespace arraylight
