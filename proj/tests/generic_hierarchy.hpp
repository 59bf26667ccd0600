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

// Independent hierarchy right-hand side for tests: applies the adjoint
// Lindbladian to a product operator term by term, expands the result in the
// per-atom basis {1, sigma-, e, sigma+} and evaluates every product through
// get_expectation. Slow (it visits every Hamiltonian and jump term for every
// target) but shares no code with the assembled equations.

#include <Eigen/Dense>

#include <map>
#include <vector>

#include "arraylight/cumulant.hpp"
#include "arraylight/hierarchy.hpp"
#include "arraylight/kernel.hpp"

namespace testutil {

using Local = Eigen::Matrix2cd;

struct OpTerm {
  arraylight::cplx coef;
  std::map<int, Local> ops;  // atom -> 2x2 operator in (g, e) basis, identity elsewhere
};

inline Local local_op(int j) {
  Local m = Local::Zero();
  if (j == -1) m(0, 1) = 1.0;  // |g><e|
  if (j == 0) m(1, 1) = 1.0;
  if (j == 1) m(1, 0) = 1.0;  // |e><g|
  return m;
}

inline OpTerm multiply(const OpTerm& a, const OpTerm& b) {
  OpTerm out{a.coef * b.coef, a.ops};
  for (const auto& [atom, op] : b.ops) {
    auto it = out.ops.find(atom);
    if (it == out.ops.end()) out.ops.emplace(atom, op);
    else it->second = it->second * op;
  }
  return out;
}

/// Expectation of one operator term under the closure of `state`.
inline arraylight::cplx evaluate(const OpTerm& term, const arraylight::HierarchyState& state) {
  std::vector<int> atoms;
  std::vector<std::array<arraylight::cplx, 4>> coefs;  // identity, sigma-, e, sigma+
  for (const auto& [atom, m] : term.ops) {
    atoms.push_back(atom);
    coefs.push_back({m(0, 0), m(0, 1), m(1, 1) - m(0, 0), m(1, 0)});
  }
  const std::size_t k = atoms.size();
  std::size_t combos = 1;
  for (std::size_t i = 0; i < k; ++i) combos *= 4;
  arraylight::cplx total = 0.0;
  for (std::size_t c = 0; c < combos; ++c) {
    std::size_t code = c;
    arraylight::cplx weight = term.coef;
    std::vector<int> sub_atoms, sub_js;
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t b = code % 4;
      code /= 4;
      weight *= coefs[i][b];
      if (b == 1) sub_js.push_back(-1);
      if (b == 2) sub_js.push_back(0);
      if (b == 3) sub_js.push_back(1);
      if (b != 0) sub_atoms.push_back(atoms[i]);
    }
    if (weight == 0.0) continue;
    total += weight * arraylight::get_expectation(state, sub_atoms, sub_js);
  }
  return total;
}

class GenericHierarchy {
 public:
  GenericHierarchy(const arraylight::DriveField& drive, const arraylight::CouplingSet& couplings)
      : couplings_(couplings) {
    const int n = static_cast<int>(drive.size());
    for (int a = 0; a < n; ++a) {
      hamiltonian_.push_back({drive.rabi_plus(static_cast<std::size_t>(a)) / 2.0, {{a, local_op(1)}}});
      hamiltonian_.push_back({drive.rabi_minus(static_cast<std::size_t>(a)) / 2.0, {{a, local_op(-1)}}});
      hamiltonian_.push_back({-drive.detuning(a), {{a, local_op(0)}}});
      for (int b = 0; b < n; ++b)
        if (a != b) hamiltonian_.push_back({couplings.omega_nm(a, b), {{a, local_op(1)}, {b, local_op(-1)}}});
    }
  }

  /// d<A>/dt for A = prod_i Q_{atoms[i]}^{js[i]}.
  arraylight::cplx derivative(const std::vector<int>& atoms, const std::vector<int>& js,
                              const arraylight::HierarchyState& state) const {
    OpTerm target{1.0, {}};
    for (std::size_t i = 0; i < atoms.size(); ++i) target.ops.emplace(atoms[i], local_op(js[i]));
    const arraylight::cplx i1(0.0, 1.0);
    arraylight::cplx total = 0.0;
    for (const auto& h : hamiltonian_) {
      total += i1 * evaluate(multiply(h, target), state);
      total -= i1 * evaluate(multiply(target, h), state);
    }
    const int n = static_cast<int>(couplings_.size());
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        const double rate = (a == b) ? arraylight::kGamma : couplings_.gamma_nm(a, b);
        if (rate == 0.0) continue;
        const OpTerm up{1.0, {{b, local_op(1)}}};
        const OpTerm down{1.0, {{a, local_op(-1)}}};
        const OpTerm updown = multiply(up, down);
        total += rate * evaluate(multiply(multiply(up, target), down), state);
        total -= 0.5 * rate * evaluate(multiply(updown, target), state);
        total -= 0.5 * rate * evaluate(multiply(target, updown), state);
      }
    return total;
  }

  arraylight::HierarchyState full(const arraylight::HierarchyState& state) const {
    return arraylight::hierarchy_from(state.n_atoms(), state.order(),
                                      [&](std::span<const int> atoms, std::span<const int> js) {
                                        return derivative(std::vector<int>(atoms.begin(), atoms.end()),
                                                          std::vector<int>(js.begin(), js.end()), state);
                                      });
  }

 private:
  arraylight::CouplingSet couplings_;
  std::vector<OpTerm> hamiltonian_;
};

}  // namespace testutil
