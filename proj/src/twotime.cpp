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

#include "arraylight/twotime.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "arraylight/errors.hpp"
#include "arraylight/observables.hpp"

namespace arraylight {

double reset_norm(const HierarchyState& state, const DetectionDirection& dir) {
  if (state.order() < 2) fail(ErrorKind::InvalidArgument, "detection reset needs pair expectations (order >= 2)");
  const double norm = directional_intensity(state, dir);
  if (!(norm > 1e-14)) fail(ErrorKind::ProjectionDegenerate, "detection probability is zero or negative");
  return norm;
}

cplx reset_value(const HierarchyState& state, const DetectionDirection& dir, std::span<const int> atoms,
                 std::span<const int> js) {
  const int n_atoms = state.n_atoms();
  const std::size_t k = atoms.size();
  if (k > 3) fail(ErrorKind::InvalidArgument, "reset values are defined for up to three operators");
  std::array<int, 5> ops_atoms{}, ops_js{};
  cplx total = 0.0;
  for (int m = 0; m < n_atoms; ++m)
    for (int l = 0; l < n_atoms; ++l) {
      std::size_t count = k;
      for (std::size_t i = 0; i < k; ++i) {
        ops_atoms[i] = atoms[i];
        ops_js[i] = js[i];
      }
      int at_m = -1, at_l = -1;
      for (std::size_t i = 0; i < k; ++i) {
        if (atoms[i] == m) at_m = static_cast<int>(i);
        if (atoms[i] == l) at_l = static_cast<int>(i);
      }
      if (m == l) {
        if (at_m >= 0) continue;  // sigma+ Q sigma- = 0 on one atom
        ops_atoms[count] = m;
        ops_js[count++] = 0;
      } else {
        if (at_m >= 0) {
          if (ops_js[static_cast<std::size_t>(at_m)] != -1) continue;
          ops_js[static_cast<std::size_t>(at_m)] = 0;
        } else {
          ops_atoms[count] = m;
          ops_js[count++] = 1;
        }
        if (at_l >= 0) {
          if (ops_js[static_cast<std::size_t>(at_l)] != 1) continue;
          ops_js[static_cast<std::size_t>(at_l)] = 0;
        } else {
          ops_atoms[count] = l;
          ops_js[count++] = -1;
        }
      }
      total += dir.phase_table(m, l) *
               get_expectation(state, std::span<const int>(ops_atoms.data(), count),
                               std::span<const int>(ops_js.data(), count));
    }
  return total;
}

ResetSnapshot reset_expectations(const HierarchyState& state, const DetectionDirection& dir) {
  if (state.order() < 2) fail(ErrorKind::InvalidArgument, "detection reset needs order 2 or 3");
  if (dir.phase_table.rows() != state.n_atoms()) fail(ErrorKind::DimensionMismatch, "detection direction size mismatch");
  const double norm = reset_norm(state, dir);
  HierarchyState post = hierarchy_from(state.n_atoms(), state.order(),
                                       [&](std::span<const int> atoms, std::span<const int> js) {
                                         return reset_value(state, dir, atoms, js) / norm;
                                       });
  return {state, norm, std::move(post)};
}

G2HierarchyResult g2_hierarchy_from_state(const HierarchyState& steady, const DriveField& drive,
                                          const CouplingSet& couplings, const DetectionDirection& dir,
                                          std::span<const double> tau_grid, const StepControl& control) {
  ResetSnapshot snap = reset_expectations(steady, dir);
  G2HierarchyResult result;
  result.diagnostics.intensity = snap.norm;
  result.diagnostics.conjugation_defect = conjugation_defect(snap.post_state);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int m = 1; m < steady.n_atoms(); ++m)
    for (int n = 0; n < m; ++n) {
      const double v = snap.post_state.pair(n, 0, m, 0).real();
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  if (steady.n_atoms() > 1) {
    result.diagnostics.min_pair_excitation = lo;
    result.diagnostics.max_pair_excitation = hi;
  }
  HierarchyState state = std::move(snap.post_state);
  evolve_hierarchy(state, one_atom_terms(drive), two_atom_tensors(couplings), false, control, tau_grid,
                   [&](double t, const HierarchyState& s) {
                     result.tau.push_back(t);
                     result.g2.push_back(directional_intensity(s, dir) / snap.norm);
                   });
  if (!result.g2.empty()) result.diagnostics.asymptote = result.g2.back();
  return result;
}

G2HierarchyResult g2_hierarchy(const AtomArray& array, const DriveField& drive, const CouplingSet& couplings,
                               const DetectionDirection& dir, int order, std::span<const double> tau_grid,
                               const HierarchyOptions& options) {
  if (order != 2 && order != 3) fail(ErrorKind::InvalidArgument, "g2 needs hierarchy order 2 or 3");
  const int n = static_cast<int>(array.size());
  const auto steady = hierarchy_steady_state(initial_ground(n, order), one_atom_terms(drive),
                                             two_atom_tensors(couplings), false, options);
  G2HierarchyResult result = g2_hierarchy_from_state(steady.state, drive, couplings, dir, tau_grid, options.control);
  result.diagnostics.t_steady = steady.info.t_steady;
  result.diagnostics.steady_residual = steady.info.residual;
  return result;
}

}  // namespace arraylight
