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

#include <span>
#include <vector>

#include "arraylight/core.hpp"
#include "arraylight/cumulant.hpp"
#include "arraylight/hierarchy.hpp"
#include "arraylight/kernel.hpp"

namespace arraylight {

/// Hierarchy state right after a photon detection in direction dir.
struct ResetSnapshot {
  HierarchyState pre_state;
  double norm = 0.0;
  HierarchyState post_state;
};

/// <S+ S-> of the pre-detection state; needs stored pairs (order >= 2).
double reset_norm(const HierarchyState& state, const DetectionDirection& dir);

/// Post-detection value of one product, unnormalized:
/// sum_{m,l} e^{i phi_ml} <sigma+_m (prod Q) sigma-_l>, with same-atom
/// products reduced (sigma+ sigma- = e, everything else on that atom 0) and
/// above-order values closed.
cplx reset_value(const HierarchyState& state, const DetectionDirection& dir, std::span<const int> atoms,
                 std::span<const int> js);

/// Every stored entry after detection, divided by the norm. All j
/// combinations are evaluated directly.
ResetSnapshot reset_expectations(const HierarchyState& state, const DetectionDirection& dir);

struct G2Diagnostics {
  double intensity = 0.0;       // steady <S+ S-> before detection
  double t_steady = 0.0;
  double steady_residual = 0.0;
  double min_pair_excitation = 0.0;  // min over pairs of Re <e_n e_m> after reset
  double max_pair_excitation = 0.0;
  double asymptote = 0.0;            // g2 at the last tau
  double conjugation_defect = 0.0;   // of the post-reset state
};

struct G2HierarchyResult {
  std::vector<double> tau;
  std::vector<double> g2;
  G2Diagnostics diagnostics;
};

/// g2 on tau_grid from a given pre-detection state (order 2 or 3).
G2HierarchyResult g2_hierarchy_from_state(const HierarchyState& steady, const DriveField& drive,
                                          const CouplingSet& couplings, const DetectionDirection& dir,
                                          std::span<const double> tau_grid, const StepControl& control);

/// Full pipeline: ground start, steady state, detection, re-evolution.
G2HierarchyResult g2_hierarchy(const AtomArray& array, const DriveField& drive, const CouplingSet& couplings,
                               const DetectionDirection& dir, int order, std::span<const double> tau_grid,
                               const HierarchyOptions& options);

}  // namespace arraylight
