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

#include <vector>

#include "arraylight/core.hpp"
#include "arraylight/exact.hpp"
#include "arraylight/hierarchy.hpp"
#include "arraylight/kernel.hpp"

namespace arraylight {

/// Total, coherent and incoherent scattering rates in units of Gamma.
struct ScatterRates {
  double gamma_total = 0.0;
  double gamma_coherent = 0.0;
  double gamma_incoherent = 0.0;
};

/// Pair values come from the hierarchy (closed at order 1).
ScatterRates scattering_rates(const HierarchyState& state, const CouplingSet& couplings);
ScatterRates scattering_rates(const DensityMatrix& rho, const CouplingSet& couplings);

/// (gamma_C^lin - gamma_C) / gamma_C.
double delta_gamma_c(const HierarchyState& steady_mf, const HierarchyState& steady_lin, const CouplingSet& couplings);

/// <S+ S-> read from hierarchy tensors; see detector_expectation.
double directional_intensity(const HierarchyState& state, const DetectionDirection& dir);
double directional_intensity(const DensityMatrix& rho, const DetectionDirection& dir);

struct LorentzianFit {
  double center = 0.0;
  double width = 0.0;  // half width at half maximum
  double amplitude = 0.0;
  double offset = 0.0;
  double residual = 0.0;  // root mean square
  int iterations = 0;
};

/// Least-squares fit of A / (1 + ((x - x0) / w)^2) + c.
LorentzianFit lorentzian_fit(const std::vector<double>& x, const std::vector<double>& y);

/// Eigenmodes of g+ (with Gamma/2 on the diagonal), sorted by decay rate
/// 2 Re G from fastest to slowest.
struct ModeSet {
  Eigen::VectorXcd eigenvalues;
  Eigen::MatrixXcd modes;  // column alpha is u_alpha, sum |u|^2 = 1
  Eigen::VectorXd decay_rates;

  Eigen::Index size() const noexcept { return eigenvalues.size(); }
};

ModeSet eigenmodes(const CouplingSet& couplings);

}  // namespace arraylight
