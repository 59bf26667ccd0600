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

#include "arraylight/core.hpp"

namespace arraylight {

/// Pairwise dipole-dipole couplings of an array.
///
/// Off the diagonal: gamma_nm = 2 Re g(R_nm), omega_nm = Im g(R_nm) and
/// g+-_nm = +-i omega_nm + gamma_nm / 2. The pair quantities are undefined for
/// m == n, so gamma/omega carry zeros there; g_plus and g_minus carry Gamma/2,
/// which only the eigenmode decomposition reads (a constant diagonal moves
/// every eigenvalue by the same amount and leaves the modes alone).
struct CouplingSet {
  Eigen::MatrixXd gamma_nm;
  Eigen::MatrixXd omega_nm;
  Eigen::MatrixXcd g_plus;
  Eigen::MatrixXcd g_minus;

  std::size_t size() const noexcept { return static_cast<std::size_t>(gamma_nm.rows()); }
};

/// Outgoing spherical Hankel functions of the first kind; s must be > 0.
cplx spherical_hankel_h0(double s);
cplx spherical_hankel_h2(double s);

/// Angular weight of h2 for a pair separated by rvec (dipole axis z).
double angular_coefficient(const Vec3& rvec, TransitionKind transition);

/// Pair propagator g(R) = (Gamma/2)[h0(kR) + c(theta) h2(kR)].
cplx green_g(const Vec3& rvec, TransitionKind transition);

CouplingSet coupling_set(const AtomArray& array);

/// Below this kR the 1/s^3 near field is treated as a contact singularity.
inline constexpr double kMinPairArgument = 1e-6;

}  // namespace arraylight
