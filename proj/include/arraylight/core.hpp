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

#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "arraylight/errors.hpp"

namespace arraylight {

using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;

// Natural units: Gamma = 1 (single-atom decay rate), lambda = 1 (k = 2 pi).
// Times are in 1/Gamma, lengths in lambda, frequencies in Gamma.
inline constexpr double kGamma = 1.0;
inline constexpr double kWavelength = 1.0;
inline constexpr double kWaveNumber = 2.0 * std::numbers::pi / kWavelength;

/// Which dipole transition the atoms are driven on. Selects the angular
/// weight of the near-field Hankel term in the pair propagator.
enum class TransitionKind { DeltaM0, DeltaMpm1 };

/// Fixed positions (units of lambda) of identical two-level atoms.
class AtomArray {
 public:
  AtomArray(std::vector<Vec3> positions, TransitionKind transition);

  std::size_t size() const noexcept { return positions_.size(); }
  const std::vector<Vec3>& positions() const noexcept { return positions_; }
  const Vec3& position(std::size_t n) const { return positions_.at(n); }
  TransitionKind transition() const noexcept { return transition_; }

 private:
  std::vector<Vec3> positions_;
  TransitionKind transition_;
};

/// Per-atom drive: complex Rabi frequency Omega+_n and detuning Delta_n.
/// Omega-_n is conj(Omega+_n) and is never stored.
struct DriveField {
  Eigen::VectorXcd rabi;
  Eigen::VectorXd detuning;

  std::size_t size() const noexcept { return static_cast<std::size_t>(rabi.size()); }
  cplx rabi_plus(std::size_t n) const { return rabi(static_cast<Eigen::Index>(n)); }
  cplx rabi_minus(std::size_t n) const { return std::conj(rabi(static_cast<Eigen::Index>(n))); }
};

/// Emission direction plus the phase table e^{i k.(R_m - R_l)} it induces.
struct DetectionDirection {
  Vec3 khat;
  Eigen::MatrixXcd phase_table;  // (m, l) -> e^{i phi_ml}
};

AtomArray build_line_array(int n, double spacing, const Vec3& axis, TransitionKind transition);

struct StandingWaveParams {
  std::uint64_t seed = 1;
  int n_sites = 200;
  double fill_probability = 0.5;
  double trap_wavelength_ratio = 940.0 / 780.0;  // lambda_trap / lambda
  double waist = 3300.0 / 780.0;                 // lambda units
  double sigma_rho = 300.0 / 780.0;              // lambda units
  TransitionKind transition = TransitionKind::DeltaMpm1;
};

/// Site z-positions of a focused standing-wave trap: roots of
/// sin(k_trap z - atan(z / z_R)) around the focus, z_R = pi w^2 / lambda_trap.
std::vector<double> standing_wave_sites(int n_sites, double trap_wavelength_ratio, double waist);

AtomArray build_standing_wave_array(const StandingWaveParams& params);

DriveField plane_wave_drive(const AtomArray& array, double omega, const Vec3& khat, double delta);
DriveField eigenmode_drive(const AtomArray& array, const Eigen::VectorXcd& mode, double omega);
DriveField zero_drive(const AtomArray& array);

DetectionDirection detection_direction(const AtomArray& array, const Vec3& khat);

/// Direction in the xy-plane at angle theta (radians) from the x axis.
Vec3 xy_direction(double theta);

/// Saturation ratio I_in / I_s = 2 Omega^2 / Gamma^2 and its inverse.
inline double intensity_ratio(double omega) { return 2.0 * omega * omega / (kGamma * kGamma); }
inline double omega_from_intensity(double ratio) { return kGamma * std::sqrt(ratio / 2.0); }

const char* to_string(TransitionKind kind) noexcept;

/// Seeded generator with a fixed stream: std::mt19937_64 bits (its output
/// sequence is pinned by the standard) turned into doubles by hand, since the
/// standard distributions differ between library vendors.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

  double uniform();  // [0, 1), 53-bit resolution
  double normal();   // Box-Muller, caches the second variate

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace arraylight
