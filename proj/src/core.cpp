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

#include "arraylight/core.hpp"

#include <cmath>
#include <sstream>

namespace arraylight {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Singularity: return "singularity";
    case ErrorKind::DimensionMismatch: return "dimension-mismatch";
    case ErrorKind::NumericalFailure: return "numerical-failure";
    case ErrorKind::NumericalConsistency: return "numerical-consistency";
    case ErrorKind::ProjectionDegenerate: return "projection-degenerate";
    case ErrorKind::IntegrationFailure: return "integration-failure";
    case ErrorKind::SteadyStateFailure: return "steady-state-failure";
    case ErrorKind::FitFailure: return "fit-failure";
    case ErrorKind::Schema: return "schema";
    case ErrorKind::Eigensolver: return "eigensolver";
    case ErrorKind::Capability: return "capability";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

const char* to_string(TransitionKind kind) noexcept {
  return kind == TransitionKind::DeltaM0 ? "DeltaM0" : "DeltaMpm1";
}

AtomArray::AtomArray(std::vector<Vec3> positions, TransitionKind transition)
    : positions_(std::move(positions)), transition_(transition) {
  if (positions_.empty()) fail(ErrorKind::InvalidArgument, "atom array must hold at least one atom");
  for (std::size_t n = 0; n < positions_.size(); ++n) {
    if (!positions_[n].allFinite()) {
      fail(ErrorKind::InvalidArgument, "atom " + std::to_string(n) + " has a non-finite position");
    }
    for (std::size_t m = 0; m < n; ++m) {
      if ((positions_[n] - positions_[m]).norm() <= 0.0) {
        std::ostringstream os;
        os << "atoms " << m << " and " << n << " coincide";
        fail(ErrorKind::InvalidArgument, os.str());
      }
    }
  }
}

namespace {

Vec3 require_unit(const Vec3& v, const char* name) {
  const double norm = v.norm();
  if (!std::isfinite(norm) || std::abs(norm - 1.0) > 1e-12) {
    fail(ErrorKind::InvalidArgument, std::string(name) + " must be a unit vector");
  }
  return v;
}

}  // namespace

AtomArray build_line_array(int n, double spacing, const Vec3& axis, TransitionKind transition) {
  if (n < 1) fail(ErrorKind::InvalidArgument, "line array needs n >= 1");
  if (!(spacing > 0.0)) fail(ErrorKind::InvalidArgument, "line array spacing must be positive");
  require_unit(axis, "axis");
  std::vector<Vec3> positions;
  positions.reserve(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) positions.push_back((j * spacing) * axis);
  return AtomArray(std::move(positions), transition);
}

std::vector<double> standing_wave_sites(int n_sites, double trap_wavelength_ratio, double waist) {
  if (n_sites < 1) fail(ErrorKind::InvalidArgument, "n_sites must be >= 1");
  if (!(trap_wavelength_ratio > 0.0) || !(waist > 0.0)) {
    fail(ErrorKind::InvalidArgument, "trap wavelength and waist must be positive");
  }
  const double k_trap = 2.0 * std::numbers::pi / trap_wavelength_ratio;
  const double z_rayleigh = std::numbers::pi * waist * waist / trap_wavelength_ratio;
  const int first = -(n_sites / 2);

  std::vector<double> sites;
  sites.reserve(static_cast<std::size_t>(n_sites));
  for (int i = 0; i < n_sites; ++i) {
    const int j = first + i;
    // Root of k z - atan(z / z_R) - j pi; the Gouy term stays inside
    // (-pi/2, pi/2) so the root is bracketed by +-pi/2 around j pi / k.
    const double target = j * std::numbers::pi;
    auto f = [&](double z) { return k_trap * z - std::atan(z / z_rayleigh) - target; };
    auto df = [&](double z) {
      const double u = z / z_rayleigh;
      return k_trap - 1.0 / (z_rayleigh * (1.0 + u * u));
    };
    double lo = (target - 0.5 * std::numbers::pi) / k_trap;
    double hi = (target + 0.5 * std::numbers::pi) / k_trap;
    if (f(lo) > 0.0 || f(hi) < 0.0) {
      fail(ErrorKind::NumericalFailure, "standing-wave root not bracketed at site " + std::to_string(i));
    }
    double z = 0.5 * (lo + hi);
    bool converged = false;
    for (int iter = 0; iter < 200; ++iter) {
      const double value = f(z);
      if (value > 0.0) hi = z; else lo = z;
      double next = z - value / df(z);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      const double step = std::abs(next - z);
      z = next;
      if (step < 1e-13 || hi - lo < 1e-12) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      fail(ErrorKind::NumericalFailure, "standing-wave root did not converge at site " + std::to_string(i));
    }
    sites.push_back(z);
  }
  return sites;
}

AtomArray build_standing_wave_array(const StandingWaveParams& params) {
  if (!(params.fill_probability >= 0.0 && params.fill_probability <= 1.0)) {
    fail(ErrorKind::InvalidArgument, "fill_probability must lie in [0, 1]");
  }
  if (!(params.sigma_rho >= 0.0)) fail(ErrorKind::InvalidArgument, "sigma_rho must be non-negative");
  const std::vector<double> sites =
      standing_wave_sites(params.n_sites, params.trap_wavelength_ratio, params.waist);

  // Stream: per site one uniform for occupancy, then two normals (x, y) if filled.
  SeededRng rng(params.seed);
  std::vector<Vec3> positions;
  for (double z : sites) {
    if (rng.uniform() < params.fill_probability) {
      const double x = params.sigma_rho * rng.normal();
      const double y = params.sigma_rho * rng.normal();
      positions.emplace_back(x, y, z);
    }
  }
  if (positions.empty()) fail(ErrorKind::InvalidArgument, "standing-wave draw produced no atoms");
  return AtomArray(std::move(positions), params.transition);
}

DriveField plane_wave_drive(const AtomArray& array, double omega, const Vec3& khat, double delta) {
  require_unit(khat, "khat");
  const auto n = static_cast<Eigen::Index>(array.size());
  DriveField drive{Eigen::VectorXcd(n), Eigen::VectorXd::Constant(n, delta)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const double phase = kWaveNumber * khat.dot(array.position(static_cast<std::size_t>(i)));
    drive.rabi(i) = omega * std::polar(1.0, phase);
  }
  return drive;
}

DriveField eigenmode_drive(const AtomArray& array, const Eigen::VectorXcd& mode, double omega) {
  if (static_cast<std::size_t>(mode.size()) != array.size()) {
    fail(ErrorKind::DimensionMismatch, "mode length does not match the atom count");
  }
  if (std::abs(mode.squaredNorm() - 1.0) > 1e-10) {
    fail(ErrorKind::InvalidArgument, "eigenmode drive needs a mode with sum |u|^2 = 1");
  }
  return DriveField{omega * mode, Eigen::VectorXd::Zero(mode.size())};
}

DriveField zero_drive(const AtomArray& array) {
  const auto n = static_cast<Eigen::Index>(array.size());
  return DriveField{Eigen::VectorXcd::Zero(n), Eigen::VectorXd::Zero(n)};
}

DetectionDirection detection_direction(const AtomArray& array, const Vec3& khat) {
  require_unit(khat, "khat");
  const auto n = static_cast<Eigen::Index>(array.size());
  Eigen::VectorXd kr(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    kr(i) = kWaveNumber * khat.dot(array.position(static_cast<std::size_t>(i)));
  }
  DetectionDirection dir{khat, Eigen::MatrixXcd(n, n)};
  for (Eigen::Index m = 0; m < n; ++m) {
    dir.phase_table(m, m) = 1.0;
    for (Eigen::Index l = 0; l < m; ++l) {
      const cplx phase = std::polar(1.0, kr(m) - kr(l));
      dir.phase_table(m, l) = phase;
      dir.phase_table(l, m) = std::conj(phase);
    }
  }
  return dir;
}

Vec3 xy_direction(double theta) { return Vec3(std::cos(theta), std::sin(theta), 0.0); }

double SeededRng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double SeededRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

}  // namespace arraylight
