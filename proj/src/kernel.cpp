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

#include "arraylight/kernel.hpp"

#include <cmath>
#include <sstream>

namespace arraylight {

namespace {

void require_positive_argument(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) {
    fail(ErrorKind::Domain, "spherical Hankel argument must be positive and finite");
  }
}

// j2(s) = s^2 sum_k (-s^2/2)^k / (k! (2k+5)!!); used where the closed form cancels.
double bessel_j2_series(double s) {
  const double x = -0.5 * s * s;
  double term = 1.0 / 15.0;
  double sum = term;
  for (int k = 1; k < 30; ++k) {
    term *= x / (k * (2.0 * k + 5.0));
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return s * s * sum;
}

}  // namespace

cplx spherical_hankel_h0(double s) {
  require_positive_argument(s);
  return {std::sin(s) / s, -std::cos(s) / s};
}

cplx spherical_hankel_h2(double s) {
  require_positive_argument(s);
  const double sn = std::sin(s);
  const double cs = std::cos(s);
  const double inv = 1.0 / s;
  const double inv2 = inv * inv;
  const double inv3 = inv2 * inv;
  const double re = s < 1.0 ? bessel_j2_series(s) : (3.0 * inv3 - inv) * sn - 3.0 * inv2 * cs;
  const double im = -(3.0 * inv3 - inv) * cs - 3.0 * inv2 * sn;
  return {re, im};
}

double angular_coefficient(const Vec3& rvec, TransitionKind transition) {
  const double r = rvec.norm();
  const double cos_theta = rvec.z() / r;
  const double p2 = 0.5 * (3.0 * cos_theta * cos_theta - 1.0);
  return transition == TransitionKind::DeltaM0 ? p2 : -0.5 * p2;
}

cplx green_g(const Vec3& rvec, TransitionKind transition) {
  const double s = kWaveNumber * rvec.norm();
  if (!(s >= kMinPairArgument)) {
    fail(ErrorKind::Singularity, "pair separation below the contact cutoff");
  }
  return 0.5 * kGamma *
         (spherical_hankel_h0(s) + angular_coefficient(rvec, transition) * spherical_hankel_h2(s));
}

CouplingSet coupling_set(const AtomArray& array) {
  const auto n = static_cast<Eigen::Index>(array.size());
  CouplingSet c{Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n),
                Eigen::MatrixXcd::Zero(n, n), Eigen::MatrixXcd::Zero(n, n)};
  for (Eigen::Index a = 0; a < n; ++a) {
    c.g_plus(a, a) = 0.5 * kGamma;
    c.g_minus(a, a) = 0.5 * kGamma;
    for (Eigen::Index b = 0; b < a; ++b) {
      const Vec3 r = array.position(static_cast<std::size_t>(a)) - array.position(static_cast<std::size_t>(b));
      cplx g;
      try {
        g = green_g(r, array.transition());
      } catch (const Error& e) {
        std::ostringstream os;
        os << "atoms " << b << " and " << a << ": " << e.what();
        fail(e.kind(), os.str());
      }
      const double gamma = 2.0 * g.real();
      const double omega = g.imag();
      const cplx gp(0.5 * gamma, omega);
      c.gamma_nm(a, b) = c.gamma_nm(b, a) = gamma;
      c.omega_nm(a, b) = c.omega_nm(b, a) = omega;
      c.g_plus(a, b) = c.g_plus(b, a) = gp;
      c.g_minus(a, b) = c.g_minus(b, a) = std::conj(gp);
    }
  }
  return c;
}

}  // namespace arraylight
