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

#include "doctest.h"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <numbers>

#include "arraylight/kernel.hpp"
#include "hankel_oracle.hpp"

using namespace arraylight;

TEST_CASE("h0 closed form values") {
  CHECK(std::abs(spherical_hankel_h0(std::numbers::pi) - cplx(0.0, 1.0 / std::numbers::pi)) < 1e-15);
  CHECK(std::abs(spherical_hankel_h0(2.0 * std::numbers::pi) - cplx(0.0, -0.5 / std::numbers::pi)) < 1e-15);
  CHECK(std::abs(spherical_hankel_h0(1e-8).real() - 1.0) < 1e-15);
  CHECK_THROWS_AS(spherical_hankel_h0(0.0), Error);
  CHECK_THROWS_AS(spherical_hankel_h0(-1.0), Error);
  CHECK_THROWS_AS(spherical_hankel_h2(0.0), Error);
}

TEST_CASE("h2 small-argument behaviour") {
  CHECK(std::abs(spherical_hankel_h2(1e-4).real() - 6.666666661904761e-10) < 1e-22);
  for (double s : {1e-6, 1e-5, 1e-3, 1e-2}) CHECK(std::abs(spherical_hankel_h2(s).real() / (s * s / 15.0) - 1.0) < 1e-4);
  // both branches agree with the reference on either side of the switch point
  for (double s : {1.0 - 1e-12, 1.0}) CHECK(std::abs(spherical_hankel_h2(s).real() - testutil::hankel_h2_hp(s).first) < 1e-15);
}

TEST_CASE("Hankel functions against a 50-digit evaluation") {
  double worst0 = 0.0, worst2 = 0.0;
  for (int i = 0; i <= 2000; ++i) {
    const double s = 1e-3 * std::pow(1e5, i / 2000.0);
    const cplx h0 = spherical_hankel_h0(s);
    const cplx h2 = spherical_hankel_h2(s);
    const auto [r0, i0] = testutil::hankel_h0_hp(s);
    const auto [r2, i2] = testutil::hankel_h2_hp(s);
    auto rel = [](double got, double want) { return std::abs(got - want) / std::max(1.0, std::abs(want)); };
    worst0 = std::max({worst0, rel(h0.real(), r0), rel(h0.imag(), i0)});
    worst2 = std::max({worst2, rel(h2.real(), r2), rel(h2.imag(), i2)});
  }
  CHECK(worst0 < 1e-12);
  CHECK(worst2 < 1e-12);
}

TEST_CASE("angular weights") {
  CHECK(angular_coefficient(Vec3::UnitY(), TransitionKind::DeltaM0) == doctest::Approx(-0.5));
  CHECK(angular_coefficient(Vec3::UnitY(), TransitionKind::DeltaMpm1) == doctest::Approx(0.25));
  CHECK(angular_coefficient(Vec3::UnitZ(), TransitionKind::DeltaM0) == doctest::Approx(1.0));
  CHECK(angular_coefficient(-2.0 * Vec3::UnitZ(), TransitionKind::DeltaMpm1) == doctest::Approx(-0.5));
}

TEST_CASE("pair propagator") {
  SUBCASE("contact limit gives the single-atom rate") {
    for (auto kind : {TransitionKind::DeltaM0, TransitionKind::DeltaMpm1})
      for (const Vec3& dir : std::vector<Vec3>{Vec3::UnitX(), Vec3::UnitZ(), Vec3(1.0, 1.0, 1.0).normalized()})
        CHECK(std::abs(2.0 * green_g(1e-4 * dir, kind).real() - kGamma) < 1e-6);
  }
  SUBCASE("0.4 lambda along y against the oracle") {
    const double s = kWaveNumber * 0.4;
    const auto [r0, i0] = testutil::hankel_h0_hp(s);
    const auto [r2, i2] = testutil::hankel_h2_hp(s);
    const cplx expected = 0.5 * (cplx(r0, i0) - 0.5 * cplx(r2, i2));
    CHECK(std::abs(green_g(0.4 * Vec3::UnitY(), TransitionKind::DeltaM0) - expected) < 1e-13);
  }
  SUBCASE("far field decays") {
    CHECK(std::abs(green_g(1e4 * Vec3::UnitX(), TransitionKind::DeltaM0)) < 1e-4);
  }
  SUBCASE("even in the separation vector") {
    const Vec3 r(0.13, -0.27, 0.31);
    for (auto kind : {TransitionKind::DeltaM0, TransitionKind::DeltaMpm1}) CHECK(green_g(r, kind) == green_g(-r, kind));
  }
  SUBCASE("contact singularity") {
    try {
      green_g(Vec3(1e-9, 0.0, 0.0), TransitionKind::DeltaM0);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Singularity);
    }
  }
}

TEST_CASE("coupling set") {
  SUBCASE("near-contact pair") {
    for (auto kind : {TransitionKind::DeltaM0, TransitionKind::DeltaMpm1}) {
      const CouplingSet cs = coupling_set(build_line_array(2, 1e-4, Vec3::UnitX(), kind));
      CHECK(std::abs(cs.gamma_nm(0, 1) - kGamma) < 1e-6);
    }
  }
  SUBCASE("eight-atom chain against per-pair evaluation") {
    const AtomArray arr = build_line_array(8, 0.1, Vec3::UnitZ(), TransitionKind::DeltaMpm1);
    const CouplingSet cs = coupling_set(arr);
    for (std::size_t n = 0; n < 8; ++n)
      for (std::size_t m = 0; m < 8; ++m) {
        const auto a = static_cast<Eigen::Index>(n), b = static_cast<Eigen::Index>(m);
        CHECK(cs.gamma_nm(a, b) == cs.gamma_nm(b, a));
        CHECK(cs.omega_nm(a, b) == cs.omega_nm(b, a));
        CHECK(cs.g_minus(a, b) == std::conj(cs.g_plus(a, b)));
        if (n == m) {
          CHECK(cs.gamma_nm(a, a) == 0.0);
          CHECK(cs.omega_nm(a, a) == 0.0);
          CHECK(cs.g_plus(a, a) == cplx(0.5, 0.0));
          continue;
        }
        const cplx g = green_g(arr.position(n) - arr.position(m), TransitionKind::DeltaMpm1);
        CHECK(std::abs(cs.gamma_nm(a, b) - 2.0 * g.real()) < 1e-15);
        CHECK(std::abs(cs.omega_nm(a, b) - g.imag()) < 1e-15);
        CHECK(std::abs(cs.g_plus(a, b) - cplx(cs.gamma_nm(a, b) / 2.0, cs.omega_nm(a, b))) < 1e-15);
      }
  }
  SUBCASE("collective decay stays inside the sanity envelope") {
    for (int trial = 0; trial < 200; ++trial) {
      const double r = 1e-3 / kWaveNumber * std::pow(1e5, trial / 199.0);
      const Vec3 dir = Vec3(std::sin(0.7 * trial), std::cos(1.3 * trial), std::sin(0.2 * trial + 1.0)).normalized();
      for (auto kind : {TransitionKind::DeltaM0, TransitionKind::DeltaMpm1}) {
        const double c = angular_coefficient(dir, kind);
        CHECK(2.0 * green_g(r * dir, kind).real() <= kGamma * (1.0 + std::abs(c)) + 1e-12);
      }
    }
  }
  SUBCASE("coincident atoms name the pair") {
    // AtomArray already rejects exact duplicates; near-duplicates hit the kernel.
    const AtomArray arr({Vec3::Zero(), Vec3(1.0, 0.0, 0.0), Vec3(1e-9, 0.0, 0.0)}, TransitionKind::DeltaM0);
    try {
      coupling_set(arr);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Singularity);
      CHECK(std::string(e.what()).find("atoms 0 and 2") != std::string::npos);
    }
  }
}
