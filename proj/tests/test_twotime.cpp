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

#include <cmath>
#include <numbers>

#include "arraylight/exact.hpp"
#include "arraylight/observables.hpp"
#include "arraylight/twotime.hpp"
#include "test_support.hpp"

using namespace arraylight;

namespace {

StepControl rk4(double dt = 1e-3) {
  StepControl c;
  c.method = StepMethod::FixedRk4;
  c.dt = dt;
  return c;
}

// Exact post-detection expectations of rho at the given order.
HierarchyState exact_reset(const DensityMatrix& rho, const DetectionDirection& dir, int order) {
  const Projection p = project_detection(rho, dir);
  const DensityMatrix post{p.state.n_atoms, p.state.data / p.norm};
  return testutil::hierarchy_of(post, order);
}

}  // namespace

TEST_CASE("reset norm") {
  const AtomArray arr = build_line_array(3, 0.4, Vec3::UnitY(), TransitionKind::DeltaM0);
  const DetectionDirection dir = detection_direction(arr, xy_direction(0.1 * std::numbers::pi));
  try {
    reset_norm(initial_ground(3, 2), dir);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ProjectionDegenerate);
  }
  const AtomArray one = build_line_array(1, 1.0, Vec3::UnitY(), TransitionKind::DeltaM0);
  HierarchyState s1(1, 2);
  s1.single(0, 0) = 0.3;
  CHECK(reset_norm(s1, detection_direction(one, Vec3::UnitX())) == doctest::Approx(0.3));
  CHECK_THROWS_AS(reset_norm(initial_all_excited(3, 1), dir), Error);
  const DensityMatrix rho = testutil::random_density(3, 14);
  CHECK(std::abs(reset_norm(testutil::hierarchy_of(rho, 2), dir) - detector_expectation(rho, dir)) < 1e-14);
}

TEST_CASE("single atom is de-excited by detection") {
  const AtomArray one = build_line_array(1, 1.0, Vec3::UnitY(), TransitionKind::DeltaM0);
  HierarchyState s(1, 2);
  s.single(0, 0) = 0.4;
  s.single(0, -1) = cplx(0.1, 0.2);
  s.single(0, 1) = cplx(0.1, -0.2);
  const ResetSnapshot snap = reset_expectations(s, detection_direction(one, Vec3::UnitX()));
  CHECK(snap.post_state.single(0, 0) == 0.0);
  CHECK(snap.post_state.single(0, -1) == 0.0);
  CHECK(snap.norm == doctest::Approx(0.4));
}

TEST_CASE("reset matches the exact projection when no closure is needed") {
  SUBCASE("two atoms, order 2") {
    const AtomArray arr = build_line_array(2, 0.4, Vec3::UnitY(), TransitionKind::DeltaM0);
    const DetectionDirection dir = detection_direction(arr, xy_direction(0.3 * std::numbers::pi));
    const DensityMatrix rho = testutil::random_density(2, 41);
    const ResetSnapshot snap = reset_expectations(testutil::hierarchy_of(rho, 2), dir);
    CHECK(testutil::max_abs_diff(snap.post_state.values(), exact_reset(rho, dir, 2).values()) < 1e-12);
  }
  SUBCASE("three atoms, order 3, every combination") {
    const AtomArray arr = testutil::cluster(3, TransitionKind::DeltaMpm1);
    const DetectionDirection dir = detection_direction(arr, Vec3(0.3, -0.4, std::sqrt(0.75)));
    const DensityMatrix rho = testutil::random_density(3, 42);
    const ResetSnapshot snap = reset_expectations(testutil::hierarchy_of(rho, 3), dir);
    const HierarchyState want = exact_reset(rho, dir, 3);
    CHECK(testutil::max_abs_diff(snap.post_state.values(), want.values()) < 1e-12);
    CHECK(conjugation_defect(snap.post_state) < 1e-12);
  }
}

TEST_CASE("reset with closures keeps the conjugation symmetry and is repeatable") {
  const AtomArray arr = build_line_array(6, 0.4, Vec3::UnitY(), TransitionKind::DeltaM0);
  const DetectionDirection dir = detection_direction(arr, xy_direction(0.2 * std::numbers::pi));
  const DensityMatrix rho = testutil::random_density(6, 43);
  for (int order = 2; order <= 3; ++order) {
    const HierarchyState s = testutil::hierarchy_of(rho, order);
    const ResetSnapshot a = reset_expectations(s, dir);
    const ResetSnapshot b = reset_expectations(s, dir);
    CHECK((a.post_state.values().array() == b.post_state.values().array()).all());
    CHECK((a.pre_state.values().array() == s.values().array()).all());
    CHECK(conjugation_defect(a.post_state) < 1e-10);
  }
}

TEST_CASE("closure-free g2 curves equal the exact pipeline") {
  std::vector<double> tau;
  for (int k = 0; k <= 20; ++k) tau.push_back(0.25 * k);
  auto compare = [&](const AtomArray& arr, int order) {
    const CouplingSet cs = coupling_set(arr);
    const int n = static_cast<int>(arr.size());
    const DriveField drive = testutil::irregular_drive(n, 0.7, 0.1);
    const DetectionDirection dir = detection_direction(arr, xy_direction(0.15 * std::numbers::pi));
    // shared pre-detection state from a finite evolution
    DensityMatrix rho = ground_state(n);
    const std::vector<double> t0{3.0};
    evolve_exact(rho, drive, cs, rk4(), t0, {});
    const G2Curve exact = g2_exact_from_state(rho, drive, cs, dir, tau, rk4());
    const G2HierarchyResult mf = g2_hierarchy_from_state(testutil::hierarchy_of(rho, order), drive, cs, dir, tau, rk4());
    double worst = 0.0;
    for (std::size_t i = 0; i < tau.size(); ++i) worst = std::max(worst, std::abs(exact.g2[i] - mf.g2[i]));
    return worst;
  };
  CHECK(compare(build_line_array(2, 0.4, Vec3::UnitY(), TransitionKind::DeltaM0), 2) < 1e-7);
  CHECK(compare(testutil::cluster(3, TransitionKind::DeltaMpm1), 3) < 1e-7);
}

TEST_CASE("g2 pipeline argument checks and diagnostics") {
  const AtomArray arr = build_line_array(3, 0.4, Vec3::UnitY(), TransitionKind::DeltaM0);
  const CouplingSet cs = coupling_set(arr);
  const DriveField drive = plane_wave_drive(arr, 0.5, Vec3::UnitX(), 0.0);
  const DetectionDirection dir = detection_direction(arr, Vec3::UnitX());
  const std::vector<double> tau{0.0, 0.5, 40.0};
  HierarchyOptions opt;
  opt.control.method = StepMethod::AdaptiveRk45;
  opt.control.dt = 0.01;
  CHECK_THROWS_AS(g2_hierarchy(arr, drive, cs, dir, 1, tau, opt), Error);
  const G2HierarchyResult r = g2_hierarchy(arr, drive, cs, dir, 2, tau, opt);
  REQUIRE(r.g2.size() == 3);
  CHECK(r.diagnostics.intensity > 0.0);
  CHECK(r.diagnostics.t_steady > 0.0);
  CHECK(r.diagnostics.min_pair_excitation <= r.diagnostics.max_pair_excitation);
  CHECK(r.diagnostics.asymptote == r.g2.back());
  CHECK(std::abs(r.diagnostics.asymptote - 1.0) < 0.01);
}
