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

#include "arraylight/cumulant.hpp"
#include "arraylight/exact.hpp"
#include "arraylight/observables.hpp"
#include "test_support.hpp"

using namespace arraylight;

namespace {

HierarchyOptions slow_options() {
  HierarchyOptions opt;
  opt.control.method = StepMethod::AdaptiveRk45;
  opt.control.dt = 0.01;
  opt.control.rtol = 1e-10;
  opt.control.atol = 1e-14;
  opt.control.t_max = 3000.0;
  opt.steady.rel_tol = 1e-9;
  opt.steady.abs_floor = 1e-14;
  opt.steady.window = 5.0;
  return opt;
}

double lorentz(double x, double x0, double w, double a, double c) {
  const double u = (x - x0) / w;
  return a / (1.0 + u * u) + c;
}

}  // namespace

TEST_CASE("scattering rates") {
  SUBCASE("ground state scatters nothing") {
    const AtomArray arr = testutil::cluster(3, TransitionKind::DeltaM0);
    const ScatterRates r = scattering_rates(initial_ground(3, 2), coupling_set(arr));
    CHECK(r.gamma_total == 0.0);
    CHECK(r.gamma_coherent == 0.0);
    CHECK(r.gamma_incoherent == 0.0);
  }
  SUBCASE("single atom") {
    const AtomArray one = build_line_array(1, 1.0, Vec3::UnitX(), TransitionKind::DeltaM0);
    const DensityMatrix rho = testutil::random_density(1, 4);
    const ScatterRates r = scattering_rates(rho, coupling_set(one));
    CHECK(std::abs(r.gamma_total - kGamma * expect_single(rho, 0, 0).real()) < 1e-15);
    CHECK(std::abs(r.gamma_coherent - kGamma * std::norm(expect_single(rho, 0, -1))) < 1e-15);
    CHECK(r.gamma_incoherent == r.gamma_total - r.gamma_coherent);
  }
  SUBCASE("fully excited Dicke start") {
    const AtomArray arr = build_line_array(8, 0.1, Vec3::UnitZ(), TransitionKind::DeltaMpm1);
    const CouplingSet cs = coupling_set(arr);
    for (int order = 1; order <= 3; ++order)
      CHECK(std::abs(scattering_rates(initial_all_excited(8, order), cs).gamma_total - 8.0) < 1e-14);
  }
  SUBCASE("exact and closure-free hierarchy agree") {
    const AtomArray arr = build_line_array(2, 0.3, Vec3::UnitX(), TransitionKind::DeltaMpm1);
    const CouplingSet cs = coupling_set(arr);
    const DriveField drive = testutil::irregular_drive(2, 0.9, 0.2);
    DensityMatrix rho = ground_state(2);
    const std::vector<double> times{4.0};
    StepControl c;
    evolve_exact(rho, drive, cs, c, times, {});
    HierarchyState s = initial_ground(2, 2);
    evolve_hierarchy(s, one_atom_terms(drive), two_atom_tensors(cs), false, c, times, {});
    const ScatterRates a = scattering_rates(rho, cs), b = scattering_rates(s, cs);
    CHECK(std::abs(a.gamma_total - b.gamma_total) < 1e-8);
    CHECK(std::abs(a.gamma_coherent - b.gamma_coherent) < 1e-8);
    CHECK(a.gamma_total > 0.0);
  }
}

TEST_CASE("coherent-rate deviation of the linear model") {
  const AtomArray arr = build_line_array(7, 0.4, Vec3::UnitZ(), TransitionKind::DeltaMpm1);
  const CouplingSet cs = coupling_set(arr);
  const ModeSet modes = eigenmodes(cs);
  const Eigen::VectorXcd mode = modes.modes.col(modes.size() - 1);
  const HierarchyOptions opt = slow_options();
  auto pair_at = [&](double omega) {
    const DriveField drive = eigenmode_drive(arr, mode, omega);
    const auto mf = hierarchy_steady_state(initial_ground(7, 1), one_atom_terms(drive), two_atom_tensors(cs), false, opt);
    const auto lin = hierarchy_steady_state(initial_ground(7, 1), one_atom_terms(drive), two_atom_tensors(cs), true, opt);
    return std::make_pair(mf.state, lin.state);
  };
  const auto [mf1, lin1] = pair_at(1e-1);
  const auto [mf2, lin2] = pair_at(1e-2);
  const auto [mf3, lin3] = pair_at(1e-3);
  CHECK(delta_gamma_c(mf1, mf1, cs) == 0.0);
  const double d1 = std::abs(delta_gamma_c(mf1, lin1, cs));
  const double d2 = std::abs(delta_gamma_c(mf2, lin2, cs));
  const double d3 = std::abs(delta_gamma_c(mf3, lin3, cs));
  CHECK(d1 > d2);
  CHECK(d2 > d3);
  CHECK(d3 < 1e-4);
  CHECK_THROWS_AS(delta_gamma_c(initial_ground(7, 1), lin1, cs), Error);
}

TEST_CASE("directional intensity") {
  const AtomArray arr = build_line_array(7, 0.4, Vec3::UnitY(), TransitionKind::DeltaM0);
  const CouplingSet cs = coupling_set(arr);
  CHECK(directional_intensity(initial_ground(7, 2), detection_direction(arr, Vec3::UnitX())) == 0.0);
  const DriveField drive = plane_wave_drive(arr, 0.01, Vec3::UnitX(), 0.0);
  HierarchyOptions opt;
  opt.control.method = StepMethod::AdaptiveRk45;
  opt.control.dt = 0.01;
  const auto ss = hierarchy_steady_state(initial_ground(7, 2), one_atom_terms(drive), two_atom_tensors(cs), false, opt);
  const double forward = directional_intensity(ss.state, detection_direction(arr, xy_direction(0.0)));
  for (int k = 1; k <= 10; ++k) {
    const double theta = 0.05 * k * std::numbers::pi;
    CHECK(directional_intensity(ss.state, detection_direction(arr, xy_direction(theta))) < forward);
  }
  // hierarchy reading agrees with the exact reading on closure-free data
  const DensityMatrix rho = testutil::random_density(3, 5);
  const AtomArray small = build_line_array(3, 0.4, Vec3::UnitY(), TransitionKind::DeltaM0);
  const DetectionDirection dir = detection_direction(small, xy_direction(0.3));
  CHECK(std::abs(directional_intensity(testutil::hierarchy_of(rho, 2), dir) - directional_intensity(rho, dir)) < 1e-14);
}

TEST_CASE("Lorentzian fit") {
  std::vector<double> x;
  for (int i = 0; i < 21; ++i) x.push_back(-3.0 + 0.3 * i);
  SUBCASE("recovers its own model") {
    std::vector<double> y;
    for (double xi : x) y.push_back(lorentz(xi, -0.37, 0.8, 0.25, 0.01));
    const LorentzianFit f = lorentzian_fit(x, y);
    CHECK(std::abs(f.center + 0.37) < 1e-8);
    CHECK(std::abs(f.width - 0.8) < 1e-8);
    CHECK(std::abs(f.amplitude - 0.25) < 1e-8);
    CHECK(std::abs(f.offset - 0.01) < 1e-8);
    CHECK(f.residual < 1e-10);
  }
  SUBCASE("symmetric data is centered") {
    std::vector<double> y;
    for (double xi : x) y.push_back(std::exp(-xi * xi / 2.0));
    CHECK(std::abs(lorentzian_fit(x, y).center) < 1e-10);
  }
  SUBCASE("translation covariance") {
    std::vector<double> y, xs;
    for (double xi : x) {
      y.push_back(lorentz(xi, 0.2, 1.1, 1.0, 0.0) + 0.01 * std::sin(7.0 * xi));
      xs.push_back(xi + 0.5);
    }
    const LorentzianFit a = lorentzian_fit(x, y), b = lorentzian_fit(xs, y);
    CHECK(std::abs((b.center - a.center) - 0.5) < 1e-10);
    CHECK(a.residual > 0.0);
  }
  SUBCASE("input checks") {
    CHECK_THROWS_AS(lorentzian_fit({1, 2, 3}, {1, 2, 3}), Error);
    CHECK_THROWS_AS(lorentzian_fit(x, std::vector<double>(x.size() - 1, 0.0)), Error);
  }
}

TEST_CASE("eigenmodes") {
  SUBCASE("single atom") {
    const ModeSet m = eigenmodes(coupling_set(build_line_array(1, 1.0, Vec3::UnitZ(), TransitionKind::DeltaM0)));
    CHECK(std::abs(m.eigenvalues(0) - 0.5) < 1e-15);
    CHECK(std::abs(m.decay_rates(0) - 1.0) < 1e-15);
  }
  SUBCASE("seven-atom chain") {
    const CouplingSet cs = coupling_set(build_line_array(7, 0.4, Vec3::UnitZ(), TransitionKind::DeltaMpm1));
    const ModeSet m = eigenmodes(cs);
    const double expected[7] = {1.413, 1.294, 1.147, 1.032, 0.975, 0.961, 0.179};
    for (int k = 0; k < 7; ++k) {
      CHECK(std::abs(m.decay_rates(k) / expected[k] - 1.0) < 0.005);
      const Eigen::VectorXcd u = m.modes.col(k);
      CHECK(std::abs(u.squaredNorm() - 1.0) < 1e-12);
      CHECK((cs.g_plus * u - m.eigenvalues(k) * u).cwiseAbs().maxCoeff() < 1e-10);
      // Phase reference: first entry within rounding of the largest magnitude.
      Eigen::Index big = 0;
      while (std::abs(u(big)) < u.cwiseAbs().maxCoeff() * (1.0 - 1e-9)) ++big;
      CHECK(u(big).imag() == 0.0);
      CHECK(u(big).real() > 0.0);
      if (k > 0) CHECK(m.decay_rates(k) <= m.decay_rates(k - 1));
    }
    SUBCASE("a diagonal shift moves eigenvalues only") {
      CouplingSet shifted = cs;
      shifted.g_plus.diagonal().array() += cplx(0.3, -0.2);
      const ModeSet s = eigenmodes(shifted);
      for (int k = 0; k < 7; ++k) {
        CHECK(std::abs(s.eigenvalues(k) - m.eigenvalues(k) - cplx(0.3, -0.2)) < 1e-12);
        CHECK((s.modes.col(k) - m.modes.col(k)).cwiseAbs().maxCoeff() < 1e-9);
      }
    }
  }
}
