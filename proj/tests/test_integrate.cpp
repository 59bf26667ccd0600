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

#include "arraylight/exact.hpp"
#include "arraylight/integrate.hpp"
#include "arraylight/observables.hpp"
#include "test_support.hpp"

using namespace arraylight;

namespace {

StepControl fixed(double dt) {
  StepControl c;
  c.method = StepMethod::FixedRk4;
  c.dt = dt;
  return c;
}

// Single-atom optical Bloch equations in (<sigma->, <e>) with real Rabi drive.
void bloch(double omega, double delta, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
  const cplx i1(0.0, 1.0);
  dy.resize(2);
  dy(0) = (i1 * delta - 0.5) * y(0) + i1 * omega * y(1) - i1 * omega / 2.0;
  dy(1) = -y(1) + i1 * omega / 2.0 * y(0) - i1 * omega / 2.0 * std::conj(y(0));
}

}  // namespace

TEST_CASE("scalar exponential decay") {
  Integrator<Eigen::VectorXcd> it([](const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) { dy = -kGamma * y; },
                                  fixed(1e-3));
  Eigen::VectorXcd y = Eigen::VectorXcd::Ones(1);
  it.advance(y, 5.0);
  CHECK(it.time() == 5.0);
  CHECK(std::abs(y(0) - std::exp(-5.0)) < 1e-10);
}

TEST_CASE("adaptive stepping reaches the same answer") {
  StepControl c;
  c.method = StepMethod::AdaptiveRk45;
  c.rtol = 1e-11;
  c.atol = 1e-14;
  Integrator<Eigen::VectorXcd> it([](const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) { dy = -kGamma * y; }, c);
  Eigen::VectorXcd y = Eigen::VectorXcd::Ones(1);
  const std::vector<double> samples{0.5, 1.0, 5.0};
  std::vector<double> got;
  it.evolve(y, samples, [&](double t, const Eigen::VectorXcd& v) {
    CHECK(std::abs(v(0) - std::exp(-t)) < 1e-10);
    got.push_back(t);
  });
  CHECK(got == samples);
  CHECK(it.steps_taken() < 500);
}

TEST_CASE("zero right-hand side leaves the state bit-identical") {
  for (auto method : {StepMethod::FixedRk4, StepMethod::AdaptiveRk45}) {
    StepControl c;
    c.method = method;
    c.dt = 0.01;
    Integrator<Eigen::VectorXcd> it([](const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) { dy.setZero(y.size()); }, c);
    Eigen::VectorXcd y(3);
    y << cplx(0.1, 0.2), cplx(-3.0, 1e-300), cplx(7.0, 0.0);
    const Eigen::VectorXcd y0 = y;
    it.advance(y, 2.0);
    CHECK((y.array() == y0.array()).all());
  }
}

TEST_CASE("fixed-step runs are deterministic") {
  const AtomArray arr = build_line_array(3, 0.3, Vec3::UnitX(), TransitionKind::DeltaM0);
  const DriveField drive = testutil::irregular_drive(3, 0.6, 0.1);
  const CouplingSet cs = coupling_set(arr);
  const std::vector<double> times{1.0};
  DensityMatrix a = ground_state(3), b = ground_state(3);
  evolve_exact(a, drive, cs, fixed(1e-2), times, {});
  evolve_exact(b, drive, cs, fixed(1e-2), times, {});
  CHECK((a.data.array() == b.data.array()).all());
}

TEST_CASE("RK4 converges at fourth order on the two-atom master equation") {
  const AtomArray arr = build_line_array(2, 0.4, Vec3::UnitX(), TransitionKind::DeltaMpm1);
  const DriveField drive = testutil::irregular_drive(2, 1.5, 0.4);
  const CouplingSet cs = coupling_set(arr);
  const std::vector<double> times{2.0};
  auto run = [&](double dt) {
    DensityMatrix rho = ground_state(2);
    evolve_exact(rho, drive, cs, fixed(dt), times, {});
    return rho.data;
  };
  const Eigen::MatrixXcd ref = run(0.0025);
  const double e1 = (run(0.08) - ref).cwiseAbs().maxCoeff();
  const double e2 = (run(0.04) - ref).cwiseAbs().maxCoeff();
  const double ratio = e1 / e2;
  CHECK(ratio > 12.0);
  CHECK(ratio < 20.0);
}

TEST_CASE("non-finite states are reported") {
  Integrator<Eigen::VectorXcd> it([](const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) { dy = y.array().square() * 1e3; },
                                  fixed(0.1));
  Eigen::VectorXcd y = Eigen::VectorXcd::Ones(1);
  try {
    it.advance(y, 100.0);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IntegrationFailure);
  }
}

TEST_CASE("step control validation") {
  StepControl c;
  c.dt = 0.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c.dt = 1e-3;
  c.rtol = -1.0;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("steady state of a driven atom") {
  const double omega = 0.5, delta = 0.0;
  auto rhs = [&](const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) { bloch(omega, delta, y, dy); };
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(2);
  const SteadyResult res = evolve_to_steady<Eigen::VectorXcd>(y, rhs, SteadyCriterion{}, fixed(1e-3),
                                                              [](const Eigen::VectorXcd& v) { return v; });
  // Independent long run to t = 200.
  Eigen::VectorXcd ref = Eigen::VectorXcd::Zero(2);
  Integrator<Eigen::VectorXcd> it(rhs, fixed(1e-3));
  it.advance(ref, 200.0);
  CHECK(std::abs(y(1) - ref(1)) < 1e-8);
  CHECK(res.t_steady < 200.0);
  // closed form <e> = (Omega^2/4) / (Delta^2 + Gamma^2/4 + Omega^2/2)
  CHECK(std::abs(y(1).real() - (omega * omega / 4.0) / (0.25 + omega * omega / 2.0)) < 1e-8);
}

TEST_CASE("steady detection edge cases") {
  SUBCASE("fixed point is steady after one window") {
    Eigen::VectorXcd y = Eigen::VectorXcd::Zero(2);
    const SteadyResult res = evolve_to_steady<Eigen::VectorXcd>(
        y, [](const Eigen::VectorXcd& v, Eigen::VectorXcd& dv) { bloch(0.0, 0.0, v, dv); }, SteadyCriterion{},
        fixed(1e-3), [](const Eigen::VectorXcd& v) { return v; });
    CHECK(res.t_steady == 1.0);
  }
  SUBCASE("undamped motion never settles") {
    StepControl c = fixed(1e-2);
    c.t_max = 20.0;
    Eigen::VectorXcd y = Eigen::VectorXcd::Ones(1);
    try {
      evolve_to_steady<Eigen::VectorXcd>(
          y, [](const Eigen::VectorXcd& v, Eigen::VectorXcd& dv) { dv = cplx(0.0, 1.3) * v; }, SteadyCriterion{}, c,
          [](const Eigen::VectorXcd& v) { return v; });
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::SteadyStateFailure);
      CHECK(std::string(e.what()).find("residuals") != std::string::npos);
    }
  }
}

TEST_CASE("seven atoms at weak drive settle on the slowest collective time scale") {
  const AtomArray arr = build_line_array(7, 0.4, Vec3::UnitY(), TransitionKind::DeltaM0);
  const DriveField drive = plane_wave_drive(arr, 0.01, Vec3::UnitX(), 0.0);
  ExactEvolutionOptions opt;
  opt.control.method = StepMethod::AdaptiveRk45;
  opt.control.dt = 0.01;
  const ExactSteadyState ss = exact_steady_state(ground_state(7), drive, coupling_set(arr), opt);
  // Transients are led by the slowest mode amplitude, which decays at half its rate.
  const double slowest = eigenmodes(coupling_set(arr)).decay_rates.minCoeff();
  const double horizon = std::log(1.0 / opt.steady.rel_tol) / (0.5 * slowest);
  MESSAGE("slowest collective decay rate " << slowest << ", horizon " << horizon);
  CHECK(ss.info.t_steady > 5.0);
  CHECK(ss.info.t_steady < 1.5 * horizon);
  MESSAGE("7-atom weak-drive steady state at t = " << ss.info.t_steady);
}
