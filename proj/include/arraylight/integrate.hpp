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

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <sstream>
#include <vector>

#include "arraylight/errors.hpp"

namespace arraylight {

enum class StepMethod { FixedRk4, AdaptiveRk45 };

struct StepControl {
  StepMethod method = StepMethod::FixedRk4;
  double dt = 1e-3;      // fixed step, or first trial step when adaptive
  double rtol = 1e-8;
  double atol = 1e-10;
  double t_max = 200.0;  // horizon for evolve_to_steady
  double dt_min = 1e-10;

  void validate() const {
    if (!(dt > 0.0)) fail(ErrorKind::InvalidArgument, "step control needs dt > 0");
    if (!(rtol > 0.0) || !(atol > 0.0)) fail(ErrorKind::InvalidArgument, "tolerances must be > 0");
    if (!(t_max > 0.0)) fail(ErrorKind::InvalidArgument, "t_max must be > 0");
  }
};

/// A state is steady once every tracked quantity moved by less than
/// rel_tol * max(|x|, abs_floor) across one window.
struct SteadyCriterion {
  double window = 1.0;
  double rel_tol = 1e-8;
  double abs_floor = 1e-10;
};

/// Explicit Runge-Kutta driver over any Eigen dense state (vector or matrix).
/// The right-hand side is autonomous: rhs(y, dy) writes dy = f(y).
template <class State>
class Integrator {
 public:
  using Rhs = std::function<void(const State&, State&)>;
  using Observer = std::function<void(double, const State&)>;

  Integrator(Rhs rhs, StepControl control) : rhs_(std::move(rhs)), control_(control) {
    control_.validate();
    h_adaptive_ = control_.dt;
  }

  const StepControl& control() const noexcept { return control_; }
  double time() const noexcept { return t_; }
  void set_time(double t) noexcept { t_ = t; }
  long steps_taken() const noexcept { return steps_; }

  /// Advance y from the current time to t_end.
  void advance(State& y, double t_end) {
    if (control_.method == StepMethod::FixedRk4) {
      while (t_ < t_end) {
        const double remaining = t_end - t_;
        // Land exactly on t_end without leaving a sliver step behind.
        const double h = remaining <= control_.dt * (1.0 + 1e-9) ? remaining : control_.dt;
        rk4_step(y, h);
        t_ = (h == remaining) ? t_end : t_ + h;
        check_finite(y);
      }
    } else {
      while (t_ < t_end) {
        double h = std::min(h_adaptive_, t_end - t_);
        const bool hits_end = h >= t_end - t_;
        if (h < control_.dt_min && !hits_end) {
          std::ostringstream os;
          os << "adaptive step underflow at t = " << t_;
          fail(ErrorKind::IntegrationFailure, os.str());
        }
        const double err = dp45_step(y, h);
        if (err <= 1.0) {
          y.swap(y_new_);
          t_ = hits_end ? t_end : t_ + h;
          ++steps_;
          check_finite(y);
          fsal_valid_ = true;
          k1_.swap(k7_);
          const double grow = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
          const double proposal = h * std::clamp(grow, 0.2, 5.0);
          // A step clipped to hit a sample time says little about the scale.
          if (!hits_end || proposal > h_adaptive_) h_adaptive_ = proposal;
        } else {
          h_adaptive_ = h * std::clamp(0.9 * std::pow(err, -0.2), 0.1, 1.0);
        }
      }
    }
  }

  /// Evolve through the sorted sample times, calling observe at each.
  void evolve(State& y, std::span<const double> sample_times, const Observer& observe) {
    for (double ts : sample_times) {
      if (ts < t_) fail(ErrorKind::InvalidArgument, "sample times must be sorted and not in the past");
      advance(y, ts);
      if (observe) observe(t_, y);
    }
  }

  /// Invalidate the cached first stage after y was modified externally.
  void reset_cache() noexcept { fsal_valid_ = false; }

 private:
  Rhs rhs_;
  StepControl control_;
  double t_ = 0.0;
  long steps_ = 0;
  double h_adaptive_ = 0.0;
  bool fsal_valid_ = false;
  State k1_, k2_, k3_, k4_, k5_, k6_, k7_, tmp_, y_new_;

  static void check_finite(const State& y) {
    if (!y.allFinite()) fail(ErrorKind::IntegrationFailure, "non-finite state encountered");
  }

  void rk4_step(State& y, double h) {
    rhs_(y, k1_);
    tmp_ = y + (0.5 * h) * k1_;
    rhs_(tmp_, k2_);
    tmp_ = y + (0.5 * h) * k2_;
    rhs_(tmp_, k3_);
    tmp_ = y + h * k3_;
    rhs_(tmp_, k4_);
    y += (h / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
    ++steps_;
  }

  // Dormand-Prince 5(4); returns the scaled error norm, result in y_new_.
  double dp45_step(const State& y, double h) {
    if (!fsal_valid_) {
      rhs_(y, k1_);
      fsal_valid_ = true;
    }
    tmp_ = y + h * (1.0 / 5.0) * k1_;
    rhs_(tmp_, k2_);
    tmp_ = y + h * ((3.0 / 40.0) * k1_ + (9.0 / 40.0) * k2_);
    rhs_(tmp_, k3_);
    tmp_ = y + h * ((44.0 / 45.0) * k1_ - (56.0 / 15.0) * k2_ + (32.0 / 9.0) * k3_);
    rhs_(tmp_, k4_);
    tmp_ = y + h * ((19372.0 / 6561.0) * k1_ - (25360.0 / 2187.0) * k2_ + (64448.0 / 6561.0) * k3_ -
                    (212.0 / 729.0) * k4_);
    rhs_(tmp_, k5_);
    tmp_ = y + h * ((9017.0 / 3168.0) * k1_ - (355.0 / 33.0) * k2_ + (46732.0 / 5247.0) * k3_ +
                    (49.0 / 176.0) * k4_ - (5103.0 / 18656.0) * k5_);
    rhs_(tmp_, k6_);
    y_new_ = y + h * ((35.0 / 384.0) * k1_ + (500.0 / 1113.0) * k3_ + (125.0 / 192.0) * k4_ -
                      (2187.0 / 6784.0) * k5_ + (11.0 / 84.0) * k6_);
    rhs_(y_new_, k7_);
    // Difference between the 5th and embedded 4th order solutions.
    tmp_ = h * ((71.0 / 57600.0) * k1_ - (71.0 / 16695.0) * k3_ + (71.0 / 1920.0) * k4_ -
                (17253.0 / 339200.0) * k5_ + (22.0 / 525.0) * k6_ - (1.0 / 40.0) * k7_);
    const auto scale = (control_.atol + control_.rtol * y.array().abs().max(y_new_.array().abs()));
    const double err = (tmp_.array().abs() / scale).maxCoeff();
    if (!(err <= 1.0)) {
      // k1 still belongs to y; the rejected y_new stages are discarded.
      return std::isfinite(err) ? err : 1e10;
    }
    return err;
  }
};

struct SteadyResult {
  double t_steady = 0.0;
  double residual = 0.0;
  std::vector<double> residual_trace;
};

/// Evolve window by window until the tracked observables stop moving.
/// Throws SteadyStateFailure (with the last residuals) past control.t_max.
template <class State, class Tracker>
SteadyResult evolve_to_steady(State& y, const typename Integrator<State>::Rhs& rhs,
                              const SteadyCriterion& criterion, const StepControl& control,
                              Tracker&& track) {
  if (!(criterion.window > 0.0) || !(criterion.rel_tol > 0.0)) {
    fail(ErrorKind::InvalidArgument, "steady criterion needs window > 0 and rel_tol > 0");
  }
  Integrator<State> stepper(rhs, control);
  SteadyResult result;
  Eigen::VectorXcd previous = track(y);
  double t = 0.0;
  while (true) {
    t += criterion.window;
    stepper.advance(y, t);
    Eigen::VectorXcd current = track(y);
    double residual = 0.0;
    for (Eigen::Index i = 0; i < current.size(); ++i) {
      const double denom = std::max(std::abs(current(i)), criterion.abs_floor);
      residual = std::max(residual, std::abs(current(i) - previous(i)) / denom);
    }
    result.residual_trace.push_back(residual);
    result.residual = residual;
    if (residual < criterion.rel_tol) {
      result.t_steady = t;
      return result;
    }
    if (t >= control.t_max) {
      std::ostringstream os;
      os << "no steady state by t = " << t << "; last residuals:";
      const std::size_t from = result.residual_trace.size() > 5 ? result.residual_trace.size() - 5 : 0;
      for (std::size_t i = from; i < result.residual_trace.size(); ++i) os << ' ' << result.residual_trace[i];
      fail(ErrorKind::SteadyStateFailure, os.str());
    }
    previous = std::move(current);
  }
}

}  // namespace arraylight
