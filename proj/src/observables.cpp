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

#include "arraylight/observables.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "arraylight/errors.hpp"

namespace arraylight {

namespace {

template <class Pair, class Single>
ScatterRates rates_from(int n_atoms, const CouplingSet& cs, Pair&& pair, Single&& single) {
  if (static_cast<int>(cs.size()) != n_atoms) fail(ErrorKind::DimensionMismatch, "couplings and state differ in size");
  cplx total = 0.0, coherent = 0.0;
  for (int n = 0; n < n_atoms; ++n) {
    const cplx down_n = single(n, -1);
    total += kGamma * single(n, 0);
    coherent += kGamma * single(n, 1) * down_n;
    for (int m = 0; m < n_atoms; ++m) {
      if (m == n) continue;
      total += cs.gamma_nm(m, n) * pair(m, 1, n, -1);
      coherent += cs.gamma_nm(m, n) * single(m, 1) * down_n;
    }
  }
  const double tol = 1e-9 * std::max(1.0, std::abs(total.real()));
  if (std::abs(total.imag()) > tol || std::abs(coherent.imag()) > tol)
    fail(ErrorKind::NumericalConsistency, "scattering rate has an imaginary residue");
  return {total.real(), coherent.real(), total.real() - coherent.real()};
}

template <class Pair, class Single>
double intensity_from(int n_atoms, const DetectionDirection& dir, Pair&& pair, Single&& single) {
  if (dir.phase_table.rows() != n_atoms) fail(ErrorKind::DimensionMismatch, "detection direction size mismatch");
  cplx total = 0.0;
  for (int l = 0; l < n_atoms; ++l) {
    total += single(l, 0);
    for (int m = 0; m < n_atoms; ++m)
      if (m != l) total += dir.phase_table(m, l) * pair(m, 1, l, -1);
  }
  if (std::abs(total.imag()) > 1e-10 * std::max(1.0, std::abs(total.real())))
    fail(ErrorKind::NumericalConsistency, "directional intensity has an imaginary residue");
  return total.real();
}

auto hierarchy_pair(const HierarchyState& s) {
  return [&s](int n, int a, int m, int b) {
    const int atoms[2] = {n, m};
    const int js[2] = {a, b};
    return get_expectation(s, atoms, js);
  };
}

auto hierarchy_single(const HierarchyState& s) {
  return [&s](int n, int j) { return s.single(n, j); };
}

auto exact_pair(const DensityMatrix& rho) {
  return [&rho](int n, int a, int m, int b) {
    const int atoms[2] = {n, m};
    const int js[2] = {a, b};
    return expect_multi(rho, atoms, js);
  };
}

auto exact_single(const DensityMatrix& rho) {
  return [&rho](int n, int j) { return expect_single(rho, n, j); };
}

}  // namespace

ScatterRates scattering_rates(const HierarchyState& state, const CouplingSet& couplings) {
  return rates_from(state.n_atoms(), couplings, hierarchy_pair(state), hierarchy_single(state));
}

ScatterRates scattering_rates(const DensityMatrix& rho, const CouplingSet& couplings) {
  return rates_from(rho.n_atoms, couplings, exact_pair(rho), exact_single(rho));
}

double delta_gamma_c(const HierarchyState& steady_mf, const HierarchyState& steady_lin, const CouplingSet& couplings) {
  if (steady_mf.n_atoms() != steady_lin.n_atoms())
    fail(ErrorKind::DimensionMismatch, "states cover different atom counts");
  const double gc = scattering_rates(steady_mf, couplings).gamma_coherent;
  const double gc_lin = scattering_rates(steady_lin, couplings).gamma_coherent;
  if (std::abs(gc) < 1e-14) fail(ErrorKind::Domain, "coherent scattering rate is degenerate");
  return (gc_lin - gc) / gc;
}

double directional_intensity(const HierarchyState& state, const DetectionDirection& dir) {
  return intensity_from(state.n_atoms(), dir, hierarchy_pair(state), hierarchy_single(state));
}

double directional_intensity(const DensityMatrix& rho, const DetectionDirection& dir) {
  return detector_expectation(rho, dir);
}

namespace {

struct FitModel {
  const std::vector<double>& x;
  const std::vector<double>& y;

  double cost(const Eigen::Vector4d& p, Eigen::VectorXd* r = nullptr, Eigen::MatrixXd* jac = nullptr) const {
    const auto n = static_cast<Eigen::Index>(x.size());
    if (r) r->resize(n);
    if (jac) jac->resize(n, 4);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double u = (x[static_cast<std::size_t>(i)] - p(0)) / p(1);
      const double f = 1.0 / (1.0 + u * u);
      const double res = p(2) * f + p(3) - y[static_cast<std::size_t>(i)];
      sum += res * res;
      if (r) (*r)(i) = res;
      if (jac) {
        (*jac)(i, 0) = p(2) * 2.0 * u * f * f / p(1);
        (*jac)(i, 1) = p(2) * 2.0 * u * u * f * f / p(1);
        (*jac)(i, 2) = f;
        (*jac)(i, 3) = 1.0;
      }
    }
    return sum;
  }
};

}  // namespace

LorentzianFit lorentzian_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) fail(ErrorKind::DimensionMismatch, "fit abscissa and data differ in length");
  if (x.size() < 8) fail(ErrorKind::InvalidArgument, "a Lorentzian fit needs at least 8 points");
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) fail(ErrorKind::InvalidArgument, "fit data must be finite");
  const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  const double lo = *lo_it, hi = *hi_it;
  const double span = hi - lo;
  if (!(span > 0.0)) fail(ErrorKind::InvalidArgument, "fit abscissa must span an interval");

  const FitModel model{x, y};
  const auto n = static_cast<double>(x.size());

  // Coarse scan over center and width; amplitude and offset by linear least squares.
  Eigen::Vector4d best(0.5 * (lo + hi), span / 4.0, 0.0, 0.0);
  double best_cost = std::numeric_limits<double>::infinity();
  constexpr int kCenters = 201, kWidths = 60;
  for (int ic = 0; ic < kCenters; ++ic) {
    const double x0 = lo + span * ic / (kCenters - 1);
    for (int iw = 0; iw < kWidths; ++iw) {
      const double w = span * 1e-3 * std::pow(1e4, static_cast<double>(iw) / (kWidths - 1));
      double sf = 0.0, sff = 0.0, sy = 0.0, sfy = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double u = (x[i] - x0) / w;
        const double f = 1.0 / (1.0 + u * u);
        sf += f;
        sff += f * f;
        sy += y[i];
        sfy += f * y[i];
      }
      const double det = sff * n - sf * sf;
      if (std::abs(det) < 1e-300) continue;
      const double amp = (sfy * n - sf * sy) / det;
      const double off = (sff * sy - sf * sfy) / det;
      const Eigen::Vector4d p(x0, w, amp, off);
      const double c = model.cost(p);
      if (c < best_cost) {
        best_cost = c;
        best = p;
      }
    }
  }

  // Levenberg-Marquardt refinement.
  Eigen::Vector4d p = best;
  double cost = best_cost;
  double lambda = 1e-3;
  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  const double y_scale = std::max(Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size())).squaredNorm(), 1e-300);
  constexpr int kMaxIterations = 500;
  int it = 0;
  bool converged = false;
  for (; it < kMaxIterations; ++it) {
    model.cost(p, &r, &jac);
    const Eigen::Matrix4d jtj = jac.transpose() * jac;
    const Eigen::Vector4d jtr = jac.transpose() * r;
    if (jtr.norm() <= 1e-15 * std::sqrt(y_scale) * std::max(1.0, jtj.diagonal().cwiseSqrt().maxCoeff()) ||
        cost <= 1e-30 * y_scale) {
      converged = true;
      break;
    }
    bool accepted = false;
    for (int tries = 0; tries < 60 && !accepted; ++tries) {
      Eigen::Matrix4d a = jtj;
      a.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-300);
      const Eigen::Vector4d step = a.ldlt().solve(-jtr);
      const Eigen::Vector4d trial = p + step;
      const double trial_cost = model.cost(trial);
      if (std::isfinite(trial_cost) && trial_cost <= cost) {
        const double drop = cost - trial_cost;
        p = trial;
        const double old_cost = cost;
        cost = trial_cost;
        lambda = std::max(lambda / 3.0, 1e-15);
        accepted = true;
        if (step.cwiseAbs().maxCoeff() <= 1e-13 * (p.cwiseAbs().maxCoeff() + 1e-300) ||
            drop <= 1e-16 * old_cost)
          converged = true;
      } else {
        lambda *= 4.0;
      }
    }
    if (!accepted) {
      // No downhill step exists at any damping: a stationary point.
      converged = true;
    }
    if (converged) break;
  }
  const double rms = std::sqrt(cost / n);
  if (!converged || !p.allFinite()) {
    std::ostringstream os;
    os << "Lorentzian fit did not converge after " << it << " iterations (rms residual " << rms << ")";
    fail(ErrorKind::FitFailure, os.str());
  }
  return {p(0), std::abs(p(1)), p(2), p(3), rms, it};
}

ModeSet eigenmodes(const CouplingSet& couplings) {
  const Eigen::Index n = couplings.g_plus.rows();
  if (n == 0) fail(ErrorKind::InvalidArgument, "no atoms");
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(couplings.g_plus, true);
  if (solver.info() != Eigen::Success) fail(ErrorKind::Eigensolver, "complex eigensolver failed");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  const Eigen::VectorXcd& values = solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return values(a).real() > values(b).real(); });
  ModeSet set;
  set.eigenvalues.resize(n);
  set.modes.resize(n, n);
  set.decay_rates.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    Eigen::VectorXcd u = solver.eigenvectors().col(src);
    u /= u.norm();
    // Phase reference: first entry within rounding of the largest magnitude,
    // so mirror-symmetric modes pick the same atom every time.
    const double peak = u.cwiseAbs().maxCoeff();
    Eigen::Index big = 0;
    while (std::abs(u(big)) < peak * (1.0 - 1e-9)) ++big;
    u *= std::conj(u(big)) / std::abs(u(big));
    u(big) = std::abs(u(big));
    set.eigenvalues(k) = values(src);
    set.modes.col(k) = u;
    set.decay_rates(k) = 2.0 * values(src).real();
  }
  return set;
}

}  // namespace arraylight
