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

#include <cmath>
#include <complex>
#include <random>
#include <span>
#include <vector>

#include "arraylight/core.hpp"
#include "arraylight/exact.hpp"
#include "arraylight/hierarchy.hpp"
#include "arraylight/kernel.hpp"

namespace testutil {

using arraylight::cplx;

inline Eigen::MatrixXcd random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> dist;
  Eigen::MatrixXcd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = cplx(dist(rng), dist(rng));
  return m;
}

/// Random positive density matrix with unit trace.
inline arraylight::DensityMatrix random_density(int n_atoms, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Eigen::Index dim = Eigen::Index{1} << n_atoms;
  const Eigen::MatrixXcd a = random_matrix(dim, dim, rng);
  Eigen::MatrixXcd rho = a * a.adjoint();
  rho /= rho.trace().real();
  return {n_atoms, rho};
}

/// Random single-atom state in the (g, e) basis.
inline Eigen::Matrix2cd random_qubit(std::mt19937_64& rng) {
  const Eigen::MatrixXcd a = random_matrix(2, 2, rng);
  Eigen::Matrix2cd rho = a * a.adjoint();
  return rho / rho.trace().real();
}

inline arraylight::HierarchyState hierarchy_of(const arraylight::DensityMatrix& rho, int order) {
  return arraylight::hierarchy_from(rho.n_atoms, order, [&](std::span<const int> atoms, std::span<const int> js) {
    return arraylight::expect_multi(rho, atoms, js);
  });
}

inline double max_abs_diff(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

/// Drive with distinct per-atom amplitudes, phases and detunings.
inline arraylight::DriveField irregular_drive(int n_atoms, double omega, double delta) {
  arraylight::DriveField d;
  d.rabi.resize(n_atoms);
  d.detuning.resize(n_atoms);
  for (int n = 0; n < n_atoms; ++n) {
    d.rabi(n) = std::polar(omega * (1.0 + 0.1 * n), 0.7 * n + 0.2);
    d.detuning(n) = delta * (1.0 - 0.15 * n);
  }
  return d;
}

/// Irregular 3D cluster with pair distances around 0.3-0.6 lambda.
inline arraylight::AtomArray cluster(int n_atoms, arraylight::TransitionKind kind) {
  std::vector<arraylight::Vec3> pos;
  for (int n = 0; n < n_atoms; ++n)
    pos.emplace_back(0.31 * n + 0.05 * std::sin(1.3 * n), 0.17 * std::cos(2.1 * n), 0.23 * std::sin(0.9 * n + 0.4));
  return arraylight::AtomArray(pos, kind);
}

}  // namespace testutil
