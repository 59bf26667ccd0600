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
#include <Eigen/SparseCore>

#include <span>
#include <vector>

#include "arraylight/core.hpp"
#include "arraylight/integrate.hpp"
#include "arraylight/kernel.hpp"

namespace arraylight {

inline constexpr int kMaxExactAtoms = 12;

/// Dense N-atom density matrix. Basis index bit n set means atom n excited.
struct DensityMatrix {
  int n_atoms = 0;
  Eigen::MatrixXcd data;

  Eigen::Index dim() const noexcept { return data.rows(); }
  cplx trace() const { return data.trace(); }
};

DensityMatrix ground_state(int n_atoms);
DensityMatrix all_excited_state(int n_atoms);

/// Tensor product of single-atom 2x2 states in the (g, e) basis.
DensityMatrix product_state(std::span<const Eigen::Matrix2cd> atoms);

/// Lindblad generator for a fixed drive and coupling set.
///
/// Written as d rho/dt = -i (H_eff rho - rho H_eff^dag) + sum_nm Gamma_nm
/// sigma-_n rho sigma+_m with Gamma_nn = Gamma, where H_eff carries the drive,
/// the exchange terms -i g+_nm sigma+_n sigma-_m and -i Gamma/2 per excitation.
/// H_eff is a bit-indexed sparse matrix; the jump term is applied by strides.
/// apply() takes a Hermitian rho.
class LindbladOperator {
 public:
  LindbladOperator(const DriveField& drive, const CouplingSet& couplings);

  int n_atoms() const noexcept { return n_atoms_; }
  void apply(const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& drho) const;

 private:
  int n_atoms_;
  Eigen::SparseMatrix<cplx> h_eff_;
  Eigen::MatrixXd jump_rates_;
};

Eigen::MatrixXcd lindblad_rhs(const DensityMatrix& rho, const DriveField& drive, const CouplingSet& couplings);

/// Tr[Q_n^j rho] with Q^{-1} = sigma-, Q^0 = e, Q^{+1} = sigma+.
cplx expect_single(const DensityMatrix& rho, int n, int j);

/// Tr[prod_i Q_{atoms[i]}^{js[i]} rho]; atoms must be distinct.
cplx expect_multi(const DensityMatrix& rho, std::span<const int> atoms, std::span<const int> js);

/// <S+ S-> for the collective lowering operator S- = sum_l e^{-i k.R_l} sigma-_l.
double detector_expectation(const DensityMatrix& rho, const DetectionDirection& dir);

struct Projection {
  DensityMatrix state;  // S- rho S+, not normalized
  double norm = 0.0;    // its trace
};

Projection project_detection(const DensityMatrix& rho, const DetectionDirection& dir);

struct ExactEvolutionOptions {
  StepControl control{};
  SteadyCriterion steady{};
};

struct ExactSteadyState {
  DensityMatrix rho;
  SteadyResult info;
};

/// All single-atom expectations (sigma-, e per atom): the steady-state tracker.
Eigen::VectorXcd exact_singles(const DensityMatrix& rho);

ExactSteadyState exact_steady_state(const DensityMatrix& start, const DriveField& drive,
                                    const CouplingSet& couplings, const ExactEvolutionOptions& options);

/// Evolve rho through the sample times, reporting each sample.
void evolve_exact(DensityMatrix& rho, const DriveField& drive, const CouplingSet& couplings,
                  const StepControl& control, std::span<const double> times,
                  const std::function<void(double, const DensityMatrix&)>& observe);

struct G2Curve {
  std::vector<double> tau;
  std::vector<double> g2;
  double intensity = 0.0;   // <S+ S-> at the detection time
  double t_steady = 0.0;
};

/// g2(tau) from a given pre-detection state: project, renormalize, re-evolve.
G2Curve g2_exact_from_state(const DensityMatrix& rho, const DriveField& drive, const CouplingSet& couplings,
                            const DetectionDirection& dir, std::span<const double> tau_grid,
                            const StepControl& control);

/// Full pipeline: ground state -> steady state -> detection -> g2 on tau_grid.
G2Curve g2_exact(const AtomArray& array, const DriveField& drive, const DetectionDirection& dir,
                 std::span<const double> tau_grid, const ExactEvolutionOptions& options);

}  // namespace arraylight
