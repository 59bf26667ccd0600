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

#include "arraylight/exact.hpp"

#include <cmath>
#include <string>

namespace arraylight {

namespace {

using Index = Eigen::Index;

void require_atom_count(int n) {
  if (n < 1) fail(ErrorKind::InvalidArgument, "density matrix needs at least one atom");
  if (n > kMaxExactAtoms) {
    fail(ErrorKind::InvalidArgument,
         "exact solver is capped at " + std::to_string(kMaxExactAtoms) + " atoms (got " + std::to_string(n) + ")");
  }
}

void require_same_atoms(const DensityMatrix& rho, std::size_t n, const char* what) {
  if (static_cast<std::size_t>(rho.n_atoms) != n || rho.dim() != (Index{1} << rho.n_atoms)) {
    fail(ErrorKind::DimensionMismatch, std::string(what) + " does not match the density matrix size");
  }
}

DensityMatrix basis_state(int n_atoms, Index index) {
  require_atom_count(n_atoms);
  const Index dim = Index{1} << n_atoms;
  DensityMatrix rho{n_atoms, Eigen::MatrixXcd::Zero(dim, dim)};
  rho.data(index, index) = 1.0;
  return rho;
}

}  // namespace

DensityMatrix ground_state(int n_atoms) { return basis_state(n_atoms, 0); }

DensityMatrix all_excited_state(int n_atoms) {
  require_atom_count(n_atoms);
  return basis_state(n_atoms, (Index{1} << n_atoms) - 1);
}

DensityMatrix product_state(std::span<const Eigen::Matrix2cd> atoms) {
  const int n = static_cast<int>(atoms.size());
  require_atom_count(n);
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Ones(1, 1);
  // Atom n occupies bit n, so later atoms are the more significant factor.
  for (int k = 0; k < n; ++k) {
    const Eigen::Matrix2cd& a = atoms[static_cast<std::size_t>(k)];
    Eigen::MatrixXcd next(2 * out.rows(), 2 * out.cols());
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) next.block(r * out.rows(), c * out.cols(), out.rows(), out.cols()) = a(r, c) * out;
    out = std::move(next);
  }
  return DensityMatrix{n, std::move(out)};
}

LindbladOperator::LindbladOperator(const DriveField& drive, const CouplingSet& couplings)
    : n_atoms_(static_cast<int>(drive.size())) {
  require_atom_count(n_atoms_);
  if (couplings.size() != drive.size()) {
    fail(ErrorKind::DimensionMismatch, "drive and coupling set disagree on the atom count");
  }
  const int n = n_atoms_;
  const Index dim = Index{1} << n;
  std::vector<Eigen::Triplet<cplx>> entries;
  entries.reserve(static_cast<std::size_t>(dim) * static_cast<std::size_t>(1 + n + n * n / 4));
  const cplx half_decay(0.0, -0.5 * kGamma);
  for (Index a = 0; a < dim; ++a) {
    cplx diag = 0.0;
    for (int q = 0; q < n; ++q) {
      const Index bit = Index{1} << q;
      if (a & bit) {
        diag += -drive.detuning(q) + half_decay;
        // <a| sigma+_q |a - bit>
        entries.emplace_back(a, a ^ bit, 0.5 * drive.rabi_plus(static_cast<std::size_t>(q)));
      } else {
        // <a| sigma-_q |a + bit>
        entries.emplace_back(a, a | bit, 0.5 * drive.rabi_minus(static_cast<std::size_t>(q)));
      }
    }
    entries.emplace_back(a, a, diag);
    // -i g+_pq sigma+_p sigma-_q: column has q excited and p not, row swaps them.
    for (int p = 0; p < n; ++p) {
      const Index bp = Index{1} << p;
      if (!(a & bp)) continue;
      for (int q = 0; q < n; ++q) {
        const Index bq = Index{1} << q;
        if (q == p || (a & bq)) continue;
        const Index col = (a ^ bp) | bq;
        entries.emplace_back(a, col, cplx(0.0, -1.0) * couplings.g_plus(p, q));
      }
    }
  }
  h_eff_.resize(dim, dim);
  h_eff_.setFromTriplets(entries.begin(), entries.end());
  h_eff_.makeCompressed();

  jump_rates_ = couplings.gamma_nm;
  jump_rates_.diagonal().setConstant(kGamma);
}

void LindbladOperator::apply(const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& drho) const {
  const Index dim = Index{1} << n_atoms_;
  if (rho.rows() != dim || rho.cols() != dim) {
    fail(ErrorKind::DimensionMismatch, "density matrix size does not match the operator");
  }
  // The generator acts on the Hermitian part so rounding-level anti-Hermitian
  // components stay frozen instead of being amplified by the shortcut below.
  thread_local Eigen::MatrixXcd herm;
  herm = 0.5 * (rho + rho.adjoint());
  drho.resize(dim, dim);
  drho.noalias() = h_eff_ * herm;
  // -i (Y - Y^dag) with Y = H_eff rho, valid for Hermitian rho.
  const cplx minus_i(0.0, -1.0);
  for (Index b = 0; b < dim; ++b) {
    drho(b, b) = minus_i * (drho(b, b) - std::conj(drho(b, b)));
    for (Index a = b + 1; a < dim; ++a) {
      const cplx yab = drho(a, b);
      const cplx yba = drho(b, a);
      drho(a, b) = minus_i * (yab - std::conj(yba));
      drho(b, a) = minus_i * (yba - std::conj(yab));
    }
  }
  // Jumps: J(a, b) += Gamma_nm rho(a|n, b|m) for a_n = 0, b_m = 0.
  const int n = n_atoms_;
  for (int m = 0; m < n; ++m) {
    const Index bm = Index{1} << m;
    for (Index b = 0; b < dim; ++b) {
      if (b & bm) continue;
      const cplx* src = herm.col(b | bm).data();
      cplx* dst = drho.col(b).data();
      for (int q = 0; q < n; ++q) {
        const double rate = jump_rates_(q, m);
        if (rate == 0.0) continue;
        const Index bq = Index{1} << q;
        for (Index base = 0; base < dim; base += 2 * bq) {
          for (Index lo = 0; lo < bq; ++lo) dst[base + lo] += rate * src[base + lo + bq];
        }
      }
    }
  }
}

Eigen::MatrixXcd lindblad_rhs(const DensityMatrix& rho, const DriveField& drive, const CouplingSet& couplings) {
  require_same_atoms(rho, drive.size(), "drive");
  Eigen::MatrixXcd drho;
  LindbladOperator(drive, couplings).apply(rho.data, drho);
  return drho;
}

namespace {

void require_j(int j) {
  if (j < -1 || j > 1) fail(ErrorKind::InvalidArgument, "operator index j must be -1, 0 or +1");
}

}  // namespace

cplx expect_single(const DensityMatrix& rho, int n, int j) {
  const int atoms[1] = {n};
  const int js[1] = {j};
  return expect_multi(rho, atoms, js);
}

cplx expect_multi(const DensityMatrix& rho, std::span<const int> atoms, std::span<const int> js) {
  if (atoms.size() != js.size()) fail(ErrorKind::InvalidArgument, "atom and j lists differ in length");
  // Tr[P rho] = sum_a sum_b P(a, b) rho(b, a); P(a, b) is 1 when every listed
  // atom has the (row, column) bits of its operator and the rest agree.
  Index row_mask = 0, row_bits = 0, col_flip = 0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const int q = atoms[i];
    if (q < 0 || q >= rho.n_atoms) fail(ErrorKind::InvalidArgument, "atom index out of range");
    require_j(js[i]);
    const Index bit = Index{1} << q;
    if (row_mask & bit) fail(ErrorKind::InvalidArgument, "atom indices must be distinct");
    row_mask |= bit;
    if (js[i] >= 0) row_bits |= bit;   // e and sigma+ have the excited row
    if (js[i] != 0) col_flip |= bit;   // sigma+- change the bit
  }
  cplx sum = 0.0;
  for (Index a = 0; a < rho.dim(); ++a) {
    if ((a & row_mask) != row_bits) continue;
    sum += rho.data(a ^ col_flip, a);
  }
  return sum;
}

double detector_expectation(const DensityMatrix& rho, const DetectionDirection& dir) {
  const int n = rho.n_atoms;
  if (dir.phase_table.rows() != n) fail(ErrorKind::DimensionMismatch, "detection direction size mismatch");
  cplx total = 0.0;
  for (int l = 0; l < n; ++l) {
    total += expect_single(rho, l, 0);
    for (int m = 0; m < n; ++m) {
      if (m == l) continue;
      const int atoms[2] = {m, l};
      const int js[2] = {1, -1};
      total += dir.phase_table(m, l) * expect_multi(rho, atoms, js);
    }
  }
  if (std::abs(total.imag()) > 1e-10 * std::max(1.0, std::abs(total.real()))) {
    fail(ErrorKind::NumericalConsistency, "detector expectation has an imaginary residue");
  }
  return total.real();
}

Projection project_detection(const DensityMatrix& rho, const DetectionDirection& dir) {
  const int n = rho.n_atoms;
  if (dir.phase_table.rows() != n) fail(ErrorKind::DimensionMismatch, "detection direction size mismatch");
  const Index dim = rho.dim();
  // S- = sum_l c_l sigma-_l with c_l = e^{-i k.R_l} up to a global phase.
  Eigen::VectorXcd c(n);
  for (int l = 0; l < n; ++l) c(l) = dir.phase_table(0, l);

  Eigen::MatrixXcd left = Eigen::MatrixXcd::Zero(dim, dim);  // S- rho
  for (Index b = 0; b < dim; ++b) {
    for (int l = 0; l < n; ++l) {
      const Index bit = Index{1} << l;
      for (Index a = 0; a < dim; ++a) {
        if (!(a & bit)) left(a, b) += c(l) * rho.data(a | bit, b);
      }
    }
  }
  Projection out{DensityMatrix{n, Eigen::MatrixXcd::Zero(dim, dim)}, 0.0};
  for (int m = 0; m < n; ++m) {
    const Index bit = Index{1} << m;
    const cplx cm = std::conj(c(m));
    for (Index b = 0; b < dim; ++b) {
      if (b & bit) continue;
      out.state.data.col(b) += cm * left.col(b | bit);
    }
  }
  const cplx tr = out.state.data.trace();
  out.norm = tr.real();
  if (!(out.norm > 1e-14)) {
    fail(ErrorKind::ProjectionDegenerate, "detection projection has vanishing norm");
  }
  return out;
}

Eigen::VectorXcd exact_singles(const DensityMatrix& rho) {
  Eigen::VectorXcd out(2 * rho.n_atoms);
  for (int q = 0; q < rho.n_atoms; ++q) {
    out(2 * q) = expect_single(rho, q, -1);
    out(2 * q + 1) = expect_single(rho, q, 0);
  }
  return out;
}

ExactSteadyState exact_steady_state(const DensityMatrix& start, const DriveField& drive,
                                    const CouplingSet& couplings, const ExactEvolutionOptions& options) {
  require_same_atoms(start, drive.size(), "drive");
  const LindbladOperator op(drive, couplings);
  ExactSteadyState out{start, {}};
  const int n = start.n_atoms;
  out.info = evolve_to_steady<Eigen::MatrixXcd>(
      out.rho.data, [&op](const Eigen::MatrixXcd& y, Eigen::MatrixXcd& dy) { op.apply(y, dy); }, options.steady,
      options.control, [n](const Eigen::MatrixXcd& y) { return exact_singles(DensityMatrix{n, y}); });
  return out;
}

void evolve_exact(DensityMatrix& rho, const DriveField& drive, const CouplingSet& couplings,
                  const StepControl& control, std::span<const double> times,
                  const std::function<void(double, const DensityMatrix&)>& observe) {
  require_same_atoms(rho, drive.size(), "drive");
  const LindbladOperator op(drive, couplings);
  Integrator<Eigen::MatrixXcd> stepper(
      [&op](const Eigen::MatrixXcd& y, Eigen::MatrixXcd& dy) { op.apply(y, dy); }, control);
  const int n = rho.n_atoms;
  stepper.evolve(rho.data, times, [&](double t, const Eigen::MatrixXcd& y) {
    if (observe) observe(t, DensityMatrix{n, y});
  });
}

G2Curve g2_exact_from_state(const DensityMatrix& rho, const DriveField& drive, const CouplingSet& couplings,
                            const DetectionDirection& dir, std::span<const double> tau_grid,
                            const StepControl& control) {
  Projection proj = project_detection(rho, dir);
  DensityMatrix post{proj.state.n_atoms, proj.state.data / proj.norm};
  G2Curve curve;
  curve.intensity = proj.norm;
  evolve_exact(post, drive, couplings, control, tau_grid, [&](double t, const DensityMatrix& state) {
    curve.tau.push_back(t);
    curve.g2.push_back(detector_expectation(state, dir) / proj.norm);
  });
  return curve;
}

G2Curve g2_exact(const AtomArray& array, const DriveField& drive, const DetectionDirection& dir,
                 std::span<const double> tau_grid, const ExactEvolutionOptions& options) {
  const CouplingSet couplings = coupling_set(array);
  const ExactSteadyState steady =
      exact_steady_state(ground_state(static_cast<int>(array.size())), drive, couplings, options);
  G2Curve curve = g2_exact_from_state(steady.rho, drive, couplings, dir, tau_grid, options.control);
  curve.t_steady = steady.info.t_steady;
  return curve;
}

}  // namespace arraylight
