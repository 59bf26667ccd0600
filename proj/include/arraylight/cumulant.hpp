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

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "arraylight/core.hpp"
#include "arraylight/hierarchy.hpp"
#include "arraylight/integrate.hpp"
#include "arraylight/kernel.hpp"

namespace arraylight {

/// Drive terms of one atom: d<Q^j>/dt = s^j + sum_j' w^{jj'} <Q^j'>.
/// Rows and columns run over j = -1, 0, +1.
struct OneAtomTerms {
  std::vector<Eigen::Matrix3cd> w;
  std::vector<Eigen::Vector3cd> s;

  std::size_t size() const noexcept { return w.size(); }
};

OneAtomTerms one_atom_terms(const DriveField& drive);

/// Pair couplings feeding the hierarchy. The V and U tensors are sparse and
/// fixed by g+- alone:
///   V^{-1,-1} = -g+,  V^{+1,+1} = -g-,
///   U^{0,+1,-1} = -g+, U^{0,-1,+1} = -g-, U^{+1,0,+1} = 2 g-, U^{-1,0,-1} = 2 g+.
/// Diagonals are zero here (unlike CouplingSet).
struct TwoAtomTensors {
  Eigen::MatrixXcd g_plus;
  Eigen::MatrixXcd g_minus;
  Eigen::MatrixXd gamma_nm;

  std::size_t size() const noexcept { return static_cast<std::size_t>(g_plus.rows()); }
  Eigen::Matrix3cd v(int n, int m) const;
  cplx u(int n, int m, int j, int j1, int j2) const;
};

TwoAtomTensors two_atom_tensors(const CouplingSet& couplings);

namespace tensors {

struct VEntry {
  int j, j1;
  double coef;
  bool plus;  // coupling is g+ (else g-)
};

struct UEntry {
  int j, j1, j2;
  double coef;
  bool plus;
};

inline constexpr std::array<VEntry, 2> kV{{{-1, -1, -1.0, true}, {+1, +1, -1.0, false}}};
inline constexpr std::array<UEntry, 4> kU{
    {{0, +1, -1, -1.0, true}, {0, -1, +1, -1.0, false}, {+1, 0, +1, 2.0, false}, {-1, 0, -1, 2.0, true}}};

}  // namespace tensors

/// Which equations to integrate: truncation order, and the linear
/// approximation (order 1 with every <e_n> held at zero).
struct HierarchyModel {
  int order = 2;
  bool linear = false;
};

/// Right-hand side of the truncated hierarchy for fixed drive and couplings.
///
/// Order 1 costs O(N^2), order 2 O(N^3) through dense matrix products, order 3
/// O(N^4). Holds scratch buffers, so one instance serves one trajectory.
class HierarchyRhs {
 public:
  HierarchyRhs(OneAtomTerms one_atom, TwoAtomTensors two_atom, HierarchyModel model);

  const HierarchyLayout& layout() const noexcept { return layout_; }
  const HierarchyModel& model() const noexcept { return model_; }

  void operator()(const Eigen::VectorXcd& y, Eigen::VectorXcd& dy);

 private:
  void singles(const HierarchyView& y, Eigen::VectorXcd& dy);
  void pairs_dense(const Eigen::VectorXcd& y, Eigen::VectorXcd& dy);
  void pairs_from_triples(const HierarchyView& y, Eigen::VectorXcd& dy);
  void triples(const HierarchyView& y, Eigen::VectorXcd& dy);

  OneAtomTerms one_;
  TwoAtomTensors two_;
  HierarchyModel model_;
  HierarchyLayout layout_;
  Eigen::VectorXcd zeroed_;
  std::array<Eigen::VectorXcd, 3> single_cols_;
  std::array<Eigen::MatrixXcd, 9> dense_;
  std::array<Eigen::MatrixXcd, 9> nside_;
  std::array<Eigen::MatrixXcd, 6> products_;
  std::array<Eigen::ArrayXXcd, tensors::kU.size()> u_rb_;
  std::array<Eigen::ArrayXXcd, tensors::kU.size()> u_outer_;
  std::array<Eigen::MatrixXcd, 9> pair_direct_;
  Eigen::VectorXcd field_;
  Eigen::ArrayXXcd gp_pair_;
  std::array<Eigen::ArrayXcd, tensors::kU.size()> u_row_sums_;  // sum_m G_nm <Q_n^j1 Q_m^j2>
  // Order-2 constants: one-atom terms as columns over atoms, pair-internal term list.
  struct DirectOp {
    int coupling;  // 0 gamma, 1 g+, 2 g-
    cplx factor;
    int jx, jy;
  };
  std::array<Eigen::VectorXcd, 3> s_cols_;
  std::array<Eigen::VectorXcd, 9> w_cols_;
  Eigen::MatrixXcd gamma_c_;
  std::array<std::vector<DirectOp>, 9> direct_ops_;
};

/// Wraps a HierarchyRhs for the integrator (shared scratch, single trajectory).
Integrator<Eigen::VectorXcd>::Rhs hierarchy_rhs_function(const OneAtomTerms& one_atom,
                                                         const TwoAtomTensors& two_atom,
                                                         const HierarchyModel& model);

/// One-shot derivative; state.order() selects the equations.
HierarchyState rhs(const HierarchyState& state, const OneAtomTerms& one_atom, const TwoAtomTensors& two_atom);

/// Order-1 derivative with <e_n> replaced by 0 everywhere.
HierarchyState rhs_linear(const HierarchyState& state, const OneAtomTerms& one_atom,
                          const TwoAtomTensors& two_atom);

struct HierarchyOptions {
  StepControl control{};
  SteadyCriterion steady{};
};

struct HierarchySteadyState {
  HierarchyState state;
  SteadyResult info;
};

/// Singles of the state: the quantities the steady-state detector tracks.
Eigen::VectorXcd hierarchy_singles(const HierarchyState& state);

HierarchySteadyState hierarchy_steady_state(const HierarchyState& start, const OneAtomTerms& one_atom,
                                            const TwoAtomTensors& two_atom, bool linear,
                                            const HierarchyOptions& options);

void evolve_hierarchy(HierarchyState& state, const OneAtomTerms& one_atom, const TwoAtomTensors& two_atom,
                      bool linear, const StepControl& control, std::span<const double> times,
                      const std::function<void(double, const HierarchyState&)>& observe);

}  // namespace arraylight
