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

#include "arraylight/cumulant.hpp"

#include <sstream>
#include <utility>

#include "arraylight/errors.hpp"

namespace arraylight {

namespace {

using tensors::kU;
using tensors::kV;

constexpr int kNone = 2;  // identity slot in a direct term

struct DirectTerm {
  cplx coef;
  int jx, jy;
};

// Terms from the coupling internal to a pair (x, y) for the target
// <Q_x^a Q_y^b>. Each term multiplies <Q_x^jx Q_y^jy>, kNone meaning identity.
int direct_terms(int a, int b, double gamma, cplx gp, cplx gm, std::array<DirectTerm, 3>& out) {
  if (a == -1 && b == 1) {
    out[0] = {2.0 * gamma, 0, 0};
    out[1] = {-gp, kNone, 0};
    out[2] = {-gm, 0, kNone};
    return 3;
  }
  if (a == 1 && b == -1) {
    out[0] = {2.0 * gamma, 0, 0};
    out[1] = {-gm, kNone, 0};
    out[2] = {-gp, 0, kNone};
    return 3;
  }
  if (a == 0 && b == 1) {
    out[0] = {-gp, 1, 0};
    return 1;
  }
  if (a == 0 && b == -1) {
    out[0] = {-gm, -1, 0};
    return 1;
  }
  if (a == 1 && b == 0) {
    out[0] = {-gp, 0, 1};
    return 1;
  }
  if (a == -1 && b == 0) {
    out[0] = {-gm, 0, -1};
    return 1;
  }
  return 0;
}

// Four-operator value with the fourth cumulant set to zero.
struct Op {
  int atom, j;
};

cplx quadruple_closure(const HierarchyView& y, const std::array<Op, 4>& q) {
  auto s = [&](int i) { return y.single(q[i].atom, q[i].j); };
  auto p = [&](int i, int k) { return y.pair(q[i].atom, q[i].j, q[k].atom, q[k].j); };
  auto t = [&](int i, int k, int l) {
    return y.triple(q[i].atom, q[i].j, q[k].atom, q[k].j, q[l].atom, q[l].j);
  };
  const cplx s0 = s(0), s1 = s(1), s2 = s(2), s3 = s(3);
  const cplx p01 = p(0, 1), p02 = p(0, 2), p03 = p(0, 3), p12 = p(1, 2), p13 = p(1, 3), p23 = p(2, 3);
  cplx v = t(1, 2, 3) * s0 + t(0, 2, 3) * s1 + t(0, 1, 3) * s2 + t(0, 1, 2) * s3;
  v += p01 * p23 + p02 * p13 + p03 * p12;
  v -= 2.0 * (p01 * s2 * s3 + p02 * s1 * s3 + p03 * s1 * s2 + p12 * s0 * s3 + p13 * s0 * s2 + p23 * s0 * s1);
  v += 6.0 * s0 * s1 * s2 * s3;
  return v;
}

}  // namespace

OneAtomTerms one_atom_terms(const DriveField& drive) {
  if (static_cast<std::size_t>(drive.detuning.size()) != drive.size())
    fail(ErrorKind::DimensionMismatch, "drive rabi and detuning lengths differ");
  OneAtomTerms terms;
  const cplx i1(0.0, 1.0);
  for (std::size_t n = 0; n < drive.size(); ++n) {
    const cplx op = drive.rabi_plus(n);
    const cplx om = drive.rabi_minus(n);
    const double delta = drive.detuning(static_cast<Eigen::Index>(n));
    Eigen::Matrix3cd w;
    w << i1 * delta - kGamma / 2.0, i1 * op, 0.0,  //
        i1 * om / 2.0, -kGamma, -i1 * op / 2.0,    //
        0.0, -i1 * om, -i1 * delta - kGamma / 2.0;
    terms.w.push_back(w);
    terms.s.emplace_back(-i1 * op / 2.0, 0.0, i1 * om / 2.0);
  }
  return terms;
}

TwoAtomTensors two_atom_tensors(const CouplingSet& couplings) {
  TwoAtomTensors t;
  t.g_plus = couplings.g_plus;
  t.g_minus = couplings.g_minus;
  t.gamma_nm = couplings.gamma_nm;
  t.g_plus.diagonal().setZero();
  t.g_minus.diagonal().setZero();
  t.gamma_nm.diagonal().setZero();
  return t;
}

Eigen::Matrix3cd TwoAtomTensors::v(int n, int m) const {
  Eigen::Matrix3cd out = Eigen::Matrix3cd::Zero();
  for (const auto& e : kV) out(jslot(e.j), jslot(e.j1)) = e.coef * (e.plus ? g_plus(n, m) : g_minus(n, m));
  return out;
}

cplx TwoAtomTensors::u(int n, int m, int j, int j1, int j2) const {
  for (const auto& e : kU)
    if (e.j == j && e.j1 == j1 && e.j2 == j2) return e.coef * (e.plus ? g_plus(n, m) : g_minus(n, m));
  return 0.0;
}

HierarchyRhs::HierarchyRhs(OneAtomTerms one_atom, TwoAtomTensors two_atom, HierarchyModel model)
    : one_(std::move(one_atom)), two_(std::move(two_atom)), model_(model) {
  const std::size_t n = one_.size();
  if (n == 0) fail(ErrorKind::InvalidArgument, "hierarchy needs at least one atom");
  if (two_.size() != n || one_.s.size() != n)
    fail(ErrorKind::DimensionMismatch, "one-atom and two-atom terms cover different atom counts");
  if (model_.linear && model_.order != 1)
    fail(ErrorKind::InvalidArgument, "the linear approximation is defined for order 1 only");
  layout_ = HierarchyLayout(static_cast<int>(n), model_.order);
  if (model_.order != 2) return;
  const Eigen::Index nn = static_cast<Eigen::Index>(n);
  for (int a = 0; a < 3; ++a) {
    s_cols_[static_cast<std::size_t>(a)].resize(nn);
    for (int c = 0; c < 3; ++c) w_cols_[static_cast<std::size_t>(3 * a + c)].resize(nn);
    for (Eigen::Index i = 0; i < nn; ++i) {
      s_cols_[static_cast<std::size_t>(a)](i) = one_.s[static_cast<std::size_t>(i)](a);
      for (int c = 0; c < 3; ++c) w_cols_[static_cast<std::size_t>(3 * a + c)](i) = one_.w[static_cast<std::size_t>(i)](a, c);
    }
  }
  gamma_c_ = two_.gamma_nm.cast<cplx>();
  // Which coupling each pair-internal term carries, found by probing with unit couplings.
  std::array<DirectTerm, 3> probe{};
  for (int a = -1; a <= 1; ++a)
    for (int b = -1; b <= 1; ++b) {
      auto& ops = direct_ops_[static_cast<std::size_t>(3 * jslot(a) + jslot(b))];
      for (int coupling = 0; coupling < 3; ++coupling) {
        const int count = direct_terms(a, b, coupling == 0 ? 1.0 : 0.0, coupling == 1 ? 1.0 : 0.0,
                                       coupling == 2 ? 1.0 : 0.0, probe);
        for (int k = 0; k < count; ++k) {
          const auto& t = probe[static_cast<std::size_t>(k)];
          if (t.coef != 0.0) ops.push_back({coupling, t.coef, t.jx, t.jy});
        }
      }
    }
}

void HierarchyRhs::operator()(const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
  if (y.size() != layout_.size) fail(ErrorKind::DimensionMismatch, "state size does not match the hierarchy");
  dy.setZero(layout_.size);
  const Eigen::VectorXcd* src = &y;
  if (model_.linear) {
    zeroed_ = y;
    for (int n = 0; n < layout_.n_atoms; ++n) zeroed_(layout_.single_offset(n) + 1) = 0.0;
    src = &zeroed_;
  }
  const HierarchyView view(layout_, src->data());
  for (int j = -1; j <= 1; ++j) {
    auto& col = single_cols_[static_cast<std::size_t>(jslot(j))];
    col.resize(layout_.n_atoms);
    for (int n = 0; n < layout_.n_atoms; ++n) col(n) = view.single(n, j);
  }
  // Order 2 first: its dense pass also yields the pair sums the singles need.
  if (model_.order == 2) pairs_dense(*src, dy);
  singles(view, dy);
  if (model_.order == 3) {
    pairs_from_triples(view, dy);
    triples(view, dy);
  }
  if (model_.linear)
    for (int n = 0; n < layout_.n_atoms; ++n) dy(layout_.single_offset(n) + 1) = 0.0;
}

void HierarchyRhs::singles(const HierarchyView& y, Eigen::VectorXcd& dy) {
  const int n_atoms = layout_.n_atoms;
  for (int n = 0; n < n_atoms; ++n) {
    Eigen::Vector3cd local(y.single(n, -1), y.single(n, 0), y.single(n, 1));
    dy.segment<3>(layout_.single_offset(n)) += one_.s[static_cast<std::size_t>(n)] + one_.w[static_cast<std::size_t>(n)] * local;
  }
  // V: sum_m c G_nm <Q_m^j1>
  for (const auto& e : kV) {
    const auto& g = e.plus ? two_.g_plus : two_.g_minus;
    field_.noalias() = g * single_cols_[static_cast<std::size_t>(jslot(e.j1))];
    for (int n = 0; n < n_atoms; ++n) dy(layout_.single_offset(n) + jslot(e.j)) += e.coef * field_(n);
  }
  // U: sum_m c G_nm <Q_n^j1 Q_m^j2>
  for (std::size_t k = 0; k < kU.size(); ++k) {
    const auto& e = kU[k];
    const auto& g = e.plus ? two_.g_plus : two_.g_minus;
    if (model_.order == 2) {
      for (int n = 0; n < n_atoms; ++n) dy(layout_.single_offset(n) + jslot(e.j)) += e.coef * u_row_sums_[k](n);
    } else if (model_.order == 1) {
      field_.noalias() = g * single_cols_[static_cast<std::size_t>(jslot(e.j2))];
      for (int n = 0; n < n_atoms; ++n)
        dy(layout_.single_offset(n) + jslot(e.j)) += e.coef * y.single(n, e.j1) * field_(n);
    } else {
      for (int n = 0; n < n_atoms; ++n) {
        cplx acc = 0.0;
        for (int m = 0; m < n_atoms; ++m)
          if (m != n) acc += g(n, m) * y.pair(n, e.j1, m, e.j2);
        dy(layout_.single_offset(n) + jslot(e.j)) += e.coef * acc;
      }
    }
  }
}

void HierarchyRhs::pairs_dense(const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
  const int n_atoms = layout_.n_atoms;
  const Eigen::Index nn = n_atoms;
  const HierarchyView view(layout_, y.data());
  auto dense = [&](int a, int b) -> Eigen::MatrixXcd& { return dense_[static_cast<std::size_t>(3 * jslot(a) + jslot(b))]; };
  auto scol = [&](int j) -> const Eigen::VectorXcd& { return single_cols_[static_cast<std::size_t>(jslot(j))]; };

  // Dense pair matrices P^{ab}(n, m) = <Q_n^a Q_m^b>, zero diagonal.
  for (auto& mat : dense_) mat.setZero(nn, nn);
  for (int m = 1; m < n_atoms; ++m)
    for (int n = 0; n < m; ++n) {
      const Eigen::Index off = layout_.pair_offset(n, m);
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          const cplx v = y(off + 3 * a + b);
          dense_[static_cast<std::size_t>(3 * a + b)](n, m) = v;
          dense_[static_cast<std::size_t>(3 * b + a)](m, n) = v;
        }
    }
  // Products g+ P^{-1,b} and g- P^{+1,b}: the only ones the equations need.
  for (int b = -1; b <= 1; ++b) {
    products_[static_cast<std::size_t>(jslot(b))].noalias() = two_.g_plus * dense(-1, b);
    products_[static_cast<std::size_t>(3 + jslot(b))].noalias() = two_.g_minus * dense(1, b);
  }
  auto product = [&](int x, int b) -> const Eigen::MatrixXcd& {
    return products_[static_cast<std::size_t>((x > 0 ? 3 : 0) + jslot(b))];
  };

  // n-side external contributions: everything coupling atom n of the pair
  // (n, m) to a third atom l. Triples <Q_n^j1 Q_l^j2 Q_m^b> are closed by the
  // three-operator rule; the l sums are full row sums with the l = m term taken
  // back out. The parts independent of b are built once per U entry.
  for (std::size_t k = 0; k < kU.size(); ++k) {
    const auto& e = kU[k];
    const auto& g = e.plus ? two_.g_plus : two_.g_minus;
    gp_pair_ = g.array() * dense(e.j1, e.j2).array();
    u_row_sums_[k] = gp_pair_.rowwise().sum();
    const Eigen::ArrayXcd& row_pair = u_row_sums_[k];
    field_.noalias() = g * scol(e.j2);
    u_rb_[k] = (-(g.array().rowwise() * scol(e.j2).transpose().array())).colwise() + field_.array();
    u_outer_[k] = ((-gp_pair_).colwise() + row_pair) - 2.0 * (u_rb_[k].colwise() * scol(e.j1).array());
  }
  for (int a = -1; a <= 1; ++a)
    for (int b = -1; b <= 1; ++b) {
      const std::size_t slot = static_cast<std::size_t>(3 * jslot(a) + jslot(b));
      Eigen::MatrixXcd& ns = nside_[slot];
      // Atom n's own terms: inhomogeneous part and single-atom mixing.
      const Eigen::VectorXcd* w_a = &w_cols_[static_cast<std::size_t>(3 * jslot(a))];
      ns.noalias() = s_cols_[static_cast<std::size_t>(jslot(a))].lazyProduct(scol(b).transpose());
      ns.array() += dense(-1, b).array().colwise() * w_a[0].array() + dense(0, b).array().colwise() * w_a[1].array() +
                    dense(1, b).array().colwise() * w_a[2].array();
      for (const auto& e : kV) {
        if (e.j != a) continue;
        ns += e.coef * product(e.j1, b);
      }
      const Eigen::VectorXcd& sm_b = scol(b);
      for (std::size_t k = 0; k < kU.size(); ++k) {
        const auto& e = kU[k];
        if (e.j != a) continue;
        ns.array() += e.coef * ((u_outer_[k].rowwise() * sm_b.transpose().array()) +
                                dense(e.j1, b).array() * u_rb_[k] +
                                product(e.j2, b).array().colwise() * scol(e.j1).array());
      }
      // Coupling internal to the pair, kept whole: it is symmetric under swapping the pair.
      Eigen::MatrixXcd& pd = pair_direct_[slot];
      pd.setZero(nn, nn);
      for (const auto& t : direct_ops_[slot]) {
        const Eigen::MatrixXcd& g = t.coupling == 0 ? gamma_c_ : (t.coupling == 1 ? two_.g_plus : two_.g_minus);
        if (t.jx == kNone)
          pd.array() += t.factor * (g.array().rowwise() * scol(t.jy).transpose().array());
        else if (t.jy == kNone)
          pd.array() += t.factor * (g.array().colwise() * scol(t.jx).array());
        else
          pd.array() += t.factor * g.array() * dense(t.jx, t.jy).array();
      }
    }

  for (int m = 1; m < n_atoms; ++m)
    for (int n = 0; n < m; ++n) {
      const Eigen::Index off = layout_.pair_offset(n, m);
      for (int ia = 0; ia < 3; ++ia)
        for (int ib = 0; ib < 3; ++ib)
          dy(off + 3 * ia + ib) += nside_[static_cast<std::size_t>(3 * ia + ib)](n, m) +
                                   nside_[static_cast<std::size_t>(3 * ib + ia)](m, n) +
                                   pair_direct_[static_cast<std::size_t>(3 * ia + ib)](n, m);
    }
}

void HierarchyRhs::pairs_from_triples(const HierarchyView& y, Eigen::VectorXcd& dy) {
  const int n_atoms = layout_.n_atoms;
  std::array<DirectTerm, 3> direct{};
  for (int m = 1; m < n_atoms; ++m)
    for (int n = 0; n < m; ++n) {
      const Eigen::Index off = layout_.pair_offset(n, m);
      const auto& wn = one_.w[static_cast<std::size_t>(n)];
      const auto& wm = one_.w[static_cast<std::size_t>(m)];
      const auto& sn = one_.s[static_cast<std::size_t>(n)];
      const auto& sm = one_.s[static_cast<std::size_t>(m)];
      const double gam = two_.gamma_nm(n, m);
      const cplx gp = two_.g_plus(n, m);
      const cplx gm = two_.g_minus(n, m);
      for (int a = -1; a <= 1; ++a)
        for (int b = -1; b <= 1; ++b) {
          const int ia = jslot(a), ib = jslot(b);
          cplx d = sn(ia) * y.single(m, b) + y.single(n, a) * sm(ib);
          for (int c = -1; c <= 1; ++c)
            d += wn(ia, jslot(c)) * y.pair(n, c, m, b) + wm(ib, jslot(c)) * y.pair(n, a, m, c);
          const int count = direct_terms(a, b, gam, gp, gm, direct);
          for (int k = 0; k < count; ++k) {
            const auto& t = direct[static_cast<std::size_t>(k)];
            cplx v;
            if (t.jx == kNone) v = y.single(m, t.jy);
            else if (t.jy == kNone) v = y.single(n, t.jx);
            else v = y.pair(n, t.jx, m, t.jy);
            d += t.coef * v;
          }
          for (int l = 0; l < n_atoms; ++l) {
            if (l == n || l == m) continue;
            for (const auto& e : kV) {
              if (e.j == a) d += e.coef * (e.plus ? two_.g_plus(n, l) : two_.g_minus(n, l)) * y.pair(l, e.j1, m, b);
              if (e.j == b) d += e.coef * (e.plus ? two_.g_plus(m, l) : two_.g_minus(m, l)) * y.pair(n, a, l, e.j1);
            }
            for (const auto& e : kU) {
              if (e.j == a)
                d += e.coef * (e.plus ? two_.g_plus(n, l) : two_.g_minus(n, l)) * y.triple(n, e.j1, l, e.j2, m, b);
              if (e.j == b)
                d += e.coef * (e.plus ? two_.g_plus(m, l) : two_.g_minus(m, l)) * y.triple(n, a, m, e.j1, l, e.j2);
            }
          }
          dy(off + 3 * ia + ib) += d;
        }
    }
}

void HierarchyRhs::triples(const HierarchyView& y, Eigen::VectorXcd& dy) {
  const int n_atoms = layout_.n_atoms;
  std::array<DirectTerm, 3> direct{};
  for (int p = 2; p < n_atoms; ++p)
    for (int m = 1; m < p; ++m)
      for (int n = 0; n < m; ++n) {
        const std::array<int, 3> atoms{n, m, p};
        const Eigen::Index off = layout_.triple_offset(n, m, p);
        for (int a = -1; a <= 1; ++a)
          for (int b = -1; b <= 1; ++b)
            for (int c = -1; c <= 1; ++c) {
              const std::array<int, 3> js{a, b, c};
              // value with slot k replaced by operator jk (kNone drops it)
              auto with = [&](int k, int jk) {
                std::array<Op, 3> ops{};
                int count = 0;
                for (int i = 0; i < 3; ++i) {
                  const int j = (i == k) ? jk : js[static_cast<std::size_t>(i)];
                  if (j != kNone) ops[static_cast<std::size_t>(count++)] = {atoms[static_cast<std::size_t>(i)], j};
                }
                if (count == 3) return y.triple(ops[0].atom, ops[0].j, ops[1].atom, ops[1].j, ops[2].atom, ops[2].j);
                return y.pair(ops[0].atom, ops[0].j, ops[1].atom, ops[1].j);
              };
              cplx d = 0.0;
              // one-atom terms on each slot
              for (int k = 0; k < 3; ++k) {
                const auto atom = static_cast<std::size_t>(atoms[static_cast<std::size_t>(k)]);
                const int jk = js[static_cast<std::size_t>(k)];
                d += one_.s[atom](jslot(jk)) * with(k, kNone);
                for (int x = -1; x <= 1; ++x) {
                  const cplx w = one_.w[atom](jslot(jk), jslot(x));
                  if (w != 0.0) d += w * with(k, x);
                }
              }
              // direct terms of each internal pair, third operator as spectator
              for (int k1 = 0; k1 < 3; ++k1)
                for (int k2 = k1 + 1; k2 < 3; ++k2) {
                  const int x = atoms[static_cast<std::size_t>(k1)];
                  const int z = atoms[static_cast<std::size_t>(k2)];
                  const int spect = 3 - k1 - k2;
                  const int count = direct_terms(js[static_cast<std::size_t>(k1)], js[static_cast<std::size_t>(k2)],
                                                 two_.gamma_nm(x, z), two_.g_plus(x, z), two_.g_minus(x, z), direct);
                  for (int t = 0; t < count; ++t) {
                    const auto& term = direct[static_cast<std::size_t>(t)];
                    const Op sp{atoms[static_cast<std::size_t>(spect)], js[static_cast<std::size_t>(spect)]};
                    cplx v;
                    if (term.jx == kNone) v = y.pair(z, term.jy, sp.atom, sp.j);
                    else if (term.jy == kNone) v = y.pair(x, term.jx, sp.atom, sp.j);
                    else v = y.triple(x, term.jx, z, term.jy, sp.atom, sp.j);
                    d += term.coef * v;
                  }
                }
              // couplings of each slot to outside atoms
              for (int k = 0; k < 3; ++k) {
                const int alpha = atoms[static_cast<std::size_t>(k)];
                const int ja = js[static_cast<std::size_t>(k)];
                const Op o1{atoms[static_cast<std::size_t>((k + 1) % 3)], js[static_cast<std::size_t>((k + 1) % 3)]};
                const Op o2{atoms[static_cast<std::size_t>((k + 2) % 3)], js[static_cast<std::size_t>((k + 2) % 3)]};
                for (int l = 0; l < n_atoms; ++l) {
                  if (l == n || l == m || l == p) continue;
                  for (const auto& e : kV) {
                    if (e.j != ja) continue;
                    const cplx g = e.plus ? two_.g_plus(alpha, l) : two_.g_minus(alpha, l);
                    d += e.coef * g * y.triple(l, e.j1, o1.atom, o1.j, o2.atom, o2.j);
                  }
                  for (const auto& e : kU) {
                    if (e.j != ja) continue;
                    const cplx g = e.plus ? two_.g_plus(alpha, l) : two_.g_minus(alpha, l);
                    d += e.coef * g * quadruple_closure(y, {Op{alpha, e.j1}, Op{l, e.j2}, o1, o2});
                  }
                }
              }
              dy(off + 9 * jslot(a) + 3 * jslot(b) + jslot(c)) += d;
            }
      }
}

Integrator<Eigen::VectorXcd>::Rhs hierarchy_rhs_function(const OneAtomTerms& one_atom,
                                                         const TwoAtomTensors& two_atom,
                                                         const HierarchyModel& model) {
  auto engine = std::make_shared<HierarchyRhs>(one_atom, two_atom, model);
  return [engine](const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) { (*engine)(y, dy); };
}

HierarchyState rhs(const HierarchyState& state, const OneAtomTerms& one_atom, const TwoAtomTensors& two_atom) {
  HierarchyRhs engine(one_atom, two_atom, {state.order(), false});
  HierarchyState out(state.n_atoms(), state.order());
  engine(state.values(), out.values());
  return out;
}

HierarchyState rhs_linear(const HierarchyState& state, const OneAtomTerms& one_atom,
                          const TwoAtomTensors& two_atom) {
  if (state.order() != 1) fail(ErrorKind::InvalidArgument, "the linear approximation needs an order-1 state");
  HierarchyRhs engine(one_atom, two_atom, {1, true});
  HierarchyState out(state.n_atoms(), 1);
  engine(state.values(), out.values());
  return out;
}

Eigen::VectorXcd hierarchy_singles(const HierarchyState& state) {
  return state.values().head(3 * state.n_atoms());
}

HierarchySteadyState hierarchy_steady_state(const HierarchyState& start, const OneAtomTerms& one_atom,
                                            const TwoAtomTensors& two_atom, bool linear,
                                            const HierarchyOptions& options) {
  HierarchySteadyState out{start, {}};
  const HierarchyLayout layout = start.layout();
  auto rhs_fn = hierarchy_rhs_function(one_atom, two_atom, {start.order(), linear});
  out.info = evolve_to_steady(out.state.values(), rhs_fn, options.steady, options.control,
                              [&](const Eigen::VectorXcd& y) -> Eigen::VectorXcd { return y.head(3 * layout.n_atoms); });
  return out;
}

void evolve_hierarchy(HierarchyState& state, const OneAtomTerms& one_atom, const TwoAtomTensors& two_atom,
                      bool linear, const StepControl& control, std::span<const double> times,
                      const std::function<void(double, const HierarchyState&)>& observe) {
  Integrator<Eigen::VectorXcd> stepper(hierarchy_rhs_function(one_atom, two_atom, {state.order(), linear}), control);
  stepper.evolve(state.values(), times, [&](double t, const Eigen::VectorXcd&) {
    if (observe) observe(t, state);
  });
}

}  // namespace arraylight
