#pragma once

// Shared block-derivative kernel for the cumulant solvers.
//
// For a pair (i, j) with coupling U_ij, full moment M = m_i m_j^T + C and the
// third-order closure folded in, the connected-block derivative is
//
//   dC = G C + C G^T                                   (single-particle)
//      + i U_ij (l l^T - r r^T) o M                    (intra-pair, exact)
//      - i U_ij [wt o M(:,8)] m_j^T                    (mean-flow cross terms
//      - i U_ij m_i [wt o Mj8]^T                        of the pair coupling)
//      + i Dwt_row (S_ij C + m_i T_ij^T)               (external sites via
//      + i (S_ji C + T_ji m_j^T) Dwt_col                closed 3-site moments)
//
// with l_p, r_p, wt_p the diagonal n_up multiplication masks,
// Mj8[q] = m_j[q] m_i[8] + C(8,q), S_ij = sum_{k!=i,j} U_ik <n_up^k> and
// T_ij[q] = sum_{k!=i,j} U_ik C^{jk}[q][8]. The thermodynamic-limit variant
// supplies S and T from displacement sums; the finite variant from lattice
// sums.

#include "spin1/threelevel.hpp"

namespace spin1::detail {

using Arr9 = Eigen::Array<double, 9, 1>;

inline const Arr9& mask_left() {
  static const Arr9 m = [] {
    Arr9 a;
    for (int p = 0; p < 9; ++p) a(p) = left_up_mask(p);
    return a;
  }();
  return m;
}

inline const Arr9& mask_right() {
  static const Arr9 m = [] {
    Arr9 a;
    for (int p = 0; p < 9; ++p) a(p) = right_up_mask(p);
    return a;
  }();
  return m;
}

inline const Arr9& mask_wt() {
  static const Arr9 m = [] {
    Arr9 a;
    for (int p = 0; p < 9; ++p) a(p) = comm_up_weight(p);
    return a;
  }();
  return m;
}

inline void accumulate_block_rhs(const Block9& gmat, double u_ij, const Vec9& m_i,
                                 const Vec9& m_j, const Block9& c, cplx s_ij,
                                 cplx s_ji, const Vec9& t_ij, const Vec9& t_ji,
                                 Block9& out) {
  static const cplx iu(0.0, 1.0);
  const Arr9& l = mask_left();
  const Arr9& r = mask_right();
  const Arr9& wt = mask_wt();

  out.noalias() += gmat * c;
  out.noalias() += c * gmat.transpose();

  if (u_ij != 0.0) {
    Block9 moment = c;
    moment.noalias() += m_i * m_j.transpose();
    // intra-pair commutator with the pair's own coupling
    for (int q = 0; q < 9; ++q)
      for (int p = 0; p < 9; ++p)
        out(p, q) += iu * u_ij * (l(p) * l(q) - r(p) * r(q)) * moment(p, q);
    // cross terms of the mean flow generated by the same coupling
    Vec9 mi8 = (wt * moment.col(8).array()).matrix();
    out.noalias() -= (iu * u_ij) * (mi8 * m_j.transpose());
    Vec9 mj8;
    for (int q = 0; q < 9; ++q) mj8(q) = wt(q) * (m_j(q) * m_i(8) + c(8, q));
    out.noalias() -= (iu * u_ij) * (m_i * mj8.transpose());
  }

  // external-site closure terms
  Block9 x = s_ij * c;
  x.noalias() += m_i * t_ij.transpose();
  x.array().colwise() *= wt.cast<cplx>();
  out += iu * x;

  Block9 z = s_ji * c;
  z.noalias() += t_ji * m_j.transpose();
  z.array().rowwise() *= wt.cast<cplx>().transpose();
  out += iu * z;
}

}  // namespace spin1::detail
