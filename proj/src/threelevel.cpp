#include "spin1/threelevel.hpp"

namespace spin1 {

Mat3 single_site_hamiltonian(const DriveParams& p, double extra_up) {
  Mat3 h = Mat3::Zero();
  h(kDown, kDown) = p.delta;
  h(kDown, kMid) = p.omega_lower;
  h(kMid, kDown) = p.omega_lower;
  h(kUp, kMid) = p.omega_upper;
  h(kMid, kUp) = p.omega_upper;
  h(kUp, kUp) += extra_up;
  return h;
}

Mat3 single_site_lindblad_rhs(const Mat3& rho, const Mat3& h, double gamma) {
  const cplx iu(0.0, 1.0);
  Mat3 out = -iu * (h * rho - rho * h);
  // jump |down><mid| : gain into down from mid, loss of mid population
  out(kDown, kDown) += gamma * rho(kMid, kMid);
  out.row(kMid) -= 0.5 * gamma * rho.row(kMid);
  out.col(kMid) -= 0.5 * gamma * rho.col(kMid);
  // the (mid,mid) element was decremented twice, which is correct:
  // {n_mid, rho}(mid,mid) = 2 rho(mid,mid).
  return out;
}

Block9 adjoint_generator_matrix(const DriveParams& p) {
  // Apply the adjoint generator to every basis operator and read off
  // coefficients. For A = |a><b|:
  //   G*(A) = i[H1, A] + gamma (s_md A s_dm - 1/2 {n_mid, A}).
  const Mat3 h = single_site_hamiltonian(p, 0.0);
  const cplx iu(0.0, 1.0);
  Block9 g = Block9::Zero();
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      Mat3 op = Mat3::Zero();
      op(a, b) = 1.0;
      Mat3 img = iu * (h * op - op * h);
      // s_md A s_dm = |mid><down| A |down><mid|
      img(kMid, kMid) += p.gamma * op(kDown, kDown);
      img.row(kMid) -= 0.5 * p.gamma * op.row(kMid);
      img.col(kMid) -= 0.5 * p.gamma * op.col(kMid);
      // coefficient of basis op |r><c| in img is img(r,c)
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) g(op_index(r, c), op_index(a, b)) += img(r, c);
    }
  }
  // g(q,p) is the coefficient of sigma_q in G*(sigma_p), so
  // d<sigma_p>/dt = sum_q g(q,p) <sigma_q>, i.e. dm = g^T m.
  return g.transpose();
}

Vec9 means_from_rho(const Mat3& rho) {
  Vec9 m;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) m(op_index(a, b)) = rho(b, a);
  return m;
}

Mat3 rho_from_means(const Vec9& m) {
  Mat3 rho;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) rho(b, a) = m(op_index(a, b));
  return rho;
}

}  // namespace spin1
