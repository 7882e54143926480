#pragma once

// Three-level site algebra shared by all solvers.
//
// Basis ordering is fixed as (down, mid, up) = (0, 1, 2), where "mid" is the
// radiatively decaying intermediate level. Transition operators are
// sigma_{ab} = |a><b|; expectation values are stored as 9-vectors indexed by
// p = 3*a + b. For a single-site density matrix rho, <sigma_{ab}> = rho(b,a),
// i.e. the mean vector read as a 3x3 matrix is rho transposed.

#include <Eigen/Dense>
#include <complex>

namespace spin1 {

using cplx = std::complex<double>;
using Mat3 = Eigen::Matrix3cd;
using Vec9 = Eigen::Matrix<cplx, 9, 1>;
using Block9 = Eigen::Matrix<cplx, 9, 9>;

inline constexpr int kDown = 0;
inline constexpr int kMid = 1;
inline constexpr int kUp = 2;

inline constexpr int op_index(int a, int b) { return 3 * a + b; }
inline constexpr int op_row(int p) { return p / 3; }
inline constexpr int op_col(int p) { return p % 3; }

// p index of n_up = |up><up|
inline constexpr int kNumUpIndex = op_index(kUp, kUp);

struct DriveParams {
  double delta = 0.0;        // detuning on the lower transition
  double omega_lower = 0.0;  // Rabi frequency down<->mid
  double omega_upper = 0.0;  // Rabi frequency up<->mid
  double gamma = 1.0;        // decay rate mid->down
};

// Single-particle Hamiltonian: delta*n_down + Omega(s_down,mid + h.c.)
// + omega(s_up,mid + h.c.) + extra_up * n_up.
Mat3 single_site_hamiltonian(const DriveParams& p, double extra_up = 0.0);

// Schroedinger-picture single-site Lindblad derivative
//   d(rho)/dt = -i[H, rho] + gamma (s_dm rho s_md - 1/2 {n_mid, rho}).
Mat3 single_site_lindblad_rhs(const Mat3& rho, const Mat3& h, double gamma);

// Adjoint (Heisenberg) generator of the non-interacting single-site dynamics
// as a 9x9 matrix on mean vectors: d<sigma_p>/dt = sum_q G(p,q) <sigma_q>.
Block9 adjoint_generator_matrix(const DriveParams& p);

// Interaction bookkeeping. [n_up, sigma_{ab}] = (d_{a,up} - d_{b,up}) sigma_{ab},
// n_up sigma_{ab} = d_{a,up} sigma_{ab}, sigma_{ab} n_up = d_{b,up} sigma_{ab}:
// all diagonal in the p basis.
inline double left_up_mask(int p) { return op_row(p) == kUp ? 1.0 : 0.0; }
inline double right_up_mask(int p) { return op_col(p) == kUp ? 1.0 : 0.0; }
inline double comm_up_weight(int p) { return left_up_mask(p) - right_up_mask(p); }

// Conversions between mean vectors and single-site density matrices.
Vec9 means_from_rho(const Mat3& rho);
Mat3 rho_from_means(const Vec9& m);

}  // namespace spin1
