#pragma once

// Second-order cumulant expansion of the lattice master equation.
//
// State content: single-site means <sigma_p> and connected two-site blocks
// C[p][q] = <sigma_p^(i) sigma_q^(j)>_c (9x9 complex, first index = first
// site). Pair moments are M = m_i m_j^T + C. The hierarchy is closed by
// dropping third-order cumulants,
//   <s1 s2 s3> ~= <s1 s2><s3> + <s1 s3><s2> + <s1><s2 s3> - 2<s1><s2><s3>.
//
// Two variants: a translation-invariant thermodynamic-limit system with
// displacement-indexed blocks and an interaction cutoff r_cut, and a finite
// open-boundary lattice with per-site means and per-pair blocks (no cutoff).
// For N = 2 the hierarchy closes exactly and trajectories match the exact
// solver to integrator tolerance; that, plus a three-site generator
// cross-check with exact moments substituted for the closure, pins the
// derivation.

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <vector>

#include "spin1/model.hpp"
#include "spin1/threelevel.hpp"

namespace spin1 {

// Scalar third-order closure: moments M_ab are full two-site moments,
// means m_a single-operator expectations.
inline cplx third_order_closure(cplx m1, cplx m2, cplx m3, cplx m12, cplx m13,
                                cplx m23) {
  return m12 * m3 + m13 * m2 + m1 * m23 - 2.0 * m1 * m2 * m3;
}

// Three-site moments <sigma_p^(i) sigma_q^(j) n_up^(k)> for distinct sites,
// as a 9x9 block over (p, q). Used to swap the closure for exact moments.
using ThirdMomentProvider = std::function<Block9(int i, int j, int k)>;

// ---------------------------------------------------------------------------
// Finite lattice

class CumulantFiniteSystem {
 public:
  CumulantFiniteSystem(const ModelParams& params, const Lattice& lattice);

  int n_sites() const { return n_; }
  Eigen::Index state_size() const;
  const Eigen::MatrixXd& potentials() const { return u_; }
  const ModelParams& params() const { return params_; }

  // pairs are stored for i < j in lexicographic order
  int pair_index(int i, int j) const;

  void pack_product(const std::vector<SiteState>& sites, Eigen::VectorXd& y) const;
  // means and cumulants of an exact state (used for cross-solver checks)
  void pack_from_exact(const Eigen::MatrixXcd& rho, Eigen::VectorXd& y) const;

  Vec9 means(const Eigen::VectorXd& y, int site) const;
  Block9 cumulant(const Eigen::VectorXd& y, int i, int j) const;  // any i != j
  Block9 moment(const Eigen::VectorXd& y, int i, int j) const;

  // fast path: closure folded in algebraically
  void rhs(const Eigen::VectorXd& y, Eigen::VectorXd& dy) const;
  // reference path: explicit three-site moments (default closure or injected)
  void rhs_generic(const Eigen::VectorXd& y, Eigen::VectorXd& dy,
                   const ThirdMomentProvider& t3) const;
  // the closure the fast path realizes, as a provider over the state
  ThirdMomentProvider closure_provider(const Eigen::VectorXd& y) const;

  void drop_cumulants(Eigen::VectorXd& y) const;

  double mean_up(const Eigen::VectorXd& y) const;  // lattice average of n_up
  double f2(const Eigen::VectorXd& y) const;       // (<N_up^2> - <N_up>^2) / N
  // E_mf = sum_{i<j} U_ij n_i n_j ; E_qu = sum_{i<j} U_ij C_ij[up;up]
  void interaction_energies(const Eigen::VectorXd& y, double& e_mf, double& e_qu) const;

 private:
  ModelParams params_;
  Lattice lattice_;
  int n_ = 0;
  Eigen::MatrixXd u_;
  Block9 gmat_;
  std::vector<std::pair<int, int>> pairs_;
};

// ---------------------------------------------------------------------------
// Thermodynamic limit (translation invariant)

class CumulantTDSystem {
 public:
  // use_fft selects the FFT-based evaluation of the correlation sums; the
  // direct path computes the same numbers by explicit summation.
  CumulantTDSystem(const ModelParams& params, double r_cut, bool use_fft = true);
  ~CumulantTDSystem();
  CumulantTDSystem(CumulantTDSystem&&) noexcept;

  const DisplacementSet& displacements() const { return disp_; }
  const std::vector<double>& potentials_half() const { return u_half_; }
  const ModelParams& params() const { return params_; }
  Eigen::Index state_size() const;

  void pack_product(const SiteState& site, Eigen::VectorXd& y) const;

  Vec9 means(const Eigen::VectorXd& y) const;
  void set_means(Eigen::VectorXd& y, const Vec9& m) const;
  Block9 cumulant_half(const Eigen::VectorXd& y, std::size_t half_idx) const;
  // cumulant block for an arbitrary displacement (dx, dy) in the stored set
  Block9 cumulant_at(const Eigen::VectorXd& y, int dx, int dy) const;
  Block9 moment_at(const Eigen::VectorXd& y, int dx, int dy) const;

  // not const: uses internal scratch buffers (one system per trajectory)
  void rhs(const Eigen::VectorXd& y, Eigen::VectorXd& dy);

  void drop_cumulants(Eigen::VectorXd& y) const;

  double n_up(const Eigen::VectorXd& y) const;
  // F^2 = n_up - n_up^2 + sum_d C_d[up;up]; diverges with r_cut in the
  // oscillating phases, reported as-is.
  double f2(const Eigen::VectorXd& y) const;
  // per-site energies in the displacement-sum convention:
  // E_mf = chi n_up^2, E_qu = sum_d U(d) C_d[up;up]
  void interaction_energies(const Eigen::VectorXd& y, double& e_mf, double& e_qu) const;

 private:
  struct Scratch;

  ModelParams params_;
  DisplacementSet disp_;
  std::vector<double> u_half_;
  Block9 gmat_;
  bool use_fft_ = true;
  std::unique_ptr<Scratch> scratch_;
};

// Extract means of site i from an exact state (basis: site 0 slowest).
Vec9 exact_means(const Eigen::MatrixXcd& rho, int n_factors, int site);
// Pair moment M[p][q] = <sigma_p^(i) sigma_q^(j)> from an exact state.
Block9 exact_pair_moment(const Eigen::MatrixXcd& rho, int n_factors, int i, int j);
// Three-site moment block <sigma_p^(i) sigma_q^(j) n_up^(k)>.
Block9 exact_third_moment(const Eigen::MatrixXcd& rho, int n_factors, int i, int j,
                          int k);

}  // namespace spin1
