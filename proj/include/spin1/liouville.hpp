#pragma once

// Exact Lindblad evolution of the full N-body density matrix for small N.
// Serves as the correctness oracle for the approximate solvers and as the
// inner engine of the cluster mean-field solver.
//
// Tensor-factor convention: site 0 is the slowest (most significant) index,
// matching kron(site0, site1, ...). Local basis (down, mid, up).

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <vector>

#include "spin1/engine.hpp"
#include "spin1/model.hpp"
#include "spin1/threelevel.hpp"

namespace spin1 {

struct ManyBodyState {
  Eigen::MatrixXcd rho;
  std::vector<int> site_order;  // lattice site index per tensor factor

  int n_factors() const { return static_cast<int>(site_order.size()); }
  void validate(double tol = 1e-9) const;  // hermitian, unit trace, dim = 3^N
};

// Number of tensor factors allowed with dense storage (beyond this an explicit
// opt-in is required; hard cap at 8).
inline constexpr int kDefaultDenseSiteCap = 6;
inline constexpr int kHardDenseSiteCap = 8;

struct GeneratorSpec {
  DriveParams drives;
  Eigen::MatrixXd pair_couplings;   // symmetric, zero diagonal, n x n
  Eigen::VectorXd extra_detunings;  // per-site shift on n_up (may be empty)

  int n_sites() const { return static_cast<int>(pair_couplings.rows()); }
  void validate() const;

  static GeneratorSpec single_site(const DriveParams& drives);
  static GeneratorSpec for_lattice(const ModelParams& params, const Lattice& lattice);
};

// Precomputed index machinery for matrix-free application of the generator
// (no superoperator is ever materialized).
class Generator {
 public:
  explicit Generator(GeneratorSpec spec);

  const GeneratorSpec& spec() const { return spec_; }
  int dim() const { return dim_; }

  // out = i [rho, H] + dissipator(rho). Hermiticity-preserving, traceless.
  void apply(const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& out) const;
  Eigen::MatrixXcd apply(const Eigen::MatrixXcd& rho) const;

  // Update the per-site detunings without rebuilding index tables (used by the
  // cluster solver, where they change every RHS call).
  void set_extra_detunings(const Eigen::VectorXd& extra);

  int digit(int index, int site) const { return (index / strides_[site]) % 3; }

 private:
  void rebuild_diagonal();

  GeneratorSpec spec_;
  int n_ = 0;
  int dim_ = 0;
  std::vector<int> strides_;
  Eigen::VectorXd hdiag_;              // diagonal Hamiltonian terms
  Eigen::VectorXd nmid_;               // # of factors in |mid> per basis index
  Eigen::SparseMatrix<cplx> h_offdiag_;
  std::vector<std::vector<int>> mid_indices_;  // per site: indices with digit mid
};

// Evolves rho0 under the generator, sampling at the ascending t_grid.
// Trace is preserved to 1e-8 and hermiticity re-imposed after each accepted
// step; violations raise IntegratorError.
void evolve_exact(const GeneratorSpec& spec, const Eigen::MatrixXcd& rho0,
                  const std::vector<double>& t_grid, const IntegratorConfig& cfg,
                  const std::function<void(double, const Eigen::MatrixXcd&)>& on_sample,
                  int dense_site_cap = kDefaultDenseSiteCap);

// Partial trace onto `subset` (kept factors, in the listed order).
Eigen::MatrixXcd reduced_density_matrix(const Eigen::MatrixXcd& rho, int n_factors,
                                        const std::vector<int>& subset);

// Relabels tensor factors: factor k of the result is factor perm[k] of rho.
Eigen::MatrixXcd permute_factors(const Eigen::MatrixXcd& rho,
                                 const std::vector<int>& perm);

}  // namespace spin1
