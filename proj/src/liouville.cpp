#include "spin1/liouville.hpp"

#include <cmath>
#include <stdexcept>

namespace spin1 {

void ManyBodyState::validate(double tol) const {
  const int n = n_factors();
  long dim = 1;
  for (int i = 0; i < n; ++i) dim *= 3;
  if (rho.rows() != dim || rho.cols() != dim)
    throw std::invalid_argument("ManyBodyState: dimension does not match site count");
  if (std::abs(rho.trace() - 1.0) > tol)
    throw std::invalid_argument("ManyBodyState: trace != 1");
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > tol)
    throw std::invalid_argument("ManyBodyState: not hermitian");
}

void GeneratorSpec::validate() const {
  const int n = n_sites();
  if (n < 1) throw std::invalid_argument("GeneratorSpec: no sites");
  if (pair_couplings.cols() != n)
    throw std::invalid_argument("GeneratorSpec: pair_couplings not square");
  if ((pair_couplings - pair_couplings.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("GeneratorSpec: pair_couplings not symmetric");
  if (extra_detunings.size() != 0 && extra_detunings.size() != n)
    throw std::invalid_argument("GeneratorSpec: extra_detunings size mismatch");
  if (extra_detunings.size() && !extra_detunings.allFinite())
    throw std::invalid_argument("GeneratorSpec: non-finite extra_detunings");
}

GeneratorSpec GeneratorSpec::single_site(const DriveParams& drives) {
  GeneratorSpec s;
  s.drives = drives;
  s.pair_couplings = Eigen::MatrixXd::Zero(1, 1);
  return s;
}

GeneratorSpec GeneratorSpec::for_lattice(const ModelParams& params,
                                         const Lattice& lattice) {
  params.validate();
  GeneratorSpec s;
  s.drives = params.drives();
  const double c = coupling_from_chi(params.chi, params.kappa, lattice);
  s.pair_couplings = pair_potentials(lattice, c, params.kappa);
  return s;
}

Generator::Generator(GeneratorSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  n_ = spec_.n_sites();
  if (n_ > kHardDenseSiteCap)
    throw std::invalid_argument("Generator: site count exceeds hard cap");
  dim_ = 1;
  for (int i = 0; i < n_; ++i) dim_ *= 3;
  strides_.resize(n_);
  for (int s = 0; s < n_; ++s) {
    int st = 1;
    for (int k = s + 1; k < n_; ++k) st *= 3;
    strides_[s] = st;  // site 0 slowest
  }

  rebuild_diagonal();

  nmid_.resize(dim_);
  mid_indices_.assign(n_, {});
  for (int i = 0; i < dim_; ++i) {
    int cnt = 0;
    for (int s = 0; s < n_; ++s) {
      if (digit(i, s) == kMid) {
        ++cnt;
        mid_indices_[s].push_back(i);
      }
    }
    nmid_(i) = cnt;
  }

  // off-diagonal drives: Omega |down><mid| + omega |up><mid| + h.c. per site
  std::vector<Eigen::Triplet<cplx>> trips;
  for (int s = 0; s < n_; ++s) {
    for (int i = 0; i < dim_; ++i) {
      const int d = digit(i, s);
      if (d == kMid) {
        const int i_down = i + (kDown - kMid) * strides_[s];
        const int i_up = i + (kUp - kMid) * strides_[s];
        trips.emplace_back(i_down, i, spec_.drives.omega_lower);
        trips.emplace_back(i, i_down, spec_.drives.omega_lower);
        trips.emplace_back(i_up, i, spec_.drives.omega_upper);
        trips.emplace_back(i, i_up, spec_.drives.omega_upper);
      }
    }
  }
  h_offdiag_.resize(dim_, dim_);
  h_offdiag_.setFromTriplets(trips.begin(), trips.end());
  h_offdiag_.makeCompressed();
}

void Generator::rebuild_diagonal() {
  hdiag_.resize(dim_);
  const bool extras = spec_.extra_detunings.size() > 0;
  for (int i = 0; i < dim_; ++i) {
    double v = 0.0;
    for (int s = 0; s < n_; ++s) {
      const int d = digit(i, s);
      if (d == kDown) v += spec_.drives.delta;
      if (d == kUp && extras) v += spec_.extra_detunings(s);
    }
    for (int s = 0; s < n_; ++s) {
      if (digit(i, s) != kUp) continue;
      for (int t = s + 1; t < n_; ++t)
        if (digit(i, t) == kUp) v += spec_.pair_couplings(s, t);
    }
    hdiag_(i) = v;
  }
}

void Generator::set_extra_detunings(const Eigen::VectorXd& extra) {
  if (extra.size() != n_)
    throw std::invalid_argument("set_extra_detunings: size mismatch");
  spec_.extra_detunings = extra;
  rebuild_diagonal();
}

void Generator::apply(const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& out) const {
  if (rho.rows() != dim_ || rho.cols() != dim_)
    throw std::invalid_argument("Generator::apply: dimension mismatch");
  const cplx iu(0.0, 1.0);
  const double g = spec_.drives.gamma;

  // coherent off-diagonal part
  out.noalias() = h_offdiag_ * rho;
  out.noalias() -= rho * h_offdiag_;
  out *= -iu;

  // diagonal Hamiltonian + anticommutator, fused elementwise
  for (int j = 0; j < dim_; ++j) {
    const double hj = hdiag_(j), mj = nmid_(j);
    for (int i = 0; i < dim_; ++i) {
      out(i, j) += (-iu * (hdiag_(i) - hj) - 0.5 * g * (nmid_(i) + mj)) * rho(i, j);
    }
  }

  // jumps: for every site, mid/mid coherences feed down/down
  for (int s = 0; s < n_; ++s) {
    const int off = (kDown - kMid) * strides_[s];
    for (int j : mid_indices_[s]) {
      for (int i : mid_indices_[s]) out(i + off, j + off) += g * rho(i, j);
    }
  }
}

Eigen::MatrixXcd Generator::apply(const Eigen::MatrixXcd& rho) const {
  Eigen::MatrixXcd out(dim_, dim_);
  apply(rho, out);
  return out;
}

void evolve_exact(const GeneratorSpec& spec, const Eigen::MatrixXcd& rho0,
                  const std::vector<double>& t_grid, const IntegratorConfig& cfg,
                  const std::function<void(double, const Eigen::MatrixXcd&)>& on_sample,
                  int dense_site_cap) {
  spec.validate();
  const int n = spec.n_sites();
  if (n > std::min(dense_site_cap, kHardDenseSiteCap))
    throw std::invalid_argument(
        "evolve_exact: site count exceeds the dense storage cap (" +
        std::to_string(std::min(dense_site_cap, kHardDenseSiteCap)) + ")");
  if (t_grid.empty()) throw std::invalid_argument("evolve_exact: empty time grid");
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1]))
      throw std::invalid_argument("evolve_exact: time grid must ascend");

  Generator gen(spec);
  const int dim = gen.dim();
  if (rho0.rows() != dim || rho0.cols() != dim)
    throw std::invalid_argument("evolve_exact: rho0 dimension mismatch");

  Eigen::VectorXd y(2 * dim * dim);
  Eigen::Map<Eigen::MatrixXcd>(reinterpret_cast<cplx*>(y.data()), dim, dim) = rho0;

  auto rhs = [&gen, dim](double, const Eigen::VectorXd& x, Eigen::VectorXd& dx) {
    Eigen::Map<const Eigen::MatrixXcd> rho(reinterpret_cast<const cplx*>(x.data()), dim,
                                           dim);
    Eigen::Map<Eigen::MatrixXcd> drho(reinterpret_cast<cplx*>(dx.data()), dim, dim);
    Eigen::MatrixXcd tmp(dim, dim);
    gen.apply(rho, tmp);
    drho = tmp;
  };

  auto post = [dim](double, Eigen::VectorXd& x) {
    Eigen::Map<Eigen::MatrixXcd> rho(reinterpret_cast<cplx*>(x.data()), dim, dim);
    rho = 0.5 * (rho + rho.adjoint()).eval();
  };

  auto emit = [&](double t, const Eigen::VectorXd& x) {
    Eigen::MatrixXcd rho =
        Eigen::Map<const Eigen::MatrixXcd>(reinterpret_cast<const cplx*>(x.data()), dim,
                                           dim);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    const double tr_err = std::abs(rho.trace() - 1.0);
    if (tr_err > 1e-8)
      throw IntegratorError("evolve_exact: trace drift " + std::to_string(tr_err) +
                                " at t=" + std::to_string(t),
                            t, x);
    on_sample(t, rho);
  };

  const double t0 = t_grid.front();
  if (t_grid.size() == 1) {
    emit(t0, y);
    return;
  }
  integrate_at(rhs, y, t0, t_grid.back(), cfg, t_grid, emit, post);
}

Eigen::MatrixXcd reduced_density_matrix(const Eigen::MatrixXcd& rho, int n_factors,
                                        const std::vector<int>& subset) {
  long dim = 1;
  for (int i = 0; i < n_factors; ++i) dim *= 3;
  if (rho.rows() != dim || rho.cols() != dim)
    throw std::invalid_argument("reduced_density_matrix: dimension mismatch");
  std::vector<bool> keep(n_factors, false);
  for (int s : subset) {
    if (s < 0 || s >= n_factors || keep[s])
      throw std::invalid_argument("reduced_density_matrix: invalid subset");
    keep[s] = true;
  }
  const int nk = static_cast<int>(subset.size());
  long kdim = 1;
  for (int i = 0; i < nk; ++i) kdim *= 3;
  std::vector<int> comp;
  for (int s = 0; s < n_factors; ++s)
    if (!keep[s]) comp.push_back(s);
  long cdim = 1;
  for (std::size_t i = 0; i < comp.size(); ++i) cdim *= 3;

  std::vector<long> stride(n_factors);
  for (int s = 0; s < n_factors; ++s) {
    long st = 1;
    for (int k = s + 1; k < n_factors; ++k) st *= 3;
    stride[s] = st;
  }
  auto compose = [&](long a, long e) {
    long idx = 0;
    long aa = a;
    for (int k = nk - 1; k >= 0; --k) {
      idx += (aa % 3) * stride[subset[k]];
      aa /= 3;
    }
    long ee = e;
    for (int k = static_cast<int>(comp.size()) - 1; k >= 0; --k) {
      idx += (ee % 3) * stride[comp[k]];
      ee /= 3;
    }
    return idx;
  };

  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(kdim, kdim);
  for (long a = 0; a < kdim; ++a)
    for (long b = 0; b < kdim; ++b)
      for (long e = 0; e < cdim; ++e) out(a, b) += rho(compose(a, e), compose(b, e));
  return out;
}

Eigen::MatrixXcd permute_factors(const Eigen::MatrixXcd& rho,
                                 const std::vector<int>& perm) {
  const int n = static_cast<int>(perm.size());
  long dim = 1;
  for (int i = 0; i < n; ++i) dim *= 3;
  if (rho.rows() != dim) throw std::invalid_argument("permute_factors: size mismatch");
  std::vector<long> stride(n);
  for (int s = 0; s < n; ++s) {
    long st = 1;
    for (int k = s + 1; k < n; ++k) st *= 3;
    stride[s] = st;
  }
  // index map: digit k of the new index equals digit perm[k] of the old one
  std::vector<long> map(dim);
  for (long i = 0; i < dim; ++i) {
    long j = 0;
    for (int k = 0; k < n; ++k) j += ((i / stride[perm[k]]) % 3) * stride[k];
    map[i] = j;
  }
  Eigen::MatrixXcd out(dim, dim);
  for (long r = 0; r < dim; ++r)
    for (long c = 0; c < dim; ++c) out(map[r], map[c]) = rho(r, c);
  return out;
}

}  // namespace spin1
