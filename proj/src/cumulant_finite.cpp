#include <stdexcept>

#include "cumulant_detail.hpp"
#include "spin1/cumulant.hpp"
#include "spin1/liouville.hpp"

namespace spin1 {

namespace {
constexpr int kMeansReals = 18;   // 9 complex
constexpr int kBlockReals = 162;  // 81 complex

Eigen::Map<const Vec9> means_view(const Eigen::VectorXd& y, int site) {
  return Eigen::Map<const Vec9>(
      reinterpret_cast<const cplx*>(y.data() + site * kMeansReals));
}

}  // namespace

CumulantFiniteSystem::CumulantFiniteSystem(const ModelParams& params,
                                           const Lattice& lattice)
    : params_(params), lattice_(lattice) {
  params_.validate();
  if (lattice.mode != Lattice::Mode::finite)
    throw std::invalid_argument("CumulantFiniteSystem: finite lattice required");
  n_ = lattice.n_sites();
  if (n_ < 2) throw std::invalid_argument("CumulantFiniteSystem: need >= 2 sites");
  const double c = coupling_from_chi(params.chi, params.kappa, lattice);
  u_ = pair_potentials(lattice, c, params.kappa);
  gmat_ = adjoint_generator_matrix(params.drives());
  for (int i = 0; i < n_; ++i)
    for (int j = i + 1; j < n_; ++j) pairs_.emplace_back(i, j);
}

Eigen::Index CumulantFiniteSystem::state_size() const {
  return static_cast<Eigen::Index>(n_) * kMeansReals +
         static_cast<Eigen::Index>(pairs_.size()) * kBlockReals;
}

int CumulantFiniteSystem::pair_index(int i, int j) const {
  if (i == j || i < 0 || j < 0 || i >= n_ || j >= n_)
    throw std::invalid_argument("pair_index: invalid pair");
  if (i > j) std::swap(i, j);
  // pairs (i<j) in lexicographic order
  return i * n_ - i * (i + 1) / 2 + (j - i - 1);
}

void CumulantFiniteSystem::pack_product(const std::vector<SiteState>& sites,
                                        Eigen::VectorXd& y) const {
  if (static_cast<int>(sites.size()) != n_)
    throw std::invalid_argument("pack_product: site count mismatch");
  y.setZero(state_size());
  for (int i = 0; i < n_; ++i) {
    Eigen::Map<Vec9>(reinterpret_cast<cplx*>(y.data() + i * kMeansReals)) =
        means_from_rho(sites[i].rho);
  }
}

void CumulantFiniteSystem::pack_from_exact(const Eigen::MatrixXcd& rho,
                                           Eigen::VectorXd& y) const {
  y.setZero(state_size());
  for (int i = 0; i < n_; ++i)
    Eigen::Map<Vec9>(reinterpret_cast<cplx*>(y.data() + i * kMeansReals)) =
        exact_means(rho, n_, i);
  const Eigen::Index base = static_cast<Eigen::Index>(n_) * kMeansReals;
  for (std::size_t k = 0; k < pairs_.size(); ++k) {
    const auto [i, j] = pairs_[k];
    Block9 m = exact_pair_moment(rho, n_, i, j);
    m.noalias() -= exact_means(rho, n_, i) * exact_means(rho, n_, j).transpose();
    Eigen::Map<Block9>(reinterpret_cast<cplx*>(y.data() + base + k * kBlockReals)) = m;
  }
}

Vec9 CumulantFiniteSystem::means(const Eigen::VectorXd& y, int site) const {
  return means_view(y, site);
}

Block9 CumulantFiniteSystem::cumulant(const Eigen::VectorXd& y, int i, int j) const {
  const Eigen::Index base = static_cast<Eigen::Index>(n_) * kMeansReals;
  const int k = pair_index(i, j);
  Eigen::Map<const Block9> b(
      reinterpret_cast<const cplx*>(y.data() + base + k * kBlockReals));
  if (i < j) return b;
  return b.transpose();  // exchange symmetry C^{ji}[q][p] = C^{ij}[p][q]
}

Block9 CumulantFiniteSystem::moment(const Eigen::VectorXd& y, int i, int j) const {
  return cumulant(y, i, j) + means(y, i) * means(y, j).transpose();
}

void CumulantFiniteSystem::rhs(const Eigen::VectorXd& y, Eigen::VectorXd& dy) const {
  static const cplx iu(0.0, 1.0);
  const auto& wt = detail::mask_wt();
  dy.setZero(y.size());
  const Eigen::Index base = static_cast<Eigen::Index>(n_) * kMeansReals;
  const Eigen::MatrixXcd uc = u_.cast<cplx>();

  Eigen::VectorXcd mup(n_);
  for (int i = 0; i < n_; ++i) mup(i) = means_view(y, i)(kNumUpIndex);

  // W[p](i,k) = C^{ik}[p][8], zero diagonal
  std::array<Eigen::MatrixXcd, 9> w;
  for (int p = 0; p < 9; ++p) w[p].setZero(n_, n_);
  for (std::size_t k = 0; k < pairs_.size(); ++k) {
    const auto [i, j] = pairs_[k];
    Eigen::Map<const Block9> c(
        reinterpret_cast<const cplx*>(y.data() + base + k * kBlockReals));
    for (int p = 0; p < 9; ++p) {
      w[p](i, j) = c(p, kNumUpIndex);
      w[p](j, i) = c(kNumUpIndex, p);
    }
  }

  const Eigen::VectorXcd su = uc * mup;

  // t-products: T^{ij}[q] = (W[q] U)(j, i); excluded k = i, j vanish since
  // U has zero diagonal and W vanishes on its diagonal.
  std::array<Eigen::MatrixXcd, 9> tp;
  for (int p = 0; p < 9; ++p) tp[p].noalias() = w[p] * uc;

  // means
  for (int i = 0; i < n_; ++i) {
    const Vec9 m = means_view(y, i);
    Vec9 v;  // v[p] = sum_k U_ik C^{ik}[p][8]
    for (int p = 0; p < 9; ++p) {
      cplx acc = 0.0;
      for (int k = 0; k < n_; ++k) acc += w[p](i, k) * uc(k, i);
      v(p) = acc;
    }
    Vec9 dm = gmat_ * m;
    for (int p = 0; p < 9; ++p) dm(p) += iu * wt(p) * (m(p) * su(i) + v(p));
    Eigen::Map<Vec9>(reinterpret_cast<cplx*>(dy.data() + i * kMeansReals)) = dm;
  }

  // pair blocks
  for (std::size_t k = 0; k < pairs_.size(); ++k) {
    const auto [i, j] = pairs_[k];
    const Vec9 mi = means_view(y, i), mj = means_view(y, j);
    Eigen::Map<const Block9> c(
        reinterpret_cast<const cplx*>(y.data() + base + k * kBlockReals));
    Vec9 t_ij, t_ji;
    for (int q = 0; q < 9; ++q) {
      t_ij(q) = tp[q](j, i);
      t_ji(q) = tp[q](i, j);
    }
    const cplx s_ij = su(i) - u_(i, j) * mj(kNumUpIndex);
    const cplx s_ji = su(j) - u_(i, j) * mi(kNumUpIndex);
    Block9 out = Block9::Zero();
    detail::accumulate_block_rhs(gmat_, u_(i, j), mi, mj, c, s_ij, s_ji, t_ij, t_ji,
                                 out);
    Eigen::Map<Block9>(reinterpret_cast<cplx*>(dy.data() + base + k * kBlockReals)) =
        out;
  }
}

void CumulantFiniteSystem::rhs_generic(const Eigen::VectorXd& y, Eigen::VectorXd& dy,
                                       const ThirdMomentProvider& t3) const {
  static const cplx iu(0.0, 1.0);
  const auto& l = detail::mask_left();
  const auto& r = detail::mask_right();
  const auto& wt = detail::mask_wt();
  dy.setZero(y.size());
  const Eigen::Index base = static_cast<Eigen::Index>(n_) * kMeansReals;

  // means: dm_i = G m_i + i wt o sum_{k != i} U_ik M^{ik}[:,8]
  for (int i = 0; i < n_; ++i) {
    const Vec9 m = means_view(y, i);
    Vec9 dm = gmat_ * m;
    for (int k = 0; k < n_; ++k) {
      if (k == i) continue;
      const Block9 mom = moment(y, i, k);
      for (int p = 0; p < 9; ++p)
        dm(p) += iu * wt(p) * u_(i, k) * mom(p, kNumUpIndex);
    }
    Eigen::Map<Vec9>(reinterpret_cast<cplx*>(dy.data() + i * kMeansReals)) = dm;
  }

  for (std::size_t kk = 0; kk < pairs_.size(); ++kk) {
    const auto [i, j] = pairs_[kk];
    const Vec9 mi = means_view(y, i), mj = means_view(y, j);
    const Block9 c = cumulant(y, i, j);
    const Block9 mom = moment(y, i, j);
    Block9 out;
    out.noalias() = gmat_ * c;
    out.noalias() += c * gmat_.transpose();
    for (int q = 0; q < 9; ++q)
      for (int p = 0; p < 9; ++p)
        out(p, q) += iu * u_(i, j) * (l(p) * l(q) - r(p) * r(q)) * mom(p, q);
    for (int q = 0; q < 9; ++q)
      for (int p = 0; p < 9; ++p) {
        out(p, q) -= iu * u_(i, j) * wt(p) * mom(p, kNumUpIndex) * mj(q);
        out(p, q) -=
            iu * u_(i, j) * mi(p) * wt(q) * (mj(q) * mi(kNumUpIndex) + c(kNumUpIndex, q));
      }
    for (int k = 0; k < n_; ++k) {
      if (k == i || k == j) continue;
      const Block9 three = t3(i, j, k);
      const Block9 mik = moment(y, i, k);
      const Block9 mjk = moment(y, j, k);
      for (int q = 0; q < 9; ++q)
        for (int p = 0; p < 9; ++p) {
          out(p, q) +=
              iu * u_(i, k) * wt(p) * (three(p, q) - mik(p, kNumUpIndex) * mj(q));
          out(p, q) +=
              iu * u_(j, k) * wt(q) * (three(p, q) - mi(p) * mjk(q, kNumUpIndex));
        }
    }
    Eigen::Map<Block9>(reinterpret_cast<cplx*>(dy.data() + base + kk * kBlockReals)) =
        out;
  }
}

ThirdMomentProvider CumulantFiniteSystem::closure_provider(
    const Eigen::VectorXd& y) const {
  return [this, &y](int i, int j, int k) {
    const Vec9 mi = means(y, i), mj = means(y, j), mk = means(y, k);
    const Block9 mij = moment(y, i, j), mik = moment(y, i, k), mjk = moment(y, j, k);
    Block9 out;
    for (int q = 0; q < 9; ++q)
      for (int p = 0; p < 9; ++p)
        out(p, q) = third_order_closure(mi(p), mj(q), mk(kNumUpIndex), mij(p, q),
                                        mik(p, kNumUpIndex), mjk(q, kNumUpIndex));
    return out;
  };
}

void CumulantFiniteSystem::drop_cumulants(Eigen::VectorXd& y) const {
  y.segment(static_cast<Eigen::Index>(n_) * kMeansReals,
            static_cast<Eigen::Index>(pairs_.size()) * kBlockReals)
      .setZero();
}

double CumulantFiniteSystem::mean_up(const Eigen::VectorXd& y) const {
  double s = 0.0;
  for (int i = 0; i < n_; ++i) s += means_view(y, i)(kNumUpIndex).real();
  return s / n_;
}

double CumulantFiniteSystem::f2(const Eigen::VectorXd& y) const {
  // (<N_up^2> - <N_up>^2)/N = [sum_i n_i(1 - n_i) + sum_{i != j} C_ij[up;up]]/N
  double acc = 0.0;
  for (int i = 0; i < n_; ++i) {
    const double nu = means_view(y, i)(kNumUpIndex).real();
    acc += nu * (1.0 - nu);
  }
  const Eigen::Index base = static_cast<Eigen::Index>(n_) * kMeansReals;
  for (std::size_t k = 0; k < pairs_.size(); ++k) {
    Eigen::Map<const Block9> c(
        reinterpret_cast<const cplx*>(y.data() + base + k * kBlockReals));
    acc += 2.0 * c(kNumUpIndex, kNumUpIndex).real();
  }
  return acc / n_;
}

void CumulantFiniteSystem::interaction_energies(const Eigen::VectorXd& y, double& e_mf,
                                                double& e_qu) const {
  e_mf = 0.0;
  e_qu = 0.0;
  const Eigen::Index base = static_cast<Eigen::Index>(n_) * kMeansReals;
  for (std::size_t k = 0; k < pairs_.size(); ++k) {
    const auto [i, j] = pairs_[k];
    const double ni = means_view(y, i)(kNumUpIndex).real();
    const double nj = means_view(y, j)(kNumUpIndex).real();
    Eigen::Map<const Block9> c(
        reinterpret_cast<const cplx*>(y.data() + base + k * kBlockReals));
    e_mf += u_(i, j) * ni * nj;
    e_qu += u_(i, j) * c(kNumUpIndex, kNumUpIndex).real();
  }
}

// ---------------------------------------------------------------------------

Vec9 exact_means(const Eigen::MatrixXcd& rho, int n_factors, int site) {
  const Eigen::MatrixXcd r1 = reduced_density_matrix(rho, n_factors, {site});
  Vec9 m;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) m(op_index(a, b)) = r1(b, a);
  return m;
}

Block9 exact_pair_moment(const Eigen::MatrixXcd& rho, int n_factors, int i, int j) {
  const Eigen::MatrixXcd r2 = reduced_density_matrix(rho, n_factors, {i, j});
  Block9 m;
  for (int p = 0; p < 9; ++p)
    for (int q = 0; q < 9; ++q) {
      const int a = op_row(p), b = op_col(p), g = op_row(q), h = op_col(q);
      m(p, q) = r2(3 * b + h, 3 * a + g);
    }
  return m;
}

Block9 exact_third_moment(const Eigen::MatrixXcd& rho, int n_factors, int i, int j,
                          int k) {
  const Eigen::MatrixXcd r3 = reduced_density_matrix(rho, n_factors, {i, j, k});
  Block9 m;
  for (int p = 0; p < 9; ++p)
    for (int q = 0; q < 9; ++q) {
      const int a = op_row(p), b = op_col(p), g = op_row(q), h = op_col(q);
      // <e_p e_q n_up> = <b h up| rho |a g up>
      m(p, q) = r3((3 * b + h) * 3 + kUp, (3 * a + g) * 3 + kUp);
    }
  return m;
}

}  // namespace spin1
