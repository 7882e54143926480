#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <stdexcept>

#include "cumulant_detail.hpp"
#include "spin1/cumulant.hpp"

namespace spin1 {

namespace {

constexpr int kMeansReals = 18;
constexpr int kBlockReals = 162;

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

int good_fft_size(int n) {
  for (int s = n;; ++s) {
    int r = s;
    for (int f : {2, 3, 5})
      while (r % f == 0) r /= f;
    if (r == 1) return s;
  }
}

}  // namespace

// Displacement bookkeeping and convolution scratch. The correlation sums
//   Xi_d[p]  = sum_{x in D, x != d} U(x - d) C_x[p][up]
//   Psi_d[p] = sum_{e in D, e != -d} U(d + e) C_e[p][up]
// are both readoffs of F(d) = sum_y U(y - d) w_y with w_y[p] = C_y[p][up]:
// Xi_d = F(d), Psi_d = F(-d). U is the r_cut-truncated potential (zero at 0
// and beyond r_cut), so the excluded terms vanish automatically. F is either
// summed directly or evaluated as a circular convolution with FFTs.
struct CumulantTDSystem::Scratch {
  int m = 0;  // max integer displacement component
  int full_count = 0;
  std::vector<int> full_dx, full_dy;
  std::vector<int> full_half_idx;  // index into the half-plane storage
  std::vector<bool> full_is_neg;
  std::vector<double> u_full;
  std::vector<double> ext_u;   // truncated potential on [-2m, 2m]^2
  int ext_side = 0;

  // FFT work buffers
  int S = 0;
  fftw_plan fwd = nullptr, bwd = nullptr;
  std::vector<cplx> fft_in, fft_out;
  std::vector<cplx> kernel_fft_conj;

  // per-call fields
  std::vector<cplx> w_full;  // [p * full_count + f]
  std::vector<cplx> f_full;  // [p * full_count + f]

  ~Scratch() {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
  }

  double ext_potential(int dx, int dy) const {
    if (std::abs(dx) > 2 * m || std::abs(dy) > 2 * m) return 0.0;
    return ext_u[(dy + 2 * m) * ext_side + (dx + 2 * m)];
  }
};

CumulantTDSystem::CumulantTDSystem(const ModelParams& params, double r_cut,
                                   bool use_fft)
    : params_(params), use_fft_(use_fft) {
  params_.validate();
  disp_ = DisplacementSet::build(r_cut, params.lattice_constant);
  const double c_kappa =
      coupling_from_chi(params.chi, params.kappa, Lattice::td_limit(r_cut, params.lattice_constant));
  u_half_ = displacement_potentials(disp_, c_kappa, params.kappa);
  gmat_ = adjoint_generator_matrix(params.drives());

  auto s = std::make_unique<Scratch>();
  const double a = params.lattice_constant;
  s->m = static_cast<int>(std::floor(r_cut / a + 1e-9));
  const std::size_t h = disp_.half_count();
  s->full_count = static_cast<int>(2 * h);
  s->full_dx.resize(s->full_count);
  s->full_dy.resize(s->full_count);
  s->full_half_idx.resize(s->full_count);
  s->full_is_neg.resize(s->full_count);
  s->u_full.resize(s->full_count);
  for (std::size_t k = 0; k < h; ++k) {
    s->full_dx[2 * k] = disp_.half[k][0];
    s->full_dy[2 * k] = disp_.half[k][1];
    s->full_half_idx[2 * k] = static_cast<int>(k);
    s->full_is_neg[2 * k] = false;
    s->u_full[2 * k] = u_half_[k];
    s->full_dx[2 * k + 1] = -disp_.half[k][0];
    s->full_dy[2 * k + 1] = -disp_.half[k][1];
    s->full_half_idx[2 * k + 1] = static_cast<int>(k);
    s->full_is_neg[2 * k + 1] = true;
    s->u_full[2 * k + 1] = u_half_[k];
  }

  s->ext_side = 4 * s->m + 1;
  s->ext_u.assign(static_cast<std::size_t>(s->ext_side) * s->ext_side, 0.0);
  for (int dy = -2 * s->m; dy <= 2 * s->m; ++dy)
    for (int dx = -2 * s->m; dx <= 2 * s->m; ++dx) {
      if (dx == 0 && dy == 0) continue;
      const double r = a * std::hypot(static_cast<double>(dx), static_cast<double>(dy));
      if (r <= r_cut + 1e-9)
        s->ext_u[(dy + 2 * s->m) * s->ext_side + (dx + 2 * s->m)] =
            c_kappa * std::pow(r, -params.kappa);
    }

  s->w_full.assign(static_cast<std::size_t>(9) * s->full_count, cplx(0.0));
  s->f_full.assign(static_cast<std::size_t>(9) * s->full_count, cplx(0.0));

  if (use_fft_) {
    s->S = good_fft_size(4 * s->m + 1);
    const std::size_t n2 = static_cast<std::size_t>(s->S) * s->S;
    s->fft_in.assign(n2, cplx(0.0));
    s->fft_out.assign(n2, cplx(0.0));
    {
      std::lock_guard<std::mutex> lock(fftw_planner_mutex());
      s->fwd = fftw_plan_dft_2d(s->S, s->S,
                                reinterpret_cast<fftw_complex*>(s->fft_in.data()),
                                reinterpret_cast<fftw_complex*>(s->fft_out.data()),
                                FFTW_FORWARD, FFTW_ESTIMATE);
      s->bwd = fftw_plan_dft_2d(s->S, s->S,
                                reinterpret_cast<fftw_complex*>(s->fft_in.data()),
                                reinterpret_cast<fftw_complex*>(s->fft_out.data()),
                                FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    // kernel transform: conj(FFT(U)) / S^2 folds in the inverse normalization
    std::fill(s->fft_in.begin(), s->fft_in.end(), cplx(0.0));
    auto wrap = [&](int v) { return ((v % s->S) + s->S) % s->S; };
    for (int dy = -2 * s->m; dy <= 2 * s->m; ++dy)
      for (int dx = -2 * s->m; dx <= 2 * s->m; ++dx) {
        const double u = s->ext_potential(dx, dy);
        if (u != 0.0) s->fft_in[wrap(dy) * s->S + wrap(dx)] = u;
      }
    fftw_execute(s->fwd);
    s->kernel_fft_conj.resize(n2);
    const double norm = 1.0 / static_cast<double>(n2);
    for (std::size_t i = 0; i < n2; ++i)
      s->kernel_fft_conj[i] = std::conj(s->fft_out[i]) * norm;
  }
  scratch_ = std::move(s);
}

CumulantTDSystem::~CumulantTDSystem() = default;
CumulantTDSystem::CumulantTDSystem(CumulantTDSystem&&) noexcept = default;

Eigen::Index CumulantTDSystem::state_size() const {
  return kMeansReals + static_cast<Eigen::Index>(disp_.half_count()) * kBlockReals;
}

void CumulantTDSystem::pack_product(const SiteState& site, Eigen::VectorXd& y) const {
  y.setZero(state_size());
  Eigen::Map<Vec9>(reinterpret_cast<cplx*>(y.data())) = means_from_rho(site.rho);
}

Vec9 CumulantTDSystem::means(const Eigen::VectorXd& y) const {
  return Eigen::Map<const Vec9>(reinterpret_cast<const cplx*>(y.data()));
}

void CumulantTDSystem::set_means(Eigen::VectorXd& y, const Vec9& m) const {
  Eigen::Map<Vec9>(reinterpret_cast<cplx*>(y.data())) = m;
}

Block9 CumulantTDSystem::cumulant_half(const Eigen::VectorXd& y,
                                       std::size_t half_idx) const {
  return Eigen::Map<const Block9>(
      reinterpret_cast<const cplx*>(y.data() + kMeansReals + half_idx * kBlockReals));
}

Block9 CumulantTDSystem::cumulant_at(const Eigen::VectorXd& y, int dx, int dy) const {
  for (std::size_t k = 0; k < disp_.half.size(); ++k) {
    if (disp_.half[k][0] == dx && disp_.half[k][1] == dy) return cumulant_half(y, k);
    if (disp_.half[k][0] == -dx && disp_.half[k][1] == -dy)
      return cumulant_half(y, k).transpose();
  }
  throw std::invalid_argument("cumulant_at: displacement not stored");
}

Block9 CumulantTDSystem::moment_at(const Eigen::VectorXd& y, int dx, int dy) const {
  const Vec9 m = means(y);
  return cumulant_at(y, dx, dy) + m * m.transpose();
}

void CumulantTDSystem::drop_cumulants(Eigen::VectorXd& y) const {
  y.segment(kMeansReals, y.size() - kMeansReals).setZero();
}

double CumulantTDSystem::n_up(const Eigen::VectorXd& y) const {
  return means(y)(kNumUpIndex).real();
}

double CumulantTDSystem::f2(const Eigen::VectorXd& y) const {
  const double nu = n_up(y);
  double acc = nu - nu * nu;
  for (std::size_t k = 0; k < disp_.half_count(); ++k)
    acc += 2.0 * cumulant_half(y, k)(kNumUpIndex, kNumUpIndex).real();
  return acc;
}

void CumulantTDSystem::interaction_energies(const Eigen::VectorXd& y, double& e_mf,
                                            double& e_qu) const {
  const double nu = n_up(y);
  e_mf = params_.chi * nu * nu;
  e_qu = 0.0;
  for (std::size_t k = 0; k < disp_.half_count(); ++k)
    e_qu += 2.0 * u_half_[k] * cumulant_half(y, k)(kNumUpIndex, kNumUpIndex).real();
}

void CumulantTDSystem::rhs(const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
  static const cplx iu(0.0, 1.0);
  const auto& wt = detail::mask_wt();
  Scratch& s = *scratch_;
  const std::size_t h = disp_.half_count();
  dy.resize(y.size());

  const Vec9 m = means(y);
  const cplx m_up = m(kNumUpIndex);

  // gather w fields and the correlation sum Phi[p] = sum_e U(e) C_e[p][up]
  Vec9 phi = Vec9::Zero();
  for (std::size_t k = 0; k < h; ++k) {
    Eigen::Map<const Block9> c(
        reinterpret_cast<const cplx*>(y.data() + kMeansReals + k * kBlockReals));
    for (int p = 0; p < 9; ++p) {
      const cplx wp = c(p, kNumUpIndex);         // C_d[p][up]
      const cplx wn = c(kNumUpIndex, p);         // C_{-d}[p][up]
      s.w_full[p * s.full_count + 2 * k] = wp;
      s.w_full[p * s.full_count + 2 * k + 1] = wn;
      phi(p) += u_half_[k] * (wp + wn);
    }
  }

  // F(d) = sum_y U(y - d) w_y for every stored displacement
  if (use_fft_) {
    auto wrap = [&](int v) { return ((v % s.S) + s.S) % s.S; };
    const std::size_t n2 = static_cast<std::size_t>(s.S) * s.S;
    for (int p = 0; p < 9; ++p) {
      std::fill(s.fft_in.begin(), s.fft_in.end(), cplx(0.0));
      for (int f = 0; f < s.full_count; ++f)
        s.fft_in[wrap(s.full_dy[f]) * s.S + wrap(s.full_dx[f])] =
            s.w_full[p * s.full_count + f];
      fftw_execute(s.fwd);
      for (std::size_t i = 0; i < n2; ++i) s.fft_in[i] = s.fft_out[i] * s.kernel_fft_conj[i];
      fftw_execute(s.bwd);
      for (int f = 0; f < s.full_count; ++f)
        s.f_full[p * s.full_count + f] =
            s.fft_out[wrap(s.full_dy[f]) * s.S + wrap(s.full_dx[f])];
    }
  } else {
    for (int f = 0; f < s.full_count; ++f) {
      const int dx = s.full_dx[f], dyy = s.full_dy[f];
      for (int p = 0; p < 9; ++p) s.f_full[p * s.full_count + f] = cplx(0.0);
      for (int g = 0; g < s.full_count; ++g) {
        const double u = s.ext_potential(s.full_dx[g] - dx, s.full_dy[g] - dyy);
        if (u == 0.0) continue;
        for (int p = 0; p < 9; ++p)
          s.f_full[p * s.full_count + f] += u * s.w_full[p * s.full_count + g];
      }
    }
  }

  // means: dm = G m + i wt o (chi m_up m + Phi)
  Vec9 dm = gmat_ * m;
  for (int p = 0; p < 9; ++p)
    dm(p) += iu * wt(p) * (params_.chi * m_up * m(p) + phi(p));
  Eigen::Map<Vec9>(reinterpret_cast<cplx*>(dy.data())) = dm;

  // blocks
  for (std::size_t k = 0; k < h; ++k) {
    Eigen::Map<const Block9> c(
        reinterpret_cast<const cplx*>(y.data() + kMeansReals + k * kBlockReals));
    Vec9 psi, xi;
    for (int p = 0; p < 9; ++p) {
      xi(p) = s.f_full[p * s.full_count + 2 * k];       // F(d)
      psi(p) = s.f_full[p * s.full_count + 2 * k + 1];  // F(-d)
    }
    const cplx sd = (params_.chi - u_half_[k]) * m_up;
    Block9 out = Block9::Zero();
    detail::accumulate_block_rhs(gmat_, u_half_[k], m, m, c, sd, sd, psi, xi, out);
    Eigen::Map<Block9>(reinterpret_cast<cplx*>(dy.data() + kMeansReals +
                                               k * kBlockReals)) = out;
  }
}

}  // namespace spin1
