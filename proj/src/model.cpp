#include "spin1/model.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace spin1 {

void ModelParams::validate() const {
  if (gamma <= 0.0) throw std::invalid_argument("ModelParams: gamma must be > 0");
  if (kappa < 1) throw std::invalid_argument("ModelParams: kappa must be >= 1");
  if (lattice_constant <= 0.0)
    throw std::invalid_argument("ModelParams: lattice_constant must be > 0");
}

Lattice Lattice::finite(int nx, int ny, double a) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("Lattice: empty lattice");
  if (a <= 0.0) throw std::invalid_argument("Lattice: lattice constant must be > 0");
  Lattice l;
  l.mode = Mode::finite;
  l.nx = nx;
  l.ny = ny;
  l.a = a;
  return l;
}

Lattice Lattice::td_limit(double r_cut, double a) {
  if (a <= 0.0) throw std::invalid_argument("Lattice: lattice constant must be > 0");
  if (r_cut < a) throw std::invalid_argument("Lattice: r_cut must be >= a");
  Lattice l;
  l.mode = Mode::td_limit;
  l.r_cut = r_cut;
  l.a = a;
  return l;
}

std::array<double, 2> Lattice::position(int site) const {
  return {a * (site % nx), a * (site / nx)};
}

double Lattice::distance(int i, int j) const {
  const auto pi = position(i), pj = position(j);
  return std::hypot(pi[0] - pj[0], pi[1] - pj[1]);
}

int Lattice::center_site() const {
  const double cx = 0.5 * a * (nx - 1), cy = 0.5 * a * (ny - 1);
  int best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (int s = 0; s < n_sites(); ++s) {
    const auto p = position(s);
    const double d2 = (p[0] - cx) * (p[0] - cx) + (p[1] - cy) * (p[1] - cy);
    if (d2 < best_d2 - 1e-12) {
      best_d2 = d2;
      best = s;
    }
  }
  return best;
}

DisplacementSet DisplacementSet::build(double r_cut, double a) {
  if (a <= 0.0 || r_cut < a)
    throw std::invalid_argument("DisplacementSet: need r_cut >= a > 0");
  DisplacementSet d;
  d.r_cut = r_cut;
  d.a = a;
  const int m = static_cast<int>(std::floor(r_cut / a + 1e-9));
  for (int dy = 0; dy <= m; ++dy) {
    for (int dx = -m; dx <= m; ++dx) {
      if (dy == 0 && dx <= 0) continue;  // canonical half-plane
      const double r = a * std::hypot(static_cast<double>(dx), static_cast<double>(dy));
      if (r <= r_cut + 1e-9) {
        d.half.push_back({dx, dy});
        d.dist_half.push_back(r);
      }
    }
  }
  return d;
}

double coupling_from_chi(double chi, int kappa, const Lattice& lattice) {
  double s = 0.0;
  if (lattice.mode == Lattice::Mode::finite) {
    if (lattice.n_sites() < 2)
      throw std::invalid_argument("coupling_from_chi: need at least 2 sites");
    const int ref = lattice.center_site();
    for (int j = 0; j < lattice.n_sites(); ++j) {
      if (j == ref) continue;
      s += std::pow(lattice.distance(ref, j), -kappa);
    }
  } else {
    const auto disp = DisplacementSet::build(lattice.r_cut, lattice.a);
    for (double r : disp.dist_half) s += 2.0 * std::pow(r, -kappa);
  }
  if (s <= 0.0) throw std::invalid_argument("coupling_from_chi: degenerate lattice sum");
  return chi / s;
}

Eigen::MatrixXd pair_potentials(const Lattice& lattice, double c_kappa, int kappa) {
  if (lattice.mode != Lattice::Mode::finite)
    throw std::invalid_argument("pair_potentials: finite lattice expected");
  const int n = lattice.n_sites();
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      u(i, j) = u(j, i) = c_kappa * std::pow(lattice.distance(i, j), -kappa);
  return u;
}

std::vector<double> displacement_potentials(const DisplacementSet& disp,
                                            double c_kappa, int kappa) {
  std::vector<double> u(disp.half.size());
  for (std::size_t k = 0; k < disp.half.size(); ++k)
    u[k] = c_kappa * std::pow(disp.dist_half[k], -kappa);
  return u;
}

bool SiteState::is_valid(double tol) const {
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > tol) return false;
  if (std::abs(rho.trace() - 1.0) > tol) return false;
  Eigen::SelfAdjointEigenSolver<Mat3> es(rho, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() > -tol && es.eigenvalues().maxCoeff() < 1.0 + tol;
}

InitialStateKind initial_state_kind_from_string(const std::string& s) {
  if (s == "all_down") return InitialStateKind::all_down;
  if (s == "all_zero") return InitialStateKind::all_zero;
  if (s == "random_product") return InitialStateKind::random_product;
  if (s == "random_seeded") return InitialStateKind::random_seeded;
  throw std::invalid_argument("unknown initial state kind: " + s);
}

std::string to_string(InitialStateKind k) {
  switch (k) {
    case InitialStateKind::all_down: return "all_down";
    case InitialStateKind::all_zero: return "all_zero";
    case InitialStateKind::random_product: return "random_product";
    case InitialStateKind::random_seeded: return "random_seeded";
  }
  return "?";
}

namespace {

// Ginibre draw: rho = G G^dag / tr, full-rank almost surely.
Mat3 random_density_matrix(std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Mat3 g;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) g(r, c) = cplx(nd(rng), nd(rng));
  Mat3 rho = g * g.adjoint();
  rho /= rho.trace().real();
  return rho;
}

}  // namespace

SiteState initial_site_state(InitialStateKind kind, std::uint64_t seed) {
  SiteState s;
  switch (kind) {
    case InitialStateKind::all_down:
      s.rho = Mat3::Zero();
      s.rho(kDown, kDown) = 1.0;
      break;
    case InitialStateKind::all_zero:
      s.rho = Mat3::Zero();
      s.rho(kMid, kMid) = 1.0;
      break;
    case InitialStateKind::random_product:
    case InitialStateKind::random_seeded: {
      std::mt19937_64 rng(seed);
      s.rho = random_density_matrix(rng);
      break;
    }
  }
  return s;
}

std::vector<SiteState> initial_product_state(InitialStateKind kind, int n,
                                             std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("initial_product_state: n must be >= 1");
  std::vector<SiteState> out;
  out.reserve(n);
  if (kind == InitialStateKind::random_product || kind == InitialStateKind::random_seeded) {
    std::mt19937_64 rng(seed);
    for (int i = 0; i < n; ++i) {
      SiteState s;
      s.rho = random_density_matrix(rng);
      out.push_back(s);
    }
  } else {
    for (int i = 0; i < n; ++i) out.push_back(initial_site_state(kind));
  }
  return out;
}

}  // namespace spin1
