#pragma once

// Physical parameters, lattice geometry, power-law potentials and initial
// states shared by all solvers. Units: gamma = 1 and lattice constant a = 1
// unless configured otherwise; all rates in units of gamma, lengths in a.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "spin1/threelevel.hpp"

namespace spin1 {

struct ModelParams {
  double delta = 0.0;        // detuning Delta on the lower transition
  double omega_lower = 0.0;  // Rabi frequency Omega (down <-> mid)
  double omega_upper = 0.0;  // Rabi frequency omega (up <-> mid)
  double gamma = 1.0;        // decay rate of the mid level (sets the unit)
  double chi = 0.0;          // total interaction energy of the reference site
  int kappa = 3;             // power-law exponent, U(r) = C_kappa / r^kappa
  double lattice_constant = 1.0;

  DriveParams drives() const {
    return DriveParams{delta, omega_lower, omega_upper, gamma};
  }
  void validate() const;  // throws std::invalid_argument
};

// Square lattice, either a finite open-boundary patch or the translation
// invariant (thermodynamic-limit) lattice with a correlation cutoff radius.
struct Lattice {
  enum class Mode { finite, td_limit };

  Mode mode = Mode::finite;
  int nx = 1, ny = 1;          // finite only
  double r_cut = 0.0;          // td_limit only, units of a
  double a = 1.0;              // lattice constant

  static Lattice finite(int nx, int ny, double a = 1.0);
  static Lattice td_limit(double r_cut, double a = 1.0);

  int n_sites() const { return nx * ny; }  // finite only
  std::array<double, 2> position(int site) const;
  double distance(int i, int j) const;
  // Reference site for the chi normalization: the exact center for odd
  // dimensions, otherwise the site closest to the geometric center with the
  // lowest index as tie-break.
  int center_site() const;
};

// Displacements d with 0 < |d| <= r_cut on the infinite lattice, stored as a
// canonical half-plane (dy > 0, or dy == 0 and dx > 0); the full set is
// half U -half and is closed under negation by construction.
struct DisplacementSet {
  double r_cut = 0.0;
  double a = 1.0;
  std::vector<std::array<int, 2>> half;
  std::vector<double> dist_half;

  static DisplacementSet build(double r_cut, double a = 1.0);
  std::size_t half_count() const { return half.size(); }
  std::size_t full_count() const { return 2 * half.size(); }
};

// chi = C_kappa * S with S the lattice sum of r^-kappa around the reference
// site; returns C_kappa. Throws on degenerate lattices (S == 0, < 2 sites).
double coupling_from_chi(double chi, int kappa, const Lattice& lattice);

// Pairwise potential table U_ij = C_kappa / r_ij^kappa on a finite lattice
// (symmetric, zero diagonal).
Eigen::MatrixXd pair_potentials(const Lattice& lattice, double c_kappa, int kappa);

// Per-displacement potentials U(d) for the stored half-plane; U(-d) = U(d).
std::vector<double> displacement_potentials(const DisplacementSet& disp,
                                            double c_kappa, int kappa);

// Single-site states.
struct SiteState {
  Mat3 rho = Mat3::Zero();
  // Hermitian, unit trace, eigenvalues in [-tol, 1+tol].
  bool is_valid(double tol = 1e-9) const;
};

enum class InitialStateKind { all_down, all_zero, random_product, random_seeded };

InitialStateKind initial_state_kind_from_string(const std::string& s);
std::string to_string(InitialStateKind k);

// Single-site initial state; random kinds are deterministic given the seed.
SiteState initial_site_state(InitialStateKind kind, std::uint64_t seed = 0);

// Product state over n sites. For the random kinds every site gets an
// independent draw from the seeded stream.
std::vector<SiteState> initial_product_state(InitialStateKind kind, int n,
                                             std::uint64_t seed = 0);

}  // namespace spin1
