#pragma once

// Derived quantities: oscillation contrast, fluctuation scaling fits,
// interaction energies, two-body reduced density matrices, entanglement
// negativity, Fourier spectra, heating.

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "spin1/threelevel.hpp"
#include "spin1/timeseries.hpp"

namespace spin1 {

// Time-averaged variance of a channel over [t_start, t_start + tau], with the
// window doubled until |d2(2 tau) - d2(tau)| < max(1e-3 d2, 1e-10) or data
// runs out. Quadrature: trapezoidal.
struct ContrastResult {
  double delta2 = 0.0;
  double tau_used = 0.0;
  bool converged = false;
};
ContrastResult oscillation_contrast(const std::vector<double>& times,
                                    const std::vector<double>& channel,
                                    double t_start, double tau);
ContrastResult oscillation_contrast(const TimeSeries& ts, const std::string& channel,
                                    double t_start, double tau);

// Least-squares fits of F^2_inf against N: power law (on logs) and linear.
struct ScalingFit {
  double exponent = 0.0;        // power-law exponent
  double power_residual = 0.0;  // rms residual of the log-log fit
  double linear_slope = 0.0;
  double linear_intercept = 0.0;
  double linear_residual = 0.0;  // rms residual of the linear fit (on values)
  int points_used = 0;
  std::vector<std::string> warnings;
};
ScalingFit fit_scaling(const std::vector<std::pair<double, double>>& points);

// Two-body reduced density matrix assembled from a pair moment block
// M[p][q] = <sigma_p^(i) sigma_q^(j)>; basis (down,mid,up) x (down,mid,up),
// first factor slowest. Hermitian/trace-1 up to the state's own tolerances;
// positivity is not guaranteed under cumulant truncation.
Eigen::Matrix<cplx, 9, 9> two_body_rdm(const Block9& pair_moment);

// Partial transpose over the first factor of a 9x9 two-body matrix.
Eigen::Matrix<cplx, 9, 9> partial_transpose_first(const Eigen::Matrix<cplx, 9, 9>& rho);

// log2 of the trace norm of the partial transpose; also reports the minimum
// eigenvalue of the input (negative values signal truncation artifacts).
struct NegativityResult {
  double log_negativity = 0.0;
  double min_eigenvalue = 0.0;  // of the input matrix
};
NegativityResult log_negativity(const Eigen::Matrix<cplx, 9, 9>& rho,
                                double herm_tol = 1e-7);

// Discrete Fourier amplitude spectrum of a channel over [t_start, t_end].
// The channel is resampled uniformly (linear interpolation), mean-subtracted
// and Hann-tapered. Frequencies are angular (rad per unit time).
struct Spectrum {
  std::vector<double> frequency;
  std::vector<double> amplitude;
  double dominant_frequency = 0.0;  // argmax over positive frequencies
  double dominant_amplitude = 0.0;
  bool window_too_short = false;  // fewer than ~4 periods of the dominant mode
};
Spectrum fourier_spectrum(const std::vector<double>& times,
                          const std::vector<double>& channel, double t_start,
                          double t_end);

// n_d(t) = gamma * int_0^t n_mid dt' (cumulative trapezoid); requires the
// series to start at t = 0 and n_mid >= -1e-9.
std::vector<double> decays_per_atom(const std::vector<double>& times,
                                    const std::vector<double>& n_mid, double gamma);

// Exact-state fluctuations (<N_up^2> - <N_up>^2)/N for an N-site state.
double exact_f2(const Eigen::MatrixXcd& rho, int n_factors);

}  // namespace spin1
