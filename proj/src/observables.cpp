#include "spin1/observables.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace spin1 {

namespace {

// trapezoidal mean of f and f^2 over [a, b]; times must cover [a, b]
void window_means(const std::vector<double>& t, const std::vector<double>& f, double a,
                  double b, double& mean, double& mean_sq) {
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    double lo = std::max(t[i], a), hi = std::min(t[i + 1], b);
    if (hi <= lo) continue;
    const double dt = t[i + 1] - t[i];
    auto fat = [&](double x) { return f[i] + (f[i + 1] - f[i]) * (x - t[i]) / dt; };
    const double flo = fat(lo), fhi = fat(hi);
    s1 += 0.5 * (flo + fhi) * (hi - lo);
    // f is piecewise linear, f^2 piecewise quadratic: Simpson is exact
    const double fmid = 0.5 * (flo + fhi);
    s2 += (hi - lo) / 6.0 * (flo * flo + 4.0 * fmid * fmid + fhi * fhi);
  }
  mean = s1 / (b - a);
  mean_sq = s2 / (b - a);
}

double contrast_on(const std::vector<double>& t, const std::vector<double>& f, double a,
                   double b) {
  double mean = 0.0, mean_sq = 0.0;
  window_means(t, f, a, b, mean, mean_sq);
  return std::max(0.0, mean_sq - mean * mean);
}

}  // namespace

ContrastResult oscillation_contrast(const std::vector<double>& times,
                                    const std::vector<double>& channel, double t_start,
                                    double tau) {
  if (times.size() != channel.size() || times.size() < 2)
    throw std::invalid_argument("oscillation_contrast: bad series");
  if (tau <= 0.0) throw std::invalid_argument("oscillation_contrast: tau must be > 0");
  const double t_end = times.back();
  if (t_start < times.front() - 1e-9 || t_start + tau > t_end + 1e-9)
    throw std::invalid_argument("oscillation_contrast: window exceeds series");

  ContrastResult res;
  double cur = contrast_on(times, channel, t_start, t_start + tau);
  double w = tau;
  res.delta2 = cur;
  res.tau_used = w;
  while (t_start + 2.0 * w <= t_end + 1e-9) {
    const double next = contrast_on(times, channel, t_start, t_start + 2.0 * w);
    w *= 2.0;
    res.delta2 = next;
    res.tau_used = w;
    if (std::abs(next - cur) < std::max(1e-3 * std::abs(next), 1e-10)) {
      res.converged = true;
      return res;
    }
    cur = next;
  }
  return res;  // converged stays false if the doubling never settled
}

ContrastResult oscillation_contrast(const TimeSeries& ts, const std::string& channel,
                                    double t_start, double tau) {
  return oscillation_contrast(ts.times, ts.channel(channel), t_start, tau);
}

ScalingFit fit_scaling(const std::vector<std::pair<double, double>>& points) {
  ScalingFit fit;
  std::vector<std::pair<double, double>> use;
  for (const auto& [n, f2] : points) {
    if (f2 <= 0.0) {
      fit.warnings.push_back("excluded non-positive F2 at N=" + std::to_string(n));
      continue;
    }
    use.emplace_back(n, f2);
  }
  if (use.size() < 4)
    throw std::invalid_argument("fit_scaling: need >= 4 usable points");
  for (std::size_t i = 0; i < use.size(); ++i)
    for (std::size_t j = i + 1; j < use.size(); ++j)
      if (use[i].first == use[j].first)
        throw std::invalid_argument("fit_scaling: duplicate N");
  fit.points_used = static_cast<int>(use.size());

  auto least_squares = [](const std::vector<double>& x, const std::vector<double>& y,
                          double& slope, double& icept, double& rms) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sx += x[i];
      sy += y[i];
      sxx += x[i] * x[i];
      sxy += x[i] * y[i];
    }
    slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    icept = (sy - slope * sx) / n;
    double ss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - (slope * x[i] + icept);
      ss += r * r;
    }
    rms = std::sqrt(ss / n);
  };

  std::vector<double> lx, ly, x, yv;
  for (const auto& [n, f2] : use) {
    lx.push_back(std::log(n));
    ly.push_back(std::log(f2));
    x.push_back(n);
    yv.push_back(f2);
  }
  double icept = 0.0;
  least_squares(lx, ly, fit.exponent, icept, fit.power_residual);
  least_squares(x, yv, fit.linear_slope, fit.linear_intercept, fit.linear_residual);
  return fit;
}

Eigen::Matrix<cplx, 9, 9> two_body_rdm(const Block9& pair_moment) {
  Eigen::Matrix<cplx, 9, 9> rho;
  for (int r1 = 0; r1 < 3; ++r1)
    for (int r2 = 0; r2 < 3; ++r2)
      for (int c1 = 0; c1 < 3; ++c1)
        for (int c2 = 0; c2 < 3; ++c2)
          rho(3 * r1 + r2, 3 * c1 + c2) =
              pair_moment(op_index(c1, r1), op_index(c2, r2));
  return rho;
}

Eigen::Matrix<cplx, 9, 9> partial_transpose_first(
    const Eigen::Matrix<cplx, 9, 9>& rho) {
  Eigen::Matrix<cplx, 9, 9> pt;
  for (int r1 = 0; r1 < 3; ++r1)
    for (int r2 = 0; r2 < 3; ++r2)
      for (int c1 = 0; c1 < 3; ++c1)
        for (int c2 = 0; c2 < 3; ++c2)
          pt(3 * r1 + r2, 3 * c1 + c2) = rho(3 * c1 + r2, 3 * r1 + c2);
  return pt;
}

NegativityResult log_negativity(const Eigen::Matrix<cplx, 9, 9>& rho, double herm_tol) {
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > herm_tol)
    throw std::invalid_argument("log_negativity: input not hermitian");
  NegativityResult res;
  {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<cplx, 9, 9>> es(
        0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
    res.min_eigenvalue = es.eigenvalues().minCoeff();
  }
  const Eigen::Matrix<cplx, 9, 9> pt = partial_transpose_first(rho);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<cplx, 9, 9>> es(
      0.5 * (pt + pt.adjoint()), Eigen::EigenvaluesOnly);
  const double trace_norm = es.eigenvalues().cwiseAbs().sum();
  res.log_negativity = std::log2(trace_norm);
  return res;
}

Spectrum fourier_spectrum(const std::vector<double>& times,
                          const std::vector<double>& channel, double t_start,
                          double t_end) {
  if (times.size() != channel.size() || times.size() < 4)
    throw std::invalid_argument("fourier_spectrum: bad series");
  if (!(t_end > t_start))
    throw std::invalid_argument("fourier_spectrum: empty window");
  if (t_start < times.front() - 1e-9 || t_end > times.back() + 1e-9)
    throw std::invalid_argument("fourier_spectrum: window exceeds series");

  // uniform resampling by linear interpolation
  std::size_t count = 0;
  for (std::size_t i = 0; i < times.size(); ++i)
    if (times[i] >= t_start - 1e-12 && times[i] <= t_end + 1e-12) ++count;
  const std::size_t n = std::max<std::size_t>(64, count);
  const double dt = (t_end - t_start) / static_cast<double>(n - 1);
  std::vector<double> f(n);
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = t_start + i * dt;
    while (j + 2 < times.size() && times[j + 1] < t) ++j;
    const double w = (t - times[j]) / (times[j + 1] - times[j]);
    f[i] = channel[j] + (channel[j + 1] - channel[j]) * std::clamp(w, 0.0, 1.0);
  }
  double mean = 0.0;
  for (double v : f) mean += v;
  mean /= static_cast<double>(n);
  // Hann taper after mean subtraction
  for (std::size_t i = 0; i < n; ++i) {
    const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (n - 1));
    f[i] = (f[i] - mean) * w;
  }

  Spectrum sp;
  const std::size_t nfreq = n / 2;
  sp.frequency.resize(nfreq);
  sp.amplitude.resize(nfreq);
  const double dom = 2.0 * std::numbers::pi / (dt * static_cast<double>(n));
  for (std::size_t k = 0; k < nfreq; ++k) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double ph = 2.0 * std::numbers::pi * static_cast<double>(k * i) /
                        static_cast<double>(n);
      re += f[i] * std::cos(ph);
      im -= f[i] * std::sin(ph);
    }
    sp.frequency[k] = dom * static_cast<double>(k);
    sp.amplitude[k] = std::hypot(re, im) / static_cast<double>(n);
  }
  for (std::size_t k = 1; k < nfreq; ++k) {
    if (sp.amplitude[k] > sp.dominant_amplitude) {
      sp.dominant_amplitude = sp.amplitude[k];
      sp.dominant_frequency = sp.frequency[k];
    }
  }
  if (sp.dominant_frequency > 0.0) {
    const double period = 2.0 * std::numbers::pi / sp.dominant_frequency;
    sp.window_too_short = (t_end - t_start) < 4.0 * period;
  }
  return sp;
}

std::vector<double> decays_per_atom(const std::vector<double>& times,
                                    const std::vector<double>& n_mid, double gamma) {
  if (times.size() != n_mid.size() || times.empty())
    throw std::invalid_argument("decays_per_atom: bad series");
  if (std::abs(times.front()) > 1e-9)
    throw std::invalid_argument("decays_per_atom: series must start at t=0");
  for (double v : n_mid)
    if (v < -1e-9)
      throw std::invalid_argument("decays_per_atom: negative mid population");
  std::vector<double> nd(times.size(), 0.0);
  for (std::size_t i = 1; i < times.size(); ++i)
    nd[i] = nd[i - 1] + 0.5 * gamma * (n_mid[i] + n_mid[i - 1]) * (times[i] - times[i - 1]);
  return nd;
}

double exact_f2(const Eigen::MatrixXcd& rho, int n_factors) {
  long dim = 1;
  for (int i = 0; i < n_factors; ++i) dim *= 3;
  if (rho.rows() != dim) throw std::invalid_argument("exact_f2: dimension mismatch");
  std::vector<long> stride(n_factors);
  for (int s = 0; s < n_factors; ++s) {
    long st = 1;
    for (int k = s + 1; k < n_factors; ++k) st *= 3;
    stride[s] = st;
  }
  double n1 = 0.0, n2 = 0.0;
  for (long i = 0; i < dim; ++i) {
    int ups = 0;
    for (int s = 0; s < n_factors; ++s)
      if ((i / stride[s]) % 3 == kUp) ++ups;
    const double p = rho(i, i).real();
    n1 += ups * p;
    n2 += static_cast<double>(ups) * ups * p;
  }
  return (n2 - n1 * n1) / n_factors;
}

}  // namespace spin1
