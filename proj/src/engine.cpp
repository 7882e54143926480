#include "spin1/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace spin1 {

void IntegratorConfig::validate() const {
  if (rel_tol <= 0.0 || abs_tol <= 0.0)
    throw std::invalid_argument("IntegratorConfig: tolerances must be > 0");
  if (stride <= 0.0) throw std::invalid_argument("IntegratorConfig: stride must be > 0");
  if (max_step < 0.0 || initial_step < 0.0)
    throw std::invalid_argument("IntegratorConfig: steps must be >= 0");
}

namespace {

// Dormand-Prince 5(4) coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// b - b_hat (embedded 4th order error weights)
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// dense-output weights
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

}  // namespace

namespace {

// k-th requested sample time, +inf when exhausted
using SampleClock = std::function<double(long)>;

void integrate_core(const RhsFn& rhs, Eigen::VectorXd& y, double t0, double t1,
                    const IntegratorConfig& cfg, const SampleClock& sample_time,
                    const SampleFn& sample, const PostStepFn& post_step,
                    IntegrateStats* stats) {
  cfg.validate();
  if (!(t1 >= t0)) throw std::invalid_argument("integrate: t1 must be >= t0");
  const Eigen::Index n = y.size();
  IntegrateStats local;
  IntegrateStats& st = stats ? *stats : local;

  Eigen::VectorXd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n),
      err(n), sk(n);
  Eigen::VectorXd rc1(n), rc2(n), rc3(n), rc4(n), rc5(n);

  auto eval = [&](double t, const Eigen::VectorXd& x, Eigen::VectorXd& dx) {
    rhs(t, x, dx);
    ++st.n_rhs;
    if (!all_finite(dx))
      throw IntegratorError("integrate: non-finite derivative at t=" + std::to_string(t),
                            t, x);
  };

  double t = t0;
  long sample_idx = 0;
  double next_sample = std::numeric_limits<double>::infinity();
  if (sample) {
    next_sample = sample_time(sample_idx);
    while (next_sample <= t0 + 1e-12 * std::max(1.0, std::abs(t0))) {
      sample(std::min(next_sample, t0), y);
      next_sample = sample_time(++sample_idx);
    }
  }
  if (t1 == t0) return;

  eval(t, y, k1);

  // initial step size
  double h = cfg.initial_step;
  if (h == 0.0) {
    double d0 = 0.0, dd1 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double s = cfg.abs_tol + cfg.rel_tol * std::abs(y(i));
      d0 += (y(i) / s) * (y(i) / s);
      dd1 += (k1(i) / s) * (k1(i) / s);
    }
    d0 = std::sqrt(d0 / n);
    dd1 = std::sqrt(dd1 / n);
    h = (d0 < 1e-5 || dd1 < 1e-5) ? 1e-6 : 0.01 * d0 / dd1;
    h = std::min(h, (t1 - t0));
  }
  if (cfg.max_step > 0.0) h = std::min(h, cfg.max_step);

  bool last_rejected = false;
  while (t < t1) {
    if (h < 1e-14 * std::max(1.0, std::abs(t)))
      throw IntegratorError("integrate: step size underflow at t=" + std::to_string(t), t,
                            y);
    if (t + h > t1) h = t1 - t;

    ytmp = y + h * (a21 * k1);
    eval(t + c2 * h, ytmp, k2);
    ytmp = y + h * (a31 * k1 + a32 * k2);
    eval(t + c3 * h, ytmp, k3);
    ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    eval(t + c4 * h, ytmp, k4);
    ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    eval(t + c5 * h, ytmp, k5);
    ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    eval(t + h, ytmp, k6);
    ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    eval(t + h, ynew, k7);  // FSAL

    err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double err_norm = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double s =
          cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y(i)), std::abs(ynew(i)));
      err_norm += (err(i) / s) * (err(i) / s);
    }
    err_norm = std::sqrt(err_norm / n);

    if (err_norm <= 1.0) {
      // dense output for samples inside (t, t+h]
      if (sample && next_sample <= t + h + 1e-12 * std::max(1.0, std::abs(t))) {
        rc1 = y;
        rc2 = ynew - y;
        rc3 = h * k1 - rc2;
        rc4 = rc2 - h * k7 - rc3;
        rc5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
        while (next_sample <= t + h + 1e-12 * std::max(1.0, std::abs(t))) {
          const double theta = std::clamp((next_sample - t) / h, 0.0, 1.0);
          const double th1 = 1.0 - theta;
          ytmp = rc1 + theta * (rc2 + th1 * (rc3 + theta * (rc4 + th1 * rc5)));
          sample(std::min(next_sample, t + h), ytmp);
          next_sample = sample_time(++sample_idx);
          if (next_sample > t1 + 1e-12 * std::max(1.0, std::abs(t1))) {
            next_sample = std::numeric_limits<double>::infinity();
            break;
          }
        }
      }
      t += h;
      y.swap(ynew);
      if (post_step) post_step(t, y);
      if (post_step) {
        eval(t, y, k1);  // state may have changed; refresh FSAL derivative
      } else {
        k1.swap(k7);
      }
      ++st.n_steps;
      const double fac =
          std::min(last_rejected ? 1.0 : 10.0,
                   std::max(0.2, 0.9 * std::pow(err_norm > 0 ? 1.0 / err_norm : 1e10, 0.2)));
      h *= fac;
      if (cfg.max_step > 0.0) h = std::min(h, cfg.max_step);
      last_rejected = false;
    } else {
      ++st.n_rejected;
      h *= std::max(0.2, 0.9 * std::pow(1.0 / err_norm, 0.2));
      last_rejected = true;
    }
  }
}

}  // namespace

void integrate(const RhsFn& rhs, Eigen::VectorXd& y, double t0, double t1,
               const IntegratorConfig& cfg, const SampleFn& sample,
               const PostStepFn& post_step, IntegrateStats* stats) {
  auto clock = [t0, &cfg](long k) { return t0 + k * cfg.stride; };
  integrate_core(rhs, y, t0, t1, cfg, clock, sample, post_step, stats);
}

void integrate_at(const RhsFn& rhs, Eigen::VectorXd& y, double t0, double t1,
                  const IntegratorConfig& cfg, const std::vector<double>& sample_times,
                  const SampleFn& sample, const PostStepFn& post_step,
                  IntegrateStats* stats) {
  for (std::size_t i = 1; i < sample_times.size(); ++i)
    if (!(sample_times[i] > sample_times[i - 1]))
      throw std::invalid_argument("integrate_at: sample times must be ascending");
  auto clock = [&sample_times](long k) {
    return k < static_cast<long>(sample_times.size())
               ? sample_times[k]
               : std::numeric_limits<double>::infinity();
  };
  integrate_core(rhs, y, t0, t1, cfg, clock, sample, post_step, stats);
}

// ---------------------------------------------------------------------------

double ScanGrid::Cell::value(const std::string& key, double fallback) const {
  for (const auto& [k, v] : values)
    if (k == key) return v;
  return fallback;
}

bool ScanGrid::Cell::has(const std::string& key) const {
  for (const auto& [k, v] : values)
    if (k == key) return true;
  return false;
}

void ScanGrid::write_csv(const std::string& path) const {
  std::vector<std::string> keys;
  for (const auto& c : cells)
    for (const auto& [k, v] : c.values) {
      bool seen = false;
      for (const auto& e : keys) seen = seen || (e == k);
      if (!seen) keys.push_back(k);
    }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp);
    if (!f) throw std::runtime_error("cannot open for writing: " + tmp);
    f << std::setprecision(17);
    f << axis1_name << "," << axis2_name << ",status";
    for (const auto& k : keys) f << "," << k;
    f << "\n";
    for (std::size_t i1 = 0; i1 < axis1.size(); ++i1) {
      for (std::size_t i2 = 0; i2 < axis2.size(); ++i2) {
        const Cell& c = cell(i1, i2);
        f << axis1[i1] << "," << axis2[i2] << "," << c.status;
        for (const auto& k : keys) {
          f << ",";
          if (c.has(k)) f << c.value(k, 0.0);
        }
        f << "\n";
      }
    }
    if (!f) throw std::runtime_error("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("rename failed: " + path);
}

std::string ScanGrid::summary_json() const {
  nlohmann::json j;
  j["axis1"] = {{"name", axis1_name}, {"values", axis1}};
  j["axis2"] = {{"name", axis2_name}, {"values", axis2}};
  std::size_t ok = 0, failed = 0;
  for (const auto& c : cells) {
    if (c.status == "ok") ++ok;
    if (c.status == "failed") ++failed;
  }
  j["cells"] = cells.size();
  j["ok"] = ok;
  j["failed"] = failed;
  return j.dump(2);
}

ScanGrid sweep(const std::string& axis1_name, std::vector<double> axis1,
               const std::string& axis2_name, std::vector<double> axis2,
               const CellTask& task, int workers, const std::string& journal_path) {
  if (axis1.empty() || axis2.empty()) throw std::invalid_argument("sweep: empty axis");
  ScanGrid grid;
  grid.axis1_name = axis1_name;
  grid.axis2_name = axis2_name;
  grid.axis1 = std::move(axis1);
  grid.axis2 = std::move(axis2);
  grid.cells.resize(grid.axis1.size() * grid.axis2.size());

  std::set<std::size_t> done;
  if (!journal_path.empty()) {
    std::ifstream jf(journal_path);
    std::string line;
    while (jf && std::getline(jf, line)) {
      if (line.empty()) continue;
      nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.contains("cell")) continue;  // partial last line
      const std::size_t idx = j["cell"].get<std::size_t>();
      if (idx >= grid.cells.size()) continue;
      ScanGrid::Cell c;
      c.status = j.value("status", "failed");
      c.message = j.value("message", "");
      if (j.contains("values"))
        for (const auto& [k, v] : j["values"].items())
          c.values.emplace_back(k, v.get<double>());
      grid.cells[idx] = std::move(c);
      done.insert(idx);
    }
  }

  std::mutex journal_mutex;
  std::ofstream journal;
  if (!journal_path.empty()) {
    journal.open(journal_path, std::ios::app);
    if (!journal) throw std::runtime_error("cannot open journal: " + journal_path);
  }

  auto record = [&](std::size_t idx, const ScanGrid::Cell& c) {
    if (journal_path.empty()) return;
    nlohmann::json j;
    j["cell"] = idx;
    j["status"] = c.status;
    if (!c.message.empty()) j["message"] = c.message;
    nlohmann::json vals = nlohmann::json::object();
    for (const auto& [k, v] : c.values) vals[k] = v;
    j["values"] = vals;
    std::lock_guard<std::mutex> lock(journal_mutex);
    journal << j.dump() << "\n";
    journal.flush();
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= grid.cells.size()) return;
      if (done.count(idx)) continue;
      const std::size_t i1 = idx / grid.axis2.size();
      const std::size_t i2 = idx % grid.axis2.size();
      ScanGrid::Cell c;
      try {
        c.values = task(i1, i2, grid.axis1[i1], grid.axis2[i2]);
        c.status = "ok";
      } catch (const std::exception& e) {
        c.status = "failed";
        c.message = e.what();
      }
      record(idx, c);
      grid.cells[idx] = std::move(c);
    }
  };

  const int nw = std::max(1, workers);
  if (nw == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < nw; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return grid;
}

}  // namespace spin1
