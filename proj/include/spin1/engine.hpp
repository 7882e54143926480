#pragma once

// Shared adaptive ODE integration (Dormand-Prince 5(4) with dense output) and
// the checkpointed parallel sweep runner. Solver states are packed into flat
// real vectors by the individual solver modules.

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace spin1 {

struct IntegratorConfig {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double max_step = 0.0;      // 0 = unlimited
  double initial_step = 0.0;  // 0 = automatic
  double stride = 0.1;        // dense-output sampling interval

  void validate() const;
};

struct IntegrateStats {
  long n_steps = 0;
  long n_rejected = 0;
  long n_rhs = 0;
};

// Derivative evaluation dy = f(t, y). Must be pure and finite.
using RhsFn = std::function<void(double, const Eigen::VectorXd&, Eigen::VectorXd&)>;
// Called at every dense-output sample t0, t0+stride, ...
using SampleFn = std::function<void(double, const Eigen::VectorXd&)>;
// Applied to the state after each accepted step (e.g. re-hermitization).
using PostStepFn = std::function<void(double, Eigen::VectorXd&)>;

struct IntegratorError : std::runtime_error {
  IntegratorError(const std::string& what, double t_fail, Eigen::VectorXd snapshot)
      : std::runtime_error(what), t(t_fail), state(std::move(snapshot)) {}
  double t;
  Eigen::VectorXd state;
};

// Integrates y from t0 to t1 in place. Deterministic given identical inputs.
// Samples are emitted at t0, t0+stride, ... via 4th-order dense output.
void integrate(const RhsFn& rhs, Eigen::VectorXd& y, double t0, double t1,
               const IntegratorConfig& cfg, const SampleFn& sample = {},
               const PostStepFn& post_step = {}, IntegrateStats* stats = nullptr);

// Same, but sampling at an explicit ascending time grid within [t0, t1].
void integrate_at(const RhsFn& rhs, Eigen::VectorXd& y, double t0, double t1,
                  const IntegratorConfig& cfg, const std::vector<double>& sample_times,
                  const SampleFn& sample, const PostStepFn& post_step = {},
                  IntegrateStats* stats = nullptr);

// ---------------------------------------------------------------------------
// Parameter sweeps

struct ScanGrid {
  std::string axis1_name, axis2_name;
  std::vector<double> axis1, axis2;

  struct Cell {
    std::string status = "pending";  // ok | failed
    std::vector<std::pair<std::string, double>> values;
    std::vector<std::pair<std::string, std::string>> labels;
    std::string message;

    double value(const std::string& key, double fallback) const;
    bool has(const std::string& key) const;
    std::string label(const std::string& key, const std::string& fallback) const;
  };
  std::vector<Cell> cells;  // row-major: index = i1 * axis2.size() + i2

  std::size_t cell_index(std::size_t i1, std::size_t i2) const {
    return i1 * axis2.size() + i2;
  }
  const Cell& cell(std::size_t i1, std::size_t i2) const {
    return cells[cell_index(i1, i2)];
  }

  // One row per cell: axis values, status, then the union of value keys in
  // first-seen order. Written atomically (temp file + rename).
  void write_csv(const std::string& path) const;
  std::string summary_json() const;
};

// Per-cell task output: named scalars plus named string labels.
struct CellResult {
  std::vector<std::pair<std::string, double>> values;
  std::vector<std::pair<std::string, std::string>> labels;
};

// Per-cell task. Throwing marks the cell failed with the exception message.
using CellTask =
    std::function<CellResult(std::size_t i1, std::size_t i2, double v1, double v2)>;

// Runs the task over the grid with `workers` threads. Results are identical
// regardless of worker count. If journal_path is nonempty, completed cells are
// appended to it as JSON lines and an interrupted sweep resumes from it.
ScanGrid sweep(const std::string& axis1_name, std::vector<double> axis1,
               const std::string& axis2_name, std::vector<double> axis2,
               const CellTask& task, int workers = 1,
               const std::string& journal_path = {});

}  // namespace spin1
