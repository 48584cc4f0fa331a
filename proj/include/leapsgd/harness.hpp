#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "leapsgd/trainer.hpp"

namespace leapsgd {

struct EscapeLevel {
  double threshold = 0.0;
  int dwell = 3;  // consecutive logged points required at or below threshold
};

struct LevelEscape {
  std::optional<long> step;   // first sustained crossing; nullopt if never
  long plateau_span = 0;      // step minus the previous level's escape step
};

struct EscapeReport {
  std::vector<LevelEscape> levels;

  // Escape step of the deepest detected level, if every level was detected.
  std::optional<long> final_step() const;
};

// For each level, the first logged step whose risk is <= threshold and stays
// <= threshold for the next dwell-1 logged points (trace end truncates the
// window). Thresholds must be strictly decreasing.
EscapeReport detect_escapes(const TrainingTrace& trace,
                            const std::vector<EscapeLevel>& levels);

// Midpoint thresholds between the analytic residual-risk plateaus of the
// target's terms: after the first l terms are fit, the plateau risk is half
// the variance of the remaining terms, so threshold_l sits a quarter of
// term l's variance above it. Terms are ordered by their top coordinate.
std::vector<EscapeLevel> default_thresholds(const SparsePolynomial& target, int dwell = 3);

// Minimal arithmetic expression language over the ambient dimension for
// d-dependent hyperparameters: numbers, "d", + - * / ^, parentheses, and
// log, log2, sqrt, min, max, pow. Throws std::invalid_argument with the
// offending position.
double eval_dexpr(const std::string& expr, double d);

struct SweepSpec {
  std::string target;                 // target DSL string
  std::string activation = "sigmoid";
  std::string mode = "algorithm1";    // "algorithm1" | "vanilla" | "adaptive"
  std::vector<int> dims;              // strictly increasing
  int seeds = 1;
  uint64_t base_seed = 0;
  // Hyperparameter template; values are d-expressions. algorithm1 keys:
  // M, kappa, rho, eta1, T1, r, Delta, eta2, T2, lambda_a, c0, c1, c2.
  // vanilla keys: M, kappa, eta, T, batch. Unset keys fall back to the
  // built-in scalings.
  std::map<std::string, std::string> hyper;
  // Adaptive mode only: per-phase (steps, eta) pairs as d-expressions; the
  // step counts replace T1 and eta1.
  std::vector<std::pair<std::string, std::string>> schedule;
  std::vector<EscapeLevel> levels;    // empty -> default_thresholds(target)
  std::string out_dir;                // empty -> keep traces in memory only
  int threads = 1;
  long heldout_N = 50000;
  int points_per_decade = 25;

  void validate() const;  // throws std::invalid_argument
};

struct CellResult {
  int d = 0;
  int seed = 0;  // seed index within the sweep
  bool ok = false;
  std::string error;  // set when ok == false
  EscapeReport escapes;
  std::optional<long> escape_step;  // deepest-level escape
  std::string trace_path;           // empty if not written
};

struct ScalingFit {
  std::vector<int> dims;                 // dims with a defined median
  std::vector<double> median_escape;     // parallel to dims
  bool fitted = false;                   // needs >= 3 dims with medians
  double slope = 0.0;
  double slope_ci_lo = 0.0, slope_ci_hi = 0.0;  // bootstrap over seeds
};

struct SweepResult {
  ScalingFit fit;
  std::vector<CellResult> cells;  // sorted by (d, seed)
  nlohmann::json summary;         // {target, leap, dims, median_escape, slope, slope_ci, cells}
};

// Runs all (d, seed) cells on a worker pool; per-cell rng streams are keyed
// by (d, seed), so results do not depend on the thread count. A failing cell
// is recorded and the sweep continues.
SweepResult run_sweep(const SweepSpec& spec);

enum class TraceFormat { Json, Csv };

// JSON is a lossless round-trip; CSV carries step,risk,se plus per-group
// support-stat columns (RFC-4180 quoting).
void emit_trace(const TrainingTrace& trace, TraceFormat format, const std::string& path);
TrainingTrace load_trace(const std::string& path);

nlohmann::json trace_to_json(const TrainingTrace& trace);
TrainingTrace trace_from_json(const nlohmann::json& j);

// Least-squares slope of log(y) on log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// Single training cell shared by run_sweep and the CLI `train` subcommand.
TrainingTrace run_cell(const SweepSpec& spec, int d, Rng rng);

}  // namespace leapsgd
