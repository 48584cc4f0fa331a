#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "leapsgd/network.hpp"
#include "leapsgd/polynomial.hpp"
#include "leapsgd/rng.hpp"

namespace leapsgd {

struct Phase1Config {
  double eta1 = 0.0;
  long T1 = 0;
  double r = 0.2;
  double Delta = 0.4;
  // Optional adaptive mode: per-phase (steps, eta); step counts must sum to T1.
  std::vector<std::pair<long, double>> schedule;

  void validate() const;  // throws std::invalid_argument
};

struct Phase2Config {
  double eta2 = 0.0;
  long T2 = 0;
  double lambda_a = 0.0;

  void validate() const;
};

// Per-neuron small-coordinate sets S_{j,t}. A coordinate leaves S the first
// time its pre-projection magnitude reaches r, and never re-enters.
struct ProjectionState {
  std::vector<std::vector<uint8_t>> in_S;  // [M][d], 1 while i in S_{j,t}

  static ProjectionState full(int M, int d);
};

struct SupportStat {
  double min_abs = 0.0, max_abs = 0.0, mean_abs = 0.0;
};

struct TracePoint {
  long step = 0;
  double risk = 0.0, se = 0.0;
  std::vector<SupportStat> groups;  // parallel to TrainingTrace::group_names
};

struct ProjectionEvent {
  long step = 0;
  int neuron = 0, coord = 0;
};

struct TrainingTrace {
  std::vector<TracePoint> points;
  std::vector<std::string> group_names;
  std::vector<std::vector<int>> groups;  // 0-based coordinate groups
  std::vector<ProjectionEvent> projection_events;
  long phase_boundary = 0;  // step where phase 2 began (0 if n/a)
  nlohmann::json config_echo;
  uint64_t seed = 0;
  std::optional<nlohmann::json> checkpoint;  // serialized net at the end
};

// Risk-evaluation setup shared by the training loops: a fixed held-out MC
// sample set per run and a log-spaced evaluation schedule.
struct EvalConfig {
  long heldout_N = 50000;
  int points_per_decade = 200;
  double noise_std = 0.0;  // label noise for *training* samples
  bool checkpoint_final_net = false;
};

// Log-spaced step schedule over [1, T], capped per decade, always containing
// 0 and T.
std::vector<long> log_schedule(long T, int points_per_decade);

// g - S(w) <S(w), g> where S(w) zeroes coordinates outside S.
// Requires || w restricted to S ||_2 = 1 within 1e-9.
std::vector<double> spherical_grad(const std::vector<double>& w,
                                   const std::vector<uint8_t>& S,
                                   const std::vector<double>& g);

// Shrinks S by coordinates with |w_i| >= r, clamps coordinates outside the
// new S to [-Delta, Delta], renormalizes inside the new S to unit norm.
// Throws std::runtime_error on degenerate collapse (zero norm on the new S).
// Appends (step, neuron, coord) for every coordinate that left S.
void project_step(std::vector<double>& w, std::vector<uint8_t>& S, double r, double Delta,
                  long step, int neuron, std::vector<ProjectionEvent>* events);

// One phase-1 update (all neurons) on a single sample; a, b unchanged.
void phase1_step(TwoLayerNet& net, const Activation& act, const std::vector<double>& x,
                 double y, double eta1, double r, double Delta, ProjectionState& state,
                 long step, std::vector<ProjectionEvent>* events);

// One phase-2 update: a <- (1 - lambda_a) a - eta2 * dl/da; W, b frozen.
void phase2_step(TwoLayerNet& net, const Activation& act, const std::vector<double>& x,
                 double y, const Phase2Config& cfg);

// Layerwise training: T1 projected phase-1 steps then T2 ridge-SGD phase-2
// steps, one fresh sample per step. `groups` names coordinate groups whose
// |w| statistics are logged; pass {} to default to per-leap support groups
// plus the off-support remainder.
TrainingTrace run_algorithm1(const EmbeddedTarget& target, const Activation& act,
                             TwoLayerNet net, const Phase1Config& cfg1,
                             const Phase2Config& cfg2, const EvalConfig& eval,
                             std::vector<std::vector<int>> groups, Rng rng);

// Joint constant-step SGD on (a, W); no projections, biases frozen,
// mini-batch gradient averaging.
TrainingTrace run_vanilla_sgd(const EmbeddedTarget& target, const Activation& act,
                              TwoLayerNet net, double eta, long T, int batch,
                              const EvalConfig& eval, std::vector<std::vector<int>> groups,
                              Rng rng);

// Hyperparameter helper: T1 = c0 d^(D-1) log(d)^c0, eta1 = 1/(c1 kappa
// d^(D/2) log(d)^c1), kappa = 1/(c2 d^c2). D is the target's biggest leap.
struct ScalingParams {
  double eta1 = 0.0;
  long T1 = 0;
  double kappa = 0.0;
};
ScalingParams scaling_params(int d, int D, double c0 = 1.0, double c1 = 1.0, double c2 = 1.0);

// Default tracked coordinate groups for an embedded target: one group per
// leap level (new support coordinates in witness order) plus "off_support".
std::pair<std::vector<std::string>, std::vector<std::vector<int>>> default_groups(
    const EmbeddedTarget& target);

}  // namespace leapsgd
