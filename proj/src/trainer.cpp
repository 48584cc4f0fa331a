#include "leapsgd/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "leapsgd/leap.hpp"

namespace leapsgd {

void Phase1Config::validate() const {
  if (T1 < 0 || eta1 < 0) throw std::invalid_argument("phase 1: eta1, T1 must be >= 0");
  if (!(r > 0) || !(Delta >= r)) throw std::invalid_argument("phase 1: need 0 < r <= Delta");
  if (!schedule.empty()) {
    long total = 0;
    for (const auto& [steps, eta] : schedule) {
      if (steps < 0 || eta < 0) throw std::invalid_argument("phase 1: bad schedule entry");
      total += steps;
    }
    if (total != T1) throw std::invalid_argument("phase 1: schedule steps must sum to T1");
  }
}

void Phase2Config::validate() const {
  if (T2 < 0 || eta2 < 0 || lambda_a < 0)
    throw std::invalid_argument("phase 2: eta2, T2, lambda_a must be >= 0");
}

ProjectionState ProjectionState::full(int M, int d) {
  ProjectionState s;
  s.in_S.assign(M, std::vector<uint8_t>(d, 1));
  return s;
}

std::vector<long> log_schedule(long T, int points_per_decade) {
  std::vector<long> steps{0};
  if (T <= 0) return steps;
  if (points_per_decade < 1) throw std::invalid_argument("points_per_decade must be >= 1");
  double decades = std::log10(static_cast<double>(T));
  long n = std::max<long>(1, std::lround(std::ceil(decades * points_per_decade)));
  std::set<long> uniq;
  for (long i = 0; i <= n; ++i) {
    long s = std::llround(std::pow(10.0, decades * static_cast<double>(i) / n));
    uniq.insert(std::clamp<long>(s, 1, T));
  }
  uniq.insert(T);
  steps.insert(steps.end(), uniq.begin(), uniq.end());
  return steps;
}

std::vector<double> spherical_grad(const std::vector<double>& w,
                                   const std::vector<uint8_t>& S,
                                   const std::vector<double>& g) {
  if (w.size() != S.size() || w.size() != g.size())
    throw std::invalid_argument("spherical_grad: shape mismatch");
  double norm_sq = 0.0, inner = 0.0;
  for (size_t i = 0; i < w.size(); ++i) {
    if (!S[i]) continue;
    norm_sq += w[i] * w[i];
    inner += w[i] * g[i];
  }
  if (std::fabs(std::sqrt(norm_sq) - 1.0) > 1e-9)
    throw std::invalid_argument("spherical_grad: ||w|_S|| must be 1");
  std::vector<double> out = g;
  for (size_t i = 0; i < w.size(); ++i) {
    if (S[i]) out[i] -= w[i] * inner;
  }
  return out;
}

void project_step(std::vector<double>& w, std::vector<uint8_t>& S, double r, double Delta,
                  long step, int neuron, std::vector<ProjectionEvent>* events) {
  const size_t d = w.size();
  for (size_t i = 0; i < d; ++i) {
    if (S[i] && std::fabs(w[i]) >= r) {
      S[i] = 0;
      if (events) events->push_back({step, neuron, static_cast<int>(i)});
    }
  }
  double norm_sq = 0.0;
  for (size_t i = 0; i < d; ++i) {
    if (S[i]) {
      norm_sq += w[i] * w[i];
    } else {
      w[i] = std::clamp(w[i], -Delta, Delta);
    }
  }
  double norm = std::sqrt(norm_sq);
  if (norm == 0.0)
    throw std::runtime_error("degenerate sphere projection (zero norm on S) at step " +
                             std::to_string(step) + ", neuron " + std::to_string(neuron));
  for (size_t i = 0; i < d; ++i) {
    if (S[i]) w[i] /= norm;
  }
}

void phase1_step(TwoLayerNet& net, const Activation& act, const std::vector<double>& x,
                 double y, double eta1, double r, double Delta, ProjectionState& state,
                 long step, std::vector<ProjectionEvent>* events) {
  const int M = net.M, d = net.d;
  // Shared residual from the full network output (interactions included).
  std::vector<double> pre(M);
  double yhat = 0.0;
  for (int j = 0; j < M; ++j) {
    const double* w = net.w_row(j);
    double acc = net.b[j];
    for (int i = 0; i < d; ++i) acc += w[i] * x[i];
    pre[j] = acc;
    yhat += net.a[j] * act.eval(acc);
  }
  double resid = y - yhat;
  if (!std::isfinite(resid)) throw std::runtime_error("non-finite residual in phase 1");
  std::vector<double> wt(d);
  for (int j = 0; j < M; ++j) {
    double* w = net.w_row(j);
    const std::vector<uint8_t>& S = state.in_S[j];
    // grad_w loss = -resid * a_j * sigma'(pre) * x; spherical projection on S.
    double scale = -resid * net.a[j] * act.derivative(1, pre[j]);
    double inner = 0.0;
    for (int i = 0; i < d; ++i) {
      if (S[i]) inner += w[i] * scale * x[i];
    }
    for (int i = 0; i < d; ++i) {
      double g = scale * x[i] - (S[i] ? w[i] * inner : 0.0);
      wt[i] = w[i] - eta1 * g;
    }
    project_step(wt, state.in_S[j], r, Delta, step, j, events);
    for (int i = 0; i < d; ++i) w[i] = wt[i];
  }
}

void phase2_step(TwoLayerNet& net, const Activation& act, const std::vector<double>& x,
                 double y, const Phase2Config& cfg) {
  const int M = net.M, d = net.d;
  std::vector<double> s(M);
  double yhat = 0.0;
  for (int j = 0; j < M; ++j) {
    const double* w = net.w_row(j);
    double acc = net.b[j];
    for (int i = 0; i < d; ++i) acc += w[i] * x[i];
    s[j] = act.eval(acc);
    yhat += net.a[j] * s[j];
  }
  double resid = y - yhat;
  if (!std::isfinite(resid)) throw std::runtime_error("non-finite residual in phase 2");
  for (int j = 0; j < M; ++j) {
    net.a[j] = (1.0 - cfg.lambda_a) * net.a[j] + cfg.eta2 * resid * s[j];
  }
}

namespace {

struct HeldOut {
  std::vector<double> x;  // N x d, row-major
  std::vector<double> y;  // N
  int d = 0;
};

HeldOut draw_heldout(const EmbeddedTarget& target, long N, Rng rng) {
  HeldOut h;
  h.d = target.ambient_dim;
  h.x.reserve(static_cast<size_t>(N) * h.d);
  h.y.reserve(N);
  for (long s = 0; s < N; ++s) {
    auto [x, y] = sample_pair(target, 0.0, rng);
    h.x.insert(h.x.end(), x.begin(), x.end());
    h.y.push_back(y);
  }
  return h;
}

RiskEstimate heldout_risk(const TwoLayerNet& net, const Activation& act, const HeldOut& h) {
  const long N = static_cast<long>(h.y.size());
  double sum = 0.0, sum_sq = 0.0;
  for (long s = 0; s < N; ++s) {
    const double* x = h.x.data() + static_cast<size_t>(s) * h.d;
    double yhat = 0.0;
    for (int j = 0; j < net.M; ++j) {
      const double* w = net.w_row(j);
      double acc = net.b[j];
      for (int i = 0; i < net.d; ++i) acc += w[i] * x[i];
      yhat += net.a[j] * act.eval(acc);
    }
    double r = h.y[s] - yhat;
    double v = 0.5 * r * r;
    sum += v;
    sum_sq += v * v;
  }
  RiskEstimate est;
  est.estimate = sum / static_cast<double>(N);
  double var = (sum_sq / N - est.estimate * est.estimate) * N / (N - 1.0);
  est.std_error = std::sqrt(std::max(var, 0.0) / static_cast<double>(N));
  return est;
}

std::vector<SupportStat> group_stats(const TwoLayerNet& net,
                                     const std::vector<std::vector<int>>& groups) {
  std::vector<SupportStat> stats;
  stats.reserve(groups.size());
  for (const auto& coords : groups) {
    SupportStat st;
    st.min_abs = std::numeric_limits<double>::infinity();
    double sum = 0.0;
    long count = 0;
    for (int j = 0; j < net.M; ++j) {
      const double* w = net.w_row(j);
      for (int i : coords) {
        double v = std::fabs(w[i]);
        st.min_abs = std::min(st.min_abs, v);
        st.max_abs = std::max(st.max_abs, v);
        sum += v;
        ++count;
      }
    }
    st.mean_abs = count ? sum / count : 0.0;
    if (count == 0) st.min_abs = 0.0;
    stats.push_back(st);
  }
  return stats;
}

void check_finite(const TwoLayerNet& net) {
  for (double v : net.a)
    if (!std::isfinite(v)) throw std::runtime_error("non-finite second-layer weight");
  for (double v : net.W)
    if (!std::isfinite(v)) throw std::runtime_error("non-finite first-layer weight");
}

void log_point(TrainingTrace& trace, long step, const TwoLayerNet& net, const Activation& act,
               const HeldOut& h) {
  check_finite(net);
  RiskEstimate est = heldout_risk(net, act, h);
  trace.points.push_back({step, est.estimate, est.std_error, group_stats(net, trace.groups)});
}

}  // namespace

std::pair<std::vector<std::string>, std::vector<std::vector<int>>> default_groups(
    const EmbeddedTarget& target) {
  LeapResult lr = leap(target.poly);
  std::vector<std::string> names;
  std::vector<std::vector<int>> groups;
  std::vector<char> covered(target.poly.latent_dim, 0);
  for (size_t lvl = 0; lvl < lr.ordering.size(); ++lvl) {
    const Monomial& mono = target.poly.terms[lr.ordering[lvl]].first;
    std::vector<int> coords;
    for (int i = 0; i < target.poly.latent_dim; ++i) {
      if (mono.exponents[i] > 0 && !covered[i]) {
        coords.push_back(target.support[i]);
        covered[i] = 1;
      }
    }
    if (coords.empty()) continue;  // monomial introduced no new coordinates
    names.push_back("level" + std::to_string(names.size() + 1));
    groups.push_back(std::move(coords));
  }
  std::set<int> on(target.support.begin(), target.support.end());
  std::vector<int> off;
  for (int i = 0; i < target.ambient_dim; ++i) {
    if (!on.count(i)) off.push_back(i);
  }
  names.push_back("off_support");
  groups.push_back(std::move(off));
  return {names, groups};
}

TrainingTrace run_algorithm1(const EmbeddedTarget& target, const Activation& act,
                             TwoLayerNet net, const Phase1Config& cfg1,
                             const Phase2Config& cfg2, const EvalConfig& eval,
                             std::vector<std::vector<int>> groups, Rng rng) {
  target.validate();
  cfg1.validate();
  cfg2.validate();
  TrainingTrace trace;
  if (groups.empty()) {
    auto [names, g] = default_groups(target);
    trace.group_names = std::move(names);
    trace.groups = std::move(g);
  } else {
    trace.groups = std::move(groups);
    for (size_t i = 0; i < trace.groups.size(); ++i)
      trace.group_names.push_back("group" + std::to_string(i + 1));
  }
  const long T = cfg1.T1 + cfg2.T2;
  std::set<long> sched;
  for (long s : log_schedule(T, eval.points_per_decade)) sched.insert(s);
  HeldOut heldout = draw_heldout(target, eval.heldout_N, rng.split(1));
  Rng train = rng.split(2);

  log_point(trace, 0, net, act, heldout);
  ProjectionState state = ProjectionState::full(net.M, net.d);
  // Per-phase step sizes (single phase if no schedule given).
  std::vector<std::pair<long, double>> schedule = cfg1.schedule;
  if (schedule.empty()) schedule.push_back({cfg1.T1, cfg1.eta1});
  long step = 0;
  for (const auto& [phase_steps, eta] : schedule) {
    for (long t = 0; t < phase_steps; ++t) {
      auto [x, y] = sample_pair(target, eval.noise_std, train);
      phase1_step(net, act, x, y, eta, cfg1.r, cfg1.Delta, state, step + 1,
                  &trace.projection_events);
      ++step;
      if (sched.count(step)) log_point(trace, step, net, act, heldout);
    }
  }
  trace.phase_boundary = step;
  for (long t = 0; t < cfg2.T2; ++t) {
    auto [x, y] = sample_pair(target, eval.noise_std, train);
    phase2_step(net, act, x, y, cfg2);
    ++step;
    if (sched.count(step)) log_point(trace, step, net, act, heldout);
  }
  if (eval.checkpoint_final_net) trace.checkpoint = net_to_json(net);
  return trace;
}

TrainingTrace run_vanilla_sgd(const EmbeddedTarget& target, const Activation& act,
                              TwoLayerNet net, double eta, long T, int batch,
                              const EvalConfig& eval, std::vector<std::vector<int>> groups,
                              Rng rng) {
  target.validate();
  if (batch < 1) throw std::invalid_argument("run_vanilla_sgd: batch must be >= 1");
  TrainingTrace trace;
  if (groups.empty()) {
    auto [names, g] = default_groups(target);
    trace.group_names = std::move(names);
    trace.groups = std::move(g);
  } else {
    trace.groups = std::move(groups);
    for (size_t i = 0; i < trace.groups.size(); ++i)
      trace.group_names.push_back("group" + std::to_string(i + 1));
  }
  std::set<long> sched;
  for (long s : log_schedule(T, eval.points_per_decade)) sched.insert(s);
  HeldOut heldout = draw_heldout(target, eval.heldout_N, rng.split(1));
  Rng train = rng.split(2);

  log_point(trace, 0, net, act, heldout);
  const int M = net.M, d = net.d;
  std::vector<double> s(M), ga(M), gw(static_cast<size_t>(M) * d);
  for (long step = 1; step <= T; ++step) {
    std::fill(ga.begin(), ga.end(), 0.0);
    std::fill(gw.begin(), gw.end(), 0.0);
    for (int bi = 0; bi < batch; ++bi) {
      auto [x, y] = sample_pair(target, eval.noise_std, train);
      double yhat = 0.0;
      for (int j = 0; j < M; ++j) {
        const double* w = net.w_row(j);
        double acc = net.b[j];
        for (int i = 0; i < d; ++i) acc += w[i] * x[i];
        s[j] = acc;  // pre-activation for now
        yhat += net.a[j] * act.eval(acc);
      }
      double resid = y - yhat;
      if (!std::isfinite(resid)) throw std::runtime_error("non-finite residual in vanilla SGD");
      for (int j = 0; j < M; ++j) {
        double pre = s[j];
        ga[j] += resid * act.eval(pre);
        double scale = resid * net.a[j] * act.derivative(1, pre);
        double* grow = gw.data() + static_cast<size_t>(j) * d;
        for (int i = 0; i < d; ++i) grow[i] += scale * x[i];
      }
    }
    const double lr = eta / static_cast<double>(batch);
    for (int j = 0; j < M; ++j) net.a[j] += lr * ga[j];
    for (size_t i = 0; i < net.W.size(); ++i) net.W[i] += lr * gw[i];
    if (sched.count(step)) log_point(trace, step, net, act, heldout);
  }
  if (eval.checkpoint_final_net) trace.checkpoint = net_to_json(net);
  return trace;
}

ScalingParams scaling_params(int d, int D, double c0, double c1, double c2) {
  if (d < 2 || D < 1) throw std::invalid_argument("scaling_params: need d >= 2, D >= 1");
  if (c0 <= 0 || c1 <= 0 || c2 <= 0) throw std::invalid_argument("scaling_params: c_i > 0");
  ScalingParams p;
  double logd = std::log(static_cast<double>(d));
  p.kappa = 1.0 / (c2 * std::pow(static_cast<double>(d), c2));
  p.T1 = std::llround(c0 * std::pow(static_cast<double>(d), D - 1) * std::pow(logd, c0));
  p.eta1 = 1.0 / (c1 * p.kappa * std::pow(static_cast<double>(d), D / 2.0) * std::pow(logd, c1));
  return p;
}

}  // namespace leapsgd
