#include "leapsgd/network.hpp"

#include <cmath>
#include <stdexcept>

#include "leapsgd/quadrature.hpp"

namespace leapsgd {

TwoLayerNet init_net(int M, int d, double kappa, double rho, Rng& rng) {
  if (M < 1 || d < 1) throw std::invalid_argument("init_net: M and d must be >= 1");
  if (kappa < 0 || rho < 0) throw std::invalid_argument("init_net: kappa, rho must be >= 0");
  TwoLayerNet net;
  net.M = M;
  net.d = d;
  net.a.resize(M);
  net.b.resize(M);
  net.W.resize(static_cast<size_t>(M) * d);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (int j = 0; j < M; ++j) net.a[j] = kappa * rng.rademacher();
  for (int j = 0; j < M; ++j) net.b[j] = rho > 0 ? rho * (2.0 * rng.uniform() - 1.0) : 0.0;
  for (double& wij : net.W) wij = scale * rng.rademacher();
  return net;
}

namespace {

double dot_row(const TwoLayerNet& net, int j, const std::vector<double>& x) {
  const double* w = net.w_row(j);
  double acc = 0.0;
  for (int i = 0; i < net.d; ++i) acc += w[i] * x[i];
  return acc;
}

}  // namespace

double forward(const TwoLayerNet& net, const Activation& act, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != net.d) throw std::invalid_argument("forward: shape mismatch");
  double out = 0.0;
  for (int j = 0; j < net.M; ++j) out += net.a[j] * act.eval(dot_row(net, j, x) + net.b[j]);
  return out;
}

std::vector<double> loss_grad_wj(const TwoLayerNet& net, const Activation& act, int j,
                                 const std::vector<double>& x, double y) {
  double resid = y - forward(net, act, x);
  double slope = act.derivative(1, dot_row(net, j, x) + net.b[j]);
  std::vector<double> g(net.d);
  double scale = -resid * net.a[j] * slope;
  for (int i = 0; i < net.d; ++i) g[i] = scale * x[i];
  return g;
}

std::vector<double> loss_grad_a(const TwoLayerNet& net, const Activation& act,
                                const std::vector<double>& x, double y) {
  double resid = y - forward(net, act, x);
  std::vector<double> g(net.M);
  for (int j = 0; j < net.M; ++j) g[j] = -resid * act.eval(dot_row(net, j, x) + net.b[j]);
  return g;
}

HermiteCoeffs hermite_coeffs(const Activation& act, int max_order, int nodes) {
  if (max_order < 0) throw std::invalid_argument("hermite_coeffs: max_order must be >= 0");
  auto compute = [&](int n) {
    GaussHermite quad(n);
    std::vector<double> mu(max_order + 1);
    for (int k = 0; k <= max_order; ++k) {
      mu[k] = quad.expect([&](double g) { return hermite_eval(k, g) * act.eval(g); });
    }
    return mu;
  };
  HermiteCoeffs out;
  out.mu = compute(nodes);
  out.max_order = max_order;
  out.quadrature_nodes = nodes;
  std::vector<double> mu2 = compute(2 * nodes);
  for (int k = 0; k <= max_order; ++k) {
    if (std::fabs(out.mu[k] - mu2[k]) > 1e-8)
      throw std::runtime_error("hermite_coeffs: quadrature did not converge at order " +
                               std::to_string(k));
  }
  if (act.bounded()) {
    for (int k = 0; k <= max_order; ++k) {
      if (std::fabs(out.mu[k]) <= 1.0 / act.bound_K()) out.violations.push_back(k);
    }
  }
  return out;
}

RiskEstimate population_risk_mc(const TwoLayerNet& net, const Activation& act,
                                const EmbeddedTarget& target, long N, Rng& rng) {
  if (N < 2) throw std::invalid_argument("population_risk_mc: N must be >= 2");
  double sum = 0.0, sum_sq = 0.0;
  for (long s = 0; s < N; ++s) {
    auto [x, y] = sample_pair(target, 0.0, rng);
    double r = y - forward(net, act, x);
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

nlohmann::json net_to_json(const TwoLayerNet& net) {
  nlohmann::json j;
  j["M"] = net.M;
  j["d"] = net.d;
  j["a"] = net.a;
  j["b"] = net.b;
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < net.M; ++r) {
    rows.push_back(std::vector<double>(net.w_row(r), net.w_row(r) + net.d));
  }
  j["W"] = std::move(rows);
  return j;
}

TwoLayerNet net_from_json(const nlohmann::json& j) {
  TwoLayerNet net;
  net.M = j.at("M").get<int>();
  net.d = j.at("d").get<int>();
  net.a = j.at("a").get<std::vector<double>>();
  net.b = j.at("b").get<std::vector<double>>();
  net.W.reserve(static_cast<size_t>(net.M) * net.d);
  for (const auto& row : j.at("W")) {
    auto vals = row.get<std::vector<double>>();
    net.W.insert(net.W.end(), vals.begin(), vals.end());
  }
  if (static_cast<int>(net.a.size()) != net.M || static_cast<int>(net.b.size()) != net.M ||
      net.W.size() != static_cast<size_t>(net.M) * net.d)
    throw std::invalid_argument("net_from_json: inconsistent shapes");
  return net;
}

}  // namespace leapsgd
