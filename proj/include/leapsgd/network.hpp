#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "leapsgd/activation.hpp"
#include "leapsgd/polynomial.hpp"
#include "leapsgd/rng.hpp"

namespace leapsgd {

// Width-M two-layer network x -> sum_j a_j sigma(<w_j, x> + b_j).
struct TwoLayerNet {
  int M = 0, d = 0;
  std::vector<double> a;  // M
  std::vector<double> b;  // M
  std::vector<double> W;  // row-major M x d; row j is w_j

  double* w_row(int j) { return W.data() + static_cast<size_t>(j) * d; }
  const double* w_row(int j) const { return W.data() + static_cast<size_t>(j) * d; }
};

// a_j ~ Unif{+-kappa}, b_j ~ Unif[-rho, rho], w_ji ~ Unif{+-1/sqrt(d)}.
TwoLayerNet init_net(int M, int d, double kappa, double rho, Rng& rng);

double forward(const TwoLayerNet& net, const Activation& act, const std::vector<double>& x);

// d(loss)/d(w_j) for squared loss l = (y - yhat)^2 / 2:
//   -(y - yhat) * a_j * sigma'(<w_j,x> + b_j) * x.
std::vector<double> loss_grad_wj(const TwoLayerNet& net, const Activation& act, int j,
                                 const std::vector<double>& x, double y);

// d(loss)/d(a): -(y - yhat) * sigma(<w_j,x> + b_j) per neuron.
std::vector<double> loss_grad_a(const TwoLayerNet& net, const Activation& act,
                                const std::vector<double>& x, double y);

struct HermiteCoeffs {
  std::vector<double> mu;  // mu[k] = E[He_k(G) sigma(G)]
  int max_order = 0;
  int quadrature_nodes = 0;
  // Orders k with |mu_k| <= 1 / bound_K (smoothness-assumption violations);
  // only populated for bounded activations.
  std::vector<int> violations;
};

// Gauss-Hermite computation of the activation's Hermite coefficients, with a
// doubled-node convergence check (throws std::runtime_error if any mu_k moves
// by more than 1e-8 between n and 2n nodes).
HermiteCoeffs hermite_coeffs(const Activation& act, int max_order, int nodes = 200);

struct RiskEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

// Monte-Carlo estimate of E[ (f_*(x) - yhat(x))^2 / 2 ] (noiseless residual).
RiskEstimate population_risk_mc(const TwoLayerNet& net, const Activation& act,
                                const EmbeddedTarget& target, long N, Rng& rng);

nlohmann::json net_to_json(const TwoLayerNet& net);
TwoLayerNet net_from_json(const nlohmann::json& j);

}  // namespace leapsgd
