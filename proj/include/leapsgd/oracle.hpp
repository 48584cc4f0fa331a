#pragma once

#include <functional>
#include <vector>

#include "leapsgd/activation.hpp"
#include "leapsgd/polynomial.hpp"
#include "leapsgd/quadrature.hpp"
#include "leapsgd/rng.hpp"

namespace leapsgd {

// Nested-monomial target sum_l prod_{s <= P_l} He_{k_s}(z_s) with
// 0 < P_1 < ... < P_L and positive exponents k_1..k_P.
struct NestedExponents {
  std::vector<int> exponents;  // k_1..k_P
  std::vector<int> levels;     // P_1..P_L (1-based prefix lengths)

  int P() const { return static_cast<int>(exponents.size()); }
  int L() const { return static_cast<int>(levels.size()); }
  // Total degree through level l (1-based): k_1 + ... + k_{P_l}.
  int degree_through(int l) const;
  void validate() const;  // throws std::invalid_argument
};

// Extract nested structure from a Gaussian polynomial whose term supports are
// nested prefixes with unit coefficients; throws if not of that form.
NestedExponents nested_from_poly(const SparsePolynomial& h);

// Parameters of the reported interaction band |a0| * kappa_tilde with
// kappa_tilde = 2 kappa d K^2 M C0. Tests use kappa = 0 (correlation flow),
// which zeroes the band.
struct BandParams {
  double kappa = 0.0;
  double K = 1.0;
  int M = 1;
  double C0 = 1.0;
};

struct PopGradResult {
  std::vector<double> drift;                       // length d
  std::vector<std::vector<double>> level_contrib;  // [L][d], sums to drift
  double interaction_band = 0.0;                   // |a0| * kappa_tilde
};

// Closed-form population spherical gradient for a single Gaussian monomial of
// total degree D >= 2 (evaluated by quadrature); requires ||w|_S||_2 = 1.
PopGradResult pop_grad_single(const std::vector<double>& w, const std::vector<uint8_t>& S,
                              const std::vector<int>& exponents, const Activation& act,
                              double a0, double b, const GaussHermite& quad,
                              const BandParams& band = {});

// Closed-form population spherical gradient for nested monomials of total
// degree >= 2. With L = 1 this performs the same float operations as
// pop_grad_single.
PopGradResult pop_grad_nested(const std::vector<double>& w, const std::vector<uint8_t>& S,
                              const NestedExponents& nested, const Activation& act,
                              double a0, double b, const GaussHermite& quad,
                              const BandParams& band = {});

struct McDrift {
  std::vector<double> estimate;   // per coordinate
  std::vector<double> std_error;  // per coordinate
};

// Monte-Carlo correlation-flow drift: mean over N fresh samples of
// a0 * y * sigma'(<w,x> + b) * x with the spherical projection on S
// (the kappa -> 0 limit of the phase-1 update).
// Shards across threads with a fixed shard-order reduction, so the result is
// independent of the thread count.
McDrift mc_pop_grad(const std::vector<double>& w, const std::vector<uint8_t>& S,
                    const EmbeddedTarget& target, const Activation& act, double a0,
                    double b, long N, Rng& rng, int threads = 1);

struct DriftMartingaleSplit {
  std::vector<std::vector<double>> drift;       // per step
  std::vector<std::vector<double>> martingale;  // per step; drift + mart == realized
  std::vector<double> cum_drift;                // per coordinate, final
  std::vector<double> cum_martingale;           // per coordinate, final
  std::vector<double> max_abs_cum_martingale;   // per coordinate, running max
};

// Splits realized per-step updates into the supplied population drift and the
// residual martingale increment; reconstruction is exact by construction.
DriftMartingaleSplit drift_martingale_split(
    const std::vector<std::vector<double>>& realized,
    const std::function<std::vector<double>(size_t step)>& drift_fn);

struct SequenceBoundsReport {
  bool ok = true;
  long first_violation = -1;  // step of the first violated bound
  long horizon = 0;           // last simulated step (stops early on overflow)
  long checked = 0;           // number of bound evaluations
};

// Simulates the extremal recursions u_t = u0 + u1 * sum_{s<t} u_s^(k-1) and
// asserts the closed-form envelope (geometric for k = 2, Bihari-LaSalle
// for k > 2) at every step up to T or overflow.
SequenceBoundsReport sequence_bounds_check(double a0, double a1, double b0, double b1,
                                           int k, long T, double Delta);

struct CorrelationBoundReport {
  double mc_estimate = 0.0;
  double mc_std_error = 0.0;
  double quadrature_value = 0.0;  // prod w_i * E[sigma^(P)(||w|| G + b)]
  double bound = 0.0;             // K * prod |w_i|
  bool ok = true;                 // |corr| <= bound + 4 SE, both estimates
};

// Correlation of sigma(<w,x> + b) with the multilinear monomial x_1...x_P
// under N(0, I_d); checks |corr| <= K prod |w_i|.
CorrelationBoundReport correlation_bound_check(const std::vector<double>& w, int P,
                                               const Activation& act, double b, long N,
                                               Rng& rng);

}  // namespace leapsgd
