#include "leapsgd/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <thread>

namespace leapsgd {

int NestedExponents::degree_through(int l) const {
  int acc = 0;
  for (int j = 0; j < levels[l - 1]; ++j) acc += exponents[j];
  return acc;
}

void NestedExponents::validate() const {
  if (levels.empty()) throw std::invalid_argument("nested target: no levels");
  for (int k : exponents)
    if (k < 1) throw std::invalid_argument("nested target: exponents must be >= 1");
  int prev = 0;
  for (int pl : levels) {
    if (pl <= prev) throw std::invalid_argument("nested target: levels must strictly increase");
    prev = pl;
  }
  if (levels.back() != P())
    throw std::invalid_argument("nested target: last level must cover all exponents");
  if (degree_through(L()) < 2)
    throw std::invalid_argument("nested target: total degree must be >= 2");
}

NestedExponents nested_from_poly(const SparsePolynomial& h) {
  if (h.basis != BasisKind::Gaussian)
    throw std::invalid_argument("nested_from_poly: Gaussian basis required");
  if (h.terms.empty() || h.constant != 0.0)
    throw std::invalid_argument("nested_from_poly: expected nested monomials, no constant");
  auto terms = h.terms;
  auto support_len = [](const Monomial& m) {
    int len = 0;
    for (size_t i = 0; i < m.exponents.size(); ++i)
      if (m.exponents[i] > 0) len = static_cast<int>(i) + 1;
    return len;
  };
  std::sort(terms.begin(), terms.end(), [&](const auto& lhs, const auto& rhs) {
    return support_len(lhs.first) < support_len(rhs.first);
  });
  NestedExponents out;
  int prev_len = 0;
  for (const auto& [mono, coeff] : terms) {
    if (coeff != 1.0) throw std::invalid_argument("nested_from_poly: coefficients must be 1");
    int len = support_len(mono);
    if (len <= prev_len)
      throw std::invalid_argument("nested_from_poly: supports must be strictly nested prefixes");
    for (int i = 0; i < len; ++i) {
      if (mono.exponents[i] < 1)
        throw std::invalid_argument("nested_from_poly: supports must be prefixes");
      if (i < prev_len && mono.exponents[i] != out.exponents[i])
        throw std::invalid_argument("nested_from_poly: exponents must agree across levels");
    }
    out.exponents.assign(mono.exponents.begin(), mono.exponents.begin() + len);
    out.levels.push_back(len);
    prev_len = len;
  }
  out.validate();
  return out;
}

namespace {

// chi_l(w) / w_i without dividing: w_i^{k_i - 1} * prod_{j <= P_l, j != i} w_j^{k_j}.
double chi_over_wi(const std::vector<double>& w, const std::vector<int>& k, int P_l, int i) {
  double acc = std::pow(w[i], k[i] - 1);
  for (int j = 0; j < P_l; ++j)
    if (j != i) acc *= std::pow(w[j], k[j]);
  return acc;
}

double chi(const std::vector<double>& w, const std::vector<int>& k, int P_l) {
  double acc = 1.0;
  for (int j = 0; j < P_l; ++j) acc *= std::pow(w[j], k[j]);
  return acc;
}

double norm2(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

}  // namespace

PopGradResult pop_grad_nested(const std::vector<double>& w, const std::vector<uint8_t>& S,
                              const NestedExponents& nested, const Activation& act,
                              double a0, double b, const GaussHermite& quad,
                              const BandParams& band) {
  nested.validate();
  const int d = static_cast<int>(w.size());
  const int P = nested.P();
  const int L = nested.L();
  if (P > d) throw std::invalid_argument("pop_grad: target support exceeds dimension");
  if (S.size() != w.size()) throw std::invalid_argument("pop_grad: S/w length mismatch");
  double s_norm = 0.0;
  for (int i = 0; i < d; ++i)
    if (S[i]) s_norm += w[i] * w[i];
  if (std::fabs(std::sqrt(s_norm) - 1.0) > 1e-9)
    throw std::invalid_argument("pop_grad: w restricted to S must have unit norm");

  const double wn = norm2(w);
  // E_n = E_G[sigma^(n)(||w|| G + b)], needed up to the top degree plus 2.
  const int top = nested.degree_through(L) + 2;
  std::vector<double> E(top + 1, 0.0);
  for (int n = 1; n <= top; ++n)
    E[n] = quad.expect([&](double g) { return act.derivative(n, wn * g + b); });

  PopGradResult out;
  out.drift.assign(d, 0.0);
  out.level_contrib.assign(L, std::vector<double>(d, 0.0));
  out.interaction_band =
      std::fabs(a0) * (2.0 * band.kappa * d * band.K * band.K * band.M * band.C0);

  for (int l = 1; l <= L; ++l) {
    const int P_l = nested.levels[l - 1];
    const int D_l = nested.degree_through(l);
    double ksum = 0.0;  // sum of exponents over S-coordinates of this level
    for (int j = 0; j < P_l; ++j)
      if (S[j]) ksum += nested.exponents[j];
    const double chi_l = chi(w, nested.exponents, P_l);
    auto& contrib = out.level_contrib[l - 1];
    for (int i = 0; i < d; ++i) {
      double g;
      if (i < P_l) {
        const double cw = chi_over_wi(w, nested.exponents, P_l, i);
        const double k_i = nested.exponents[i];
        if (S[i]) {
          g = a0 * cw * (k_i - w[i] * w[i] * ksum) * E[D_l];
        } else {
          g = a0 * cw * (k_i * E[D_l] + w[i] * w[i] * E[D_l + 2]);
        }
      } else {
        if (S[i]) {
          g = -a0 * w[i] * chi_l * ksum * E[D_l];
        } else {
          g = a0 * w[i] * chi_l * E[D_l + 2];
        }
      }
      contrib[i] = g;
      out.drift[i] += g;
    }
  }
  return out;
}

PopGradResult pop_grad_single(const std::vector<double>& w, const std::vector<uint8_t>& S,
                              const std::vector<int>& exponents, const Activation& act,
                              double a0, double b, const GaussHermite& quad,
                              const BandParams& band) {
  int degree = 0;
  for (int k : exponents) degree += k;
  if (degree < 2)
    throw std::invalid_argument("pop_grad_single: total degree must be >= 2");
  NestedExponents nested;
  nested.exponents = exponents;
  nested.levels = {static_cast<int>(exponents.size())};
  return pop_grad_nested(w, S, nested, act, a0, b, quad, band);
}

namespace {

// One MC shard: accumulates sum and sum-of-squares of the projected update.
void mc_shard(const std::vector<double>& w, const std::vector<uint8_t>& S,
              const EmbeddedTarget& target, const Activation& act, double a0, double b,
              long n, Rng rng, std::vector<double>& sum, std::vector<double>& sum_sq) {
  const int d = static_cast<int>(w.size());
  sum.assign(d, 0.0);
  sum_sq.assign(d, 0.0);
  std::vector<double> u(d);
  for (long s = 0; s < n; ++s) {
    auto [x, y] = sample_pair(target, 0.0, rng);
    double z = b;
    for (int i = 0; i < d; ++i) z += w[i] * x[i];
    const double scale = a0 * y * act.derivative(1, z);
    double inner = 0.0;  // <S w, u>
    for (int i = 0; i < d; ++i) {
      u[i] = scale * x[i];
      if (S[i]) inner += w[i] * u[i];
    }
    for (int i = 0; i < d; ++i) {
      const double v = S[i] ? u[i] - w[i] * inner : u[i];
      sum[i] += v;
      sum_sq[i] += v * v;
    }
  }
}

}  // namespace

McDrift mc_pop_grad(const std::vector<double>& w, const std::vector<uint8_t>& S,
                    const EmbeddedTarget& target, const Activation& act, double a0,
                    double b, long N, Rng& rng, int threads) {
  if (N < 100) throw std::invalid_argument("mc_pop_grad: N must be >= 100");
  if (S.size() != w.size()) throw std::invalid_argument("mc_pop_grad: S/w length mismatch");
  if (static_cast<int>(w.size()) != target.ambient_dim)
    throw std::invalid_argument("mc_pop_grad: w/target dimension mismatch");
  threads = std::max(1, threads);
  // The shard count is fixed by N alone so the estimate does not depend on
  // the worker count; threads only consume shards.
  const int shards = static_cast<int>(std::min<long>(64, std::max<long>(1, N / 100)));
  const int d = static_cast<int>(w.size());

  std::vector<std::vector<double>> sums(shards), sq(shards);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      const int s = next.fetch_add(1);
      if (s >= shards) return;
      const long lo = N * s / shards, hi = N * (s + 1) / shards;
      mc_shard(w, S, target, act, a0, b, hi - lo, rng.split(static_cast<uint64_t>(s)),
               sums[s], sq[s]);
    }
  };
  if (threads == 1 || shards == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    const int nworkers = std::min(threads, shards);
    pool.reserve(nworkers);
    for (int t = 0; t < nworkers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  McDrift out;
  out.estimate.assign(d, 0.0);
  out.std_error.assign(d, 0.0);
  for (int s = 0; s < shards; ++s)  // fixed shard order
    for (int i = 0; i < d; ++i) {
      out.estimate[i] += sums[s][i];
      out.std_error[i] += sq[s][i];
    }
  for (int i = 0; i < d; ++i) {
    const double mean = out.estimate[i] / static_cast<double>(N);
    const double var = (out.std_error[i] / N - mean * mean) * N / (N - 1.0);
    out.estimate[i] = mean;
    out.std_error[i] = std::sqrt(std::max(var, 0.0) / static_cast<double>(N));
  }
  return out;
}

DriftMartingaleSplit drift_martingale_split(
    const std::vector<std::vector<double>>& realized,
    const std::function<std::vector<double>(size_t step)>& drift_fn) {
  DriftMartingaleSplit out;
  if (realized.empty()) return out;
  const size_t d = realized.front().size();
  out.cum_drift.assign(d, 0.0);
  out.cum_martingale.assign(d, 0.0);
  out.max_abs_cum_martingale.assign(d, 0.0);
  out.drift.reserve(realized.size());
  out.martingale.reserve(realized.size());
  for (size_t t = 0; t < realized.size(); ++t) {
    std::vector<double> drift = drift_fn(t);
    if (drift.size() != d || realized[t].size() != d)
      throw std::invalid_argument("drift_martingale_split: length mismatch at step " +
                                  std::to_string(t));
    std::vector<double> mart(d);
    for (size_t i = 0; i < d; ++i) {
      mart[i] = realized[t][i] - drift[i];
      out.cum_drift[i] += drift[i];
      out.cum_martingale[i] += mart[i];
      out.max_abs_cum_martingale[i] =
          std::max(out.max_abs_cum_martingale[i], std::fabs(out.cum_martingale[i]));
    }
    out.drift.push_back(std::move(drift));
    out.martingale.push_back(std::move(mart));
  }
  return out;
}

SequenceBoundsReport sequence_bounds_check(double a0, double a1, double b0, double b1,
                                           int k, long T, double Delta) {
  if (!(0.0 < a0 && a0 <= b0) || !(0.0 < a1 && a1 <= b1) || k < 2)
    throw std::invalid_argument("sequence_bounds_check: need 0 < a0 <= b0, 0 < a1 <= b1, k >= 2");
  SequenceBoundsReport rep;
  constexpr double kOverflow = 1e100;
  constexpr double kRelTol = 1e-9;
  double lo_sum = 0.0, hi_sum = 0.0;  // sums of u_s^(k-1) so far
  const double lower_rate =
      (k > 2) ? (k - 2) * a1 / std::pow(1.0 + a1 * std::pow(Delta, k - 2), k - 1) : 0.0;
  for (long t = 0; t <= T; ++t) {
    const double lo = a0 + a1 * lo_sum;  // minimal sequence w_t
    const double hi = b0 + b1 * hi_sum;  // maximal sequence v_t
    rep.horizon = t;
    if (hi > kOverflow) break;
    bool bad = false;
    if (k == 2) {
      const double lb = a0 * std::pow(1.0 + a1, static_cast<double>(t));
      const double ub = b0 * std::pow(1.0 + b1, static_cast<double>(t));
      rep.checked += 2;
      bad = lo < lb * (1.0 - kRelTol) || hi > ub * (1.0 + kRelTol);
    } else {
      const double ub_den = std::pow(b0, -(k - 2.0)) - (k - 2.0) * b1 * t;
      if (ub_den > 0.0) {
        ++rep.checked;
        bad = hi > std::pow(ub_den, -1.0 / (k - 2.0)) * (1.0 + kRelTol);
      }
      if (!bad && lo <= Delta) {
        const double lb_den = std::pow(a0, -(k - 2.0)) - lower_rate * t;
        const double lb = lb_den > 0.0 ? std::min(Delta, std::pow(lb_den, -1.0 / (k - 2.0)))
                                       : Delta;
        ++rep.checked;
        bad = lo < lb * (1.0 - kRelTol);
      }
    }
    if (bad) {
      rep.ok = false;
      if (rep.first_violation < 0) rep.first_violation = t;
    }
    lo_sum += std::pow(lo, k - 1);
    hi_sum += std::pow(hi, k - 1);
  }
  return rep;
}

CorrelationBoundReport correlation_bound_check(const std::vector<double>& w, int P,
                                               const Activation& act, double b, long N,
                                               Rng& rng) {
  const int d = static_cast<int>(w.size());
  if (P < 1 || P > d) throw std::invalid_argument("correlation_bound_check: bad P");
  if (N < 100) throw std::invalid_argument("correlation_bound_check: N must be >= 100");

  double sum = 0.0, sum_sq = 0.0;
  std::vector<double> x(d);
  for (long s = 0; s < N; ++s) {
    for (int i = 0; i < d; ++i) x[i] = rng.normal();
    double z = b;
    for (int i = 0; i < d; ++i) z += w[i] * x[i];
    double v = act.eval(z);
    for (int i = 0; i < P; ++i) v *= x[i];
    sum += v;
    sum_sq += v * v;
  }
  CorrelationBoundReport rep;
  rep.mc_estimate = sum / static_cast<double>(N);
  const double var = (sum_sq / N - rep.mc_estimate * rep.mc_estimate) * N / (N - 1.0);
  rep.mc_std_error = std::sqrt(std::max(var, 0.0) / static_cast<double>(N));

  const double wn = norm2(w);
  GaussHermite quad(200);
  double prod_w = 1.0, prod_abs = 1.0;
  for (int i = 0; i < P; ++i) {
    prod_w *= w[i];
    prod_abs *= std::fabs(w[i]);
  }
  rep.quadrature_value =
      prod_w * quad.expect([&](double g) { return act.derivative(P, wn * g + b); });
  rep.bound = act.bound_K() * prod_abs;
  rep.ok = std::fabs(rep.mc_estimate) <= rep.bound + 4.0 * rep.mc_std_error &&
           std::fabs(rep.quadrature_value) <= rep.bound * (1.0 + 1e-9) + 1e-12 &&
           std::fabs(rep.mc_estimate - rep.quadrature_value) <= 4.0 * rep.mc_std_error;
  return rep;
}

}  // namespace leapsgd
