#include "leapsgd/activation.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "leapsgd/polynomial.hpp"
#include "leapsgd/quadrature.hpp"

namespace leapsgd {

namespace {

constexpr int kMaxOrder = 24;
constexpr double kPi = 3.14159265358979323846;

// sigma = s with s = logistic(z - c). Every derivative is an integer-
// coefficient polynomial in s: d/dz s^m = m (s^m - s^(m+1)), so
// c^(n+1)_m = m c^(n)_m - (m-1) c^(n)_{m-1}.
class ShiftedSigmoid : public Activation {
public:
  explicit ShiftedSigmoid(double c, bool centered) : c_(c), centered_(centered) {
    coeffs_.resize(kMaxOrder + 1);
    coeffs_[0] = {0.0, 1.0};  // sigma = s
    for (int n = 0; n < kMaxOrder; ++n) {
      const auto& cur = coeffs_[n];
      std::vector<double> next(cur.size() + 1, 0.0);
      for (size_t m = 1; m < cur.size(); ++m) {
        next[m] += static_cast<double>(m) * cur[m];
        next[m + 1] -= static_cast<double>(m) * cur[m];
      }
      coeffs_[n + 1] = std::move(next);
    }
    // Conservative sup bound over the exposed orders (|s| <= 1).
    bound_ = 1.0;
    for (int n = 0; n <= kMaxOrder; ++n) {
      double sum = 0.0;
      for (double cm : coeffs_[n]) sum += std::fabs(cm);
      bound_ = std::max(bound_, sum);
    }
    if (centered_) {
      GaussHermite quad(200);
      center_ = quad.expect([&](double g) { return logistic(g); });
    }
  }

  double eval(double x) const override { return logistic(x) - center_; }

  double derivative(int n, double x) const override {
    if (n < 0 || n > kMaxOrder) throw std::invalid_argument("derivative order out of range");
    if (n == 0) return eval(x);
    double s = logistic(x);
    // Horner in s over the nonzero coefficient range.
    const auto& c = coeffs_[n];
    double acc = 0.0;
    for (size_t m = c.size(); m-- > 1;) acc = acc * s + c[m];
    return acc * s;
  }

  std::string name() const override {
    return (centered_ ? "centered_sigmoid(c=" : "sigmoid(c=") + format(c_) + ")";
  }

  double bound_K() const override { return bound_; }

private:
  static std::string format(double v) {
    std::string s = std::to_string(v);
    while (s.size() > 1 && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
  }

  double logistic(double x) const { return 1.0 / (1.0 + std::exp(-x + c_)); }

  double c_;
  bool centered_;
  double center_ = 0.0;
  double bound_ = 1.0;
  std::vector<std::vector<double>> coeffs_;  // coeffs_[n][m]: sigma^(n) = sum c_m s^m
};

class Sine : public Activation {
public:
  double eval(double x) const override { return std::sin(x + kPi / 4.0); }
  double derivative(int n, double x) const override {
    return std::sin(x + kPi / 4.0 + n * kPi / 2.0);
  }
  std::string name() const override { return "sine"; }
  // All derivatives bounded by 1; K = 4 also satisfies |mu_k| > 1/K
  // (|mu_k| = exp(-1/2)/sqrt(2) ~ 0.429 for every k).
  double bound_K() const override { return 4.0; }
};

class Identity : public Activation {
public:
  double eval(double x) const override { return x; }
  double derivative(int n, double x) const override {
    return n == 0 ? x : (n == 1 ? 1.0 : 0.0);
  }
  std::string name() const override { return "identity"; }
  double bound_K() const override { return 1.0; }
  bool bounded() const override { return false; }
};

class HermiteActivation : public Activation {
public:
  explicit HermiteActivation(int k) : k_(k) {
    if (k < 0) throw std::invalid_argument("Hermite order must be nonnegative");
  }
  double eval(double x) const override { return hermite_eval(k_, x); }
  double derivative(int n, double x) const override {
    // He_k^(n) = k!/(k-n)! He_{k-n}.
    if (n > k_) return 0.0;
    double fac = 1.0;
    for (int j = k_; j > k_ - n; --j) fac *= j;
    return fac * hermite_eval(k_ - n, x);
  }
  std::string name() const override { return "he" + std::to_string(k_); }
  double bound_K() const override { return 1.0; }
  bool bounded() const override { return false; }

private:
  int k_;
};

class HalfSquare : public Activation {
public:
  double eval(double x) const override { return 0.5 * x * x; }
  double derivative(int n, double x) const override {
    if (n == 0) return eval(x);
    if (n == 1) return x;
    return n == 2 ? 1.0 : 0.0;
  }
  std::string name() const override { return "half_square"; }
  double bound_K() const override { return 1.0; }
  bool bounded() const override { return false; }
};

}  // namespace

ActivationPtr make_shifted_sigmoid(double c) {
  return std::make_shared<ShiftedSigmoid>(c, false);
}

ActivationPtr make_centered_sigmoid(double c) {
  return std::make_shared<ShiftedSigmoid>(c, true);
}

ActivationPtr make_sine() { return std::make_shared<Sine>(); }

ActivationPtr make_identity() { return std::make_shared<Identity>(); }

ActivationPtr make_hermite_activation(int k) {
  return std::make_shared<HermiteActivation>(k);
}

ActivationPtr make_half_square() { return std::make_shared<HalfSquare>(); }

ActivationPtr make_activation(const std::string& name) {
  auto split = [&](const std::string& prefix, double def) -> std::pair<bool, double> {
    if (name == prefix) return {true, def};
    if (name.rfind(prefix + ":", 0) == 0) return {true, std::stod(name.substr(prefix.size() + 1))};
    return {false, 0.0};
  };
  if (auto [ok, c] = split("sigmoid", 1.0); ok) return make_shifted_sigmoid(c);
  if (auto [ok, c] = split("centered_sigmoid", 1.0); ok) return make_centered_sigmoid(c);
  if (name == "sine") return make_sine();
  throw std::invalid_argument("unknown activation: " + name);
}

}  // namespace leapsgd
