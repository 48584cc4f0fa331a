#pragma once

#include <memory>
#include <string>

namespace leapsgd {

// Activation with analytic derivatives of arbitrary order (no autodiff).
class Activation {
public:
  virtual ~Activation() = default;
  virtual double eval(double x) const = 0;
  // n-th derivative; n = 0 is eval.
  virtual double derivative(int n, double x) const = 0;
  virtual std::string name() const = 0;
  // Sup-norm bound K covering sigma^(0..order) for the built-ins.
  virtual double bound_K() const = 0;
  // False for test-only unbounded activations (identity, Hermite, square):
  // they are excluded from smoothness-assumption validation.
  virtual bool bounded() const { return true; }
};

using ActivationPtr = std::shared_ptr<const Activation>;

// Shifted sigmoid sigma(z) = 1 / (1 + exp(-z + c)).
ActivationPtr make_shifted_sigmoid(double c);

// Shifted sigmoid minus its mean under N(0,1); identical derivatives for
// n >= 1, but the order-0 Hermite coefficient vanishes. Keeps the second
// layer well-conditioned in joint SGD (no all-ones feature component).
ActivationPtr make_centered_sigmoid(double c);

// sigma(z) = sin(z + pi/4); every derivative is a phase shift, and every
// Hermite coefficient has magnitude exp(-1/2)/sqrt(2).
ActivationPtr make_sine();

// Test-only activations (unbounded; bounded() == false).
ActivationPtr make_identity();
ActivationPtr make_hermite_activation(int k);  // sigma = He_k
ActivationPtr make_half_square();              // sigma(z) = z^2 / 2

// Lookup by CLI name: "sigmoid", "sigmoid:<c>", "centered_sigmoid",
// "centered_sigmoid:<c>", "sine". Throws std::invalid_argument otherwise.
ActivationPtr make_activation(const std::string& name);

}  // namespace leapsgd
