#pragma once

#include <utility>
#include <vector>

namespace leapsgd {

// Gauss-Hermite quadrature for the probabilists' weight: integrates against
// the standard normal density, so expect(f) approximates E_G[f(G)].
class GaussHermite {
public:
  // Golub-Welsch on the Jacobi matrix of the probabilists' Hermite
  // recurrence (zero diagonal, off-diagonal sqrt(i)).
  explicit GaussHermite(int n);

  template <class F>
  double expect(F&& f) const {
    double acc = 0.0;
    for (size_t i = 0; i < nodes_.size(); ++i) acc += weights_[i] * f(nodes_[i]);
    return acc;
  }

  int size() const { return static_cast<int>(nodes_.size()); }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }

private:
  std::vector<double> nodes_, weights_;
};

}  // namespace leapsgd
