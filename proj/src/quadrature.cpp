#include "leapsgd/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace leapsgd {

namespace {

// Implicit-shift QL for a symmetric tridiagonal matrix, tracking the first
// row of the eigenvector matrix (classic imtqlx, as used for Gauss rules).
// d: diagonal (eigenvalues on exit), e: off-diagonal, z: first components.
void imtqlx(std::vector<double>& d, std::vector<double>& e, std::vector<double>& z) {
  const int n = static_cast<int>(d.size());
  if (n == 1) return;
  e[n - 1] = 0.0;
  const double prec = 2.220446049250313e-16;
  for (int l = 0; l < n; ++l) {
    for (int iter = 0; iter <= 30; ++iter) {
      if (iter == 30) throw std::runtime_error("quadrature eigen-solve failed to converge");
      int m = l;
      for (; m < n - 1; ++m) {
        double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
        if (std::fabs(e[m]) <= prec * dd) break;
      }
      if (m == l) break;
      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double r = std::hypot(g, 1.0);
      g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
      double s = 1.0, c = 1.0, p = 0.0;
      bool underflow = false;
      for (int i = m - 1; i >= l; --i) {
        double f = s * e[i];
        double b = c * e[i];
        r = std::hypot(f, g);
        e[i + 1] = r;
        if (r == 0.0) {
          d[i + 1] -= p;
          e[m] = 0.0;
          underflow = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[i + 1] - p;
        r = (d[i] - g) * s + 2.0 * c * b;
        p = s * r;
        d[i + 1] = g + p;
        g = c * r - b;
        f = z[i + 1];
        z[i + 1] = s * z[i] + c * f;
        z[i] = c * z[i] - s * f;
      }
      if (!underflow) {
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    }
  }
}

}  // namespace

GaussHermite::GaussHermite(int n) {
  if (n < 1) throw std::invalid_argument("quadrature needs at least one node");
  std::vector<double> diag(n, 0.0), off(n, 0.0), z(n, 0.0);
  for (int i = 1; i < n; ++i) off[i - 1] = std::sqrt(static_cast<double>(i));
  z[0] = 1.0;
  imtqlx(diag, off, z);
  // Sort by node; weight_i = z_i^2 (first components squared; total mass 1).
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return diag[a] < diag[b]; });
  nodes_.resize(n);
  weights_.resize(n);
  for (int i = 0; i < n; ++i) {
    nodes_[i] = diag[order[i]];
    weights_[i] = z[order[i]] * z[order[i]];
  }
}

}  // namespace leapsgd
