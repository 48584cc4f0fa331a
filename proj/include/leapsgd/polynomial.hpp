#pragma once

#include <string>
#include <utility>
#include <vector>

#include "leapsgd/rng.hpp"

namespace leapsgd {

enum class BasisKind { Boolean, Gaussian };

// A single basis element chi_S: product of z_i (Boolean) or He_{k_i}(z_i)
// (Gaussian) over the latent coordinates.
struct Monomial {
  std::vector<int> exponents;  // length P, nonnegative; Boolean restricts to {0,1}

  // New-coordinate mass contributed on top of `covered` (covered[i] true if
  // coordinate i was already introduced): Gaussian counts exponents, Boolean
  // counts coordinates. With nothing covered this is the monomial's full mass.
  int new_mass(BasisKind basis, const std::vector<char>& covered) const;
  int mass(BasisKind basis) const;
  int total_degree() const;
  bool operator==(const Monomial&) const = default;
};

struct SparsePolynomial {
  BasisKind basis = BasisKind::Boolean;
  int latent_dim = 0;  // P
  std::vector<std::pair<Monomial, double>> terms;
  double constant = 0.0;

  // Throws std::invalid_argument on malformed content (duplicate monomials,
  // exponent rules, dimension mismatches).
  void validate() const;
};

// Target embedded on a coordinate subset of the ambient space.
struct EmbeddedTarget {
  SparsePolynomial poly;
  int ambient_dim = 0;           // d
  std::vector<int> support;      // P distinct 0-based coordinates in [0, d)

  void validate() const;
};

// Embed on the first P coordinates.
EmbeddedTarget embed_prefix(SparsePolynomial poly, int ambient_dim);

// Probabilists' Hermite He_k(x) via the three-term recurrence
// He_{k+1}(x) = x He_k(x) - k He_{k-1}(x).
double hermite_eval(int k, double x);

double eval_poly(const SparsePolynomial& h, const std::vector<double>& z);

// Draw x (N(0,I_d) for Gaussian basis, Unif{+-1}^d for Boolean) and
// y = h(z) + eps, eps ~ N(0, noise_std^2), z = x restricted to the support.
std::pair<std::vector<double>, double> sample_pair(const EmbeddedTarget& target,
                                                   double noise_std, Rng& rng);

// Target DSL:  target := basis ":" term ("+" term)*
//   basis := "bool" | "gauss"
//   bool term:  coeff? z1*z2*...         gauss term: coeff? He2(z1)*He8(z3)*...
// Whitespace-insensitive; coefficients default to 1; variables 1-indexed.
// Throws std::invalid_argument with the offending position on syntax errors.
SparsePolynomial parse_target(const std::string& spec);

// Canonical printer; parse_target(print_target(h)) == h for canonical forms.
std::string print_target(const SparsePolynomial& h);

// Sum over terms of coeff^2 * Var(chi_S): Var = 1 for Boolean monomials,
// prod k_i! for Gaussian ones. (Constant excluded.)
double target_variance(const SparsePolynomial& h);

}  // namespace leapsgd
