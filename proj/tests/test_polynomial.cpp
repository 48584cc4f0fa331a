#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "leapsgd/polynomial.hpp"
#include "leapsgd/quadrature.hpp"
#include "leapsgd/rng.hpp"

using namespace leapsgd;

TEST_CASE("hermite_eval closed-form values") {
  CHECK(hermite_eval(0, 3.7) == 1.0);
  CHECK(hermite_eval(2, 0.0) == -1.0);  // He_2(x) = x^2 - 1
  CHECK(hermite_eval(3, 1.0) == -2.0);  // He_3(x) = x^3 - 3x
}

TEST_CASE("hermite three-term recurrence holds on a grid") {
  for (int k = 0; k <= 10; ++k) {
    for (double x = -5.0; x <= 5.0; x += 0.25) {
      double lhs = x * hermite_eval(k, x) - hermite_eval(k + 1, x) -
                   (k > 0 ? k * hermite_eval(k - 1, x) : 0.0);
      CHECK(std::fabs(lhs) < 1e-9 * std::max(1.0, std::fabs(hermite_eval(k + 1, x))));
    }
  }
}

TEST_CASE("hermite orthogonality under Gauss-Hermite quadrature") {
  GaussHermite quad(60);
  auto factorial = [](int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
  };
  for (int j = 0; j <= 10; ++j) {
    for (int k = 0; k <= 10; ++k) {
      double val = quad.expect([&](double g) { return hermite_eval(j, g) * hermite_eval(k, g); });
      double want = j == k ? factorial(k) : 0.0;
      CHECK(std::fabs(val - want) < 1e-8 * std::max(1.0, want));
    }
  }
}

TEST_CASE("eval_poly on the three reference targets") {
  SparsePolynomial bool_h = parse_target("bool: z1*z2");
  CHECK(eval_poly(bool_h, {1.0, -1.0}) == -1.0);

  SparsePolynomial he2 = parse_target("gauss: He2(z1)");
  CHECK(eval_poly(he2, {2.0}) == 3.0);

  SparsePolynomial nested = parse_target("gauss: He1(z1) + He1(z1)*He2(z2)");
  CHECK(eval_poly(nested, {1.0, 0.0}) == 0.0);  // 1 + 1*(-1)
}

TEST_CASE("eval_poly rejects dimension mismatch") {
  SparsePolynomial h = parse_target("gauss: He2(z1)");
  CHECK_THROWS_AS(eval_poly(h, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("sample_pair: boolean z1 returns the support coordinate exactly") {
  EmbeddedTarget t = embed_prefix(parse_target("bool: z1"), 6);
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    auto [x, y] = sample_pair(t, 0.0, rng);
    CHECK(y == x[0]);
    for (double xi : x) CHECK((xi == 1.0 || xi == -1.0));
  }
}

TEST_CASE("sample_pair is deterministic given the seed") {
  EmbeddedTarget t = embed_prefix(parse_target("gauss: He2(z1)*He1(z2)"), 4);
  Rng a(42), b(42);
  for (int i = 0; i < 20; ++i) {
    auto [xa, ya] = sample_pair(t, 0.3, a);
    auto [xb, yb] = sample_pair(t, 0.3, b);
    CHECK(xa == xb);
    CHECK(ya == yb);
  }
}

TEST_CASE("sample_pair: noiseless labels match eval_poly on the support") {
  EmbeddedTarget t;
  t.poly = parse_target("gauss: 2 He2(z1)*He1(z2) + He3(z2)");
  t.ambient_dim = 7;
  t.support = {5, 2};
  t.validate();
  Rng rng(9);
  for (int i = 0; i < 100; ++i) {
    auto [x, y] = sample_pair(t, 0.0, rng);
    CHECK(y == eval_poly(t.poly, {x[5], x[2]}));
  }
}

TEST_CASE("sample_pair: empirical mean of He2 labels is near zero") {
  EmbeddedTarget t = embed_prefix(parse_target("gauss: He2(z1)"), 2);
  Rng rng(123);
  const long N = 1000000;
  double sum = 0.0;
  for (long i = 0; i < N; ++i) sum += sample_pair(t, 0.0, rng).second;
  CHECK(std::fabs(sum / N) < 4.0 * std::sqrt(2.0 / N));
}

TEST_CASE("parse_target reference strings") {
  SparsePolynomial a = parse_target("bool: z1 + z1*z2*z3");
  CHECK(a.basis == BasisKind::Boolean);
  CHECK(a.terms.size() == 2);
  CHECK(a.latent_dim == 3);

  SparsePolynomial b = parse_target("gauss: He2(z1)*He8(z3) + He2(z2)");
  CHECK(b.basis == BasisKind::Gaussian);
  CHECK(b.terms.size() == 2);
  CHECK(b.latent_dim == 3);
}

TEST_CASE("parse_target rejects boolean exponents above one") {
  CHECK_THROWS_AS(parse_target("bool: z1*z1"), std::invalid_argument);
}

TEST_CASE("parse_target rejects duplicates and syntax errors") {
  CHECK_THROWS_AS(parse_target("bool: z1 + z1"), std::invalid_argument);
  CHECK_THROWS_AS(parse_target("bool:"), std::invalid_argument);
  CHECK_THROWS_AS(parse_target("frob: z1"), std::invalid_argument);
  CHECK_THROWS_AS(parse_target("gauss: He2(z1"), std::invalid_argument);
}

TEST_CASE("parse errors carry a position") {
  try {
    parse_target("bool: z1 * q2");
    FAIL("expected a parse error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("position") != std::string::npos);
  }
}

TEST_CASE("print_target round-trips through parse_target") {
  for (const char* s : {"bool: z1 + z1*z2*z3", "gauss: He2(z1)*He8(z3) + He2(z2)",
                        "gauss: He1(z1) + He1(z1)*He2(z2)", "bool: -2 z1*z4 + 0.5 z2"}) {
    SparsePolynomial h = parse_target(s);
    std::string printed = print_target(h);
    SparsePolynomial h2 = parse_target(printed);
    CHECK(print_target(h2) == printed);
    CHECK(h2.terms.size() == h.terms.size());
    Rng rng(31);
    for (int i = 0; i < 20; ++i) {
      std::vector<double> z(h.latent_dim);
      for (double& v : z) v = rng.normal();
      CHECK(eval_poly(h, z) == doctest::Approx(eval_poly(h2, z)).epsilon(1e-12));
    }
  }
}

TEST_CASE("target_variance sums coefficient-weighted basis variances") {
  // Boolean monomials have unit variance.
  CHECK(target_variance(parse_target("bool: z1 + z1*z2*z3")) == doctest::Approx(2.0));
  // Gaussian He_2 has variance 2! = 2; the product He2*He3 has 2!*3! = 12.
  CHECK(target_variance(parse_target("gauss: He2(z1)")) == doctest::Approx(2.0));
  CHECK(target_variance(parse_target("gauss: 0.5 He2(z1)*He3(z2)")) == doctest::Approx(3.0));
}

TEST_CASE("embedded target validation catches bad supports") {
  EmbeddedTarget t;
  t.poly = parse_target("bool: z1*z2");
  t.ambient_dim = 3;
  t.support = {0, 0};
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);
  t.support = {0, 5};
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);
  t.support = {2, 0};
  CHECK_NOTHROW(t.validate());
}
