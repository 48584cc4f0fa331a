#include <algorithm>
#include <string>
#include <vector>

#include "doctest.h"
#include "leapsgd/leap.hpp"
#include "leapsgd/rng.hpp"

using namespace leapsgd;

namespace {

int leap_of(const std::string& s) { return leap(parse_target(s)).leap; }

SparsePolynomial random_target(Rng& rng) {
  SparsePolynomial h;
  h.basis = rng.uniform() < 0.5 ? BasisKind::Boolean : BasisKind::Gaussian;
  h.latent_dim = 3 + static_cast<int>(rng.uniform_int(5));
  const int m = 1 + static_cast<int>(rng.uniform_int(7));
  const int max_exp = h.basis == BasisKind::Boolean ? 1 : 3;
  for (int t = 0; t < m; ++t) {
    for (int attempt = 0; attempt < 100; ++attempt) {
      Monomial mono;
      mono.exponents.assign(h.latent_dim, 0);
      bool nonzero = false;
      for (int i = 0; i < h.latent_dim; ++i) {
        if (rng.uniform() < 0.4) {
          mono.exponents[i] = 1 + static_cast<int>(rng.uniform_int(max_exp));
          nonzero = true;
        }
      }
      if (!nonzero) continue;
      bool dup = false;
      for (const auto& [existing, c] : h.terms) dup = dup || existing == mono;
      if (dup) continue;
      h.terms.push_back({mono, 1.0 + rng.uniform()});
      break;
    }
  }
  if (h.terms.empty()) {
    Monomial mono;
    mono.exponents.assign(h.latent_dim, 0);
    mono.exponents[0] = 1;
    h.terms.push_back({mono, 1.0});
  }
  return h;
}

}  // namespace

TEST_CASE("boolean reference values") {
  CHECK(leap_of("bool: z1 + z1*z2 + z1*z2*z3 + z1*z2*z3*z4") == 1);
  CHECK(leap_of("bool: z1 + z2 + z2*z3*z4") == 2);
  CHECK(leap_of("bool: z1 + z1*z2*z3 + z2*z3*z4*z5*z6*z7") == 4);
  CHECK(leap_of("bool: z1*z2*z3 + z2*z3*z4") == 3);
}

TEST_CASE("gaussian reference values") {
  for (int k = 1; k <= 6; ++k) {
    CHECK(leap_of("gauss: He" + std::to_string(k) + "(z1)") == k);
    // Multilinear monomial on k coordinates also has leap k.
    std::string s = "gauss: He1(z1)";
    for (int i = 2; i <= k; ++i) s += "*He1(z" + std::to_string(i) + ")";
    CHECK(leap_of(s) == k);
  }
  CHECK(leap_of("gauss: He2(z1) + He2(z2) + He2(z3) + He3(z1)*He8(z3)") == 2);
}

TEST_CASE("gaussian staircase has leap max(k1, k2, k3)") {
  for (int k1 : {1, 2, 4}) {
    for (int k2 : {1, 3}) {
      for (int k3 : {2, 5}) {
        std::string s = "gauss: He" + std::to_string(k1) + "(z1) + He" + std::to_string(k1) +
                        "(z1)*He" + std::to_string(k2) + "(z2) + He" + std::to_string(k1) +
                        "(z1)*He" + std::to_string(k2) + "(z2)*He" + std::to_string(k3) + "(z3)";
        CHECK(leap_of(s) == std::max({k1, k2, k3}));
      }
    }
  }
}

TEST_CASE("leap_feasible reference cases") {
  CHECK_FALSE(leap_feasible(parse_target("bool: z1 + z1*z2*z3"), 1).has_value());
  auto ord = leap_feasible(parse_target("bool: z1 + z1*z2"), 1);
  REQUIRE(ord.has_value());
  CHECK(*ord == std::vector<int>{0, 1});
  // He_2(z1) first gives per-step masses (2, 8); reversed would be (11, 0).
  auto g = leap_feasible(parse_target("gauss: He2(z1) + He3(z1)*He8(z3)"), 8);
  REQUIRE(g.has_value());
  CHECK(g->front() == 0);
}

TEST_CASE("single monomial leap equals its full mass") {
  CHECK(leap_of("bool: z2*z4*z5") == 3);
  CHECK(leap_of("gauss: He2(z1)*He3(z4)") == 5);
}

TEST_CASE("witness ordering is consistent with the reported leap") {
  for (const char* s : {"bool: z1 + z2 + z2*z3*z4", "gauss: He2(z1) + He2(z1)*He2(z2)",
                        "bool: z1*z2*z3 + z2*z3*z4"}) {
    LeapResult res = leap(parse_target(s));
    REQUIRE(res.ordering.size() == res.per_step_new_mass.size());
    CHECK(res.leap == *std::max_element(res.per_step_new_mass.begin(),
                                        res.per_step_new_mass.end()));
    std::vector<int> sorted = res.ordering;
    std::sort(sorted.begin(), sorted.end());
    for (size_t i = 0; i < sorted.size(); ++i) CHECK(sorted[i] == static_cast<int>(i));
  }
}

TEST_CASE("leap is invariant under coordinate and term permutations") {
  Rng rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    SparsePolynomial h = random_target(rng);
    int base = leap(h).leap;

    SparsePolynomial shuffled_terms = h;
    for (size_t i = shuffled_terms.terms.size(); i > 1; --i)
      std::swap(shuffled_terms.terms[i - 1], shuffled_terms.terms[rng.uniform_int(i)]);
    CHECK(leap(shuffled_terms).leap == base);

    std::vector<int> perm(h.latent_dim);
    for (int i = 0; i < h.latent_dim; ++i) perm[i] = i;
    for (size_t i = perm.size(); i > 1; --i)
      std::swap(perm[i - 1], perm[rng.uniform_int(i)]);
    SparsePolynomial relabeled = h;
    for (auto& [mono, c] : relabeled.terms) {
      Monomial moved;
      moved.exponents.assign(h.latent_dim, 0);
      for (int i = 0; i < h.latent_dim; ++i) moved.exponents[perm[i]] = mono.exponents[i];
      mono = moved;
    }
    CHECK(leap(relabeled).leap == base);
  }
}

TEST_CASE("leap lies between the min and max term mass") {
  Rng rng(78);
  for (int trial = 0; trial < 50; ++trial) {
    SparsePolynomial h = random_target(rng);
    int lo = 1 << 30, hi = 0;
    for (const auto& [mono, c] : h.terms) {
      lo = std::min(lo, mono.mass(h.basis));
      hi = std::max(hi, mono.mass(h.basis));
    }
    int l = leap(h).leap;
    CHECK(l >= lo);  // the first placed monomial contributes its full mass
    CHECK(l <= hi);
    CHECK(l >= 1);
  }
}

TEST_CASE("greedy leap matches factorial brute force on a random corpus") {
  Rng rng(79);
  for (int trial = 0; trial < 200; ++trial) {
    SparsePolynomial h = random_target(rng);
    CHECK(leap(h).leap == leap_bruteforce(h).leap);
  }
}

TEST_CASE("zero-coefficient and constant terms are ignored") {
  SparsePolynomial h = parse_target("bool: z1 + z2*z3*z4");
  h.constant = 5.0;
  h.terms[1].second = 0.0;  // kill the heavy term
  CHECK(leap(h).leap == 1);
}
