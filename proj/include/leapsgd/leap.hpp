#pragma once

#include <optional>
#include <vector>

#include "leapsgd/polynomial.hpp"

namespace leapsgd {

struct LeapResult {
  int leap = 0;
  std::vector<int> ordering;           // permutation of term indices
  std::vector<int> per_step_new_mass;  // new mass introduced at each step
};

// Greedy feasibility check: is there an ordering in which every step
// introduces at most k new mass? Greedy (always place any monomial whose new
// mass w.r.t. the covered set is <= k, lowest index first) is exact because
// covering more coordinates never increases any remaining monomial's new
// mass. Constant and zero-coefficient terms are ignored.
std::optional<std::vector<int>> leap_feasible(const SparsePolynomial& h, int k);

// Minimal k with a feasible ordering, with witness. Requires >= 1 term.
LeapResult leap(const SparsePolynomial& h);

// Exhaustive minimum over all orderings; factorial cost, for cross-checks.
LeapResult leap_bruteforce(const SparsePolynomial& h);

}  // namespace leapsgd
