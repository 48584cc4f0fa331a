#include "leapsgd/leap.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>

namespace leapsgd {

namespace {

// Indices of terms that participate in the leap (nonzero coefficient).
std::vector<int> active_terms(const SparsePolynomial& h) {
  std::vector<int> idx;
  for (int i = 0; i < static_cast<int>(h.terms.size()); ++i) {
    if (h.terms[i].second != 0.0) idx.push_back(i);
  }
  return idx;
}

void cover(std::vector<char>& covered, const Monomial& mono) {
  for (size_t i = 0; i < mono.exponents.size(); ++i) {
    if (mono.exponents[i] > 0) covered[i] = 1;
  }
}

std::vector<int> step_masses(const SparsePolynomial& h, const std::vector<int>& ordering) {
  std::vector<char> covered(h.latent_dim, 0);
  std::vector<int> masses;
  for (int idx : ordering) {
    const Monomial& mono = h.terms[idx].first;
    masses.push_back(mono.new_mass(h.basis, covered));
    cover(covered, mono);
  }
  return masses;
}

}  // namespace

std::optional<std::vector<int>> leap_feasible(const SparsePolynomial& h, int k) {
  std::vector<int> remaining = active_terms(h);
  if (remaining.empty()) throw std::invalid_argument("leap requires at least one term");
  std::vector<char> covered(h.latent_dim, 0);
  std::vector<int> ordering;
  while (!remaining.empty()) {
    bool placed = false;
    for (size_t pos = 0; pos < remaining.size(); ++pos) {
      int idx = remaining[pos];
      if (h.terms[idx].first.new_mass(h.basis, covered) <= k) {
        ordering.push_back(idx);
        cover(covered, h.terms[idx].first);
        remaining.erase(remaining.begin() + pos);
        placed = true;
        break;  // lowest term index first: deterministic witness
      }
    }
    if (!placed) return std::nullopt;
  }
  return ordering;
}

LeapResult leap(const SparsePolynomial& h) {
  std::vector<int> idx = active_terms(h);
  if (idx.empty()) throw std::invalid_argument("leap requires at least one term");
  // Candidate values: every per-step mass is some monomial's new mass w.r.t.
  // a covered set, bounded by its full mass; scanning the sorted set of full
  // masses (plus the minimum achievable) suffices since feasibility is
  // monotone in k.
  std::set<int> candidates;
  for (int i : idx) candidates.insert(h.terms[i].first.mass(h.basis));
  int lo = *candidates.begin();
  for (int k = 0; ; ++k) {
    if (k < lo && candidates.count(k) == 0) continue;
    if (auto ordering = leap_feasible(h, k)) {
      LeapResult res;
      res.leap = k;
      res.ordering = *ordering;
      res.per_step_new_mass = step_masses(h, res.ordering);
      return res;
    }
  }
}

LeapResult leap_bruteforce(const SparsePolynomial& h) {
  std::vector<int> idx = active_terms(h);
  if (idx.empty()) throw std::invalid_argument("leap requires at least one term");
  if (idx.size() > 9) throw std::invalid_argument("brute force limited to 9 terms");
  std::sort(idx.begin(), idx.end());
  LeapResult best;
  best.leap = -1;
  do {
    std::vector<int> masses = step_masses(h, idx);
    int worst = *std::max_element(masses.begin(), masses.end());
    if (best.leap < 0 || worst < best.leap) {
      best.leap = worst;
      best.ordering = idx;
      best.per_step_new_mass = std::move(masses);
    }
  } while (std::next_permutation(idx.begin(), idx.end()));
  return best;
}

}  // namespace leapsgd
