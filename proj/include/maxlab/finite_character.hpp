#pragma once

// Finite-character predicates as oracles on finite sets, the greedy maximal
// subset algorithm, the smallest-removal normal form, and the sequential
// gadget.  At finite scale every set is finite, so the oracle itself plays
// the role of the canonical-index form of the predicate.

#include <bit>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "maxlab/encoding.hpp"
#include "maxlab/errors.hpp"

namespace maxlab {

// A predicate on finite sets promised to be true of the empty set and closed
// under subsets.  Oracles must be pure; everything downstream assumes it.
struct FCPredicate {
  std::function<bool(const FiniteSet&)> eval;
  Nat universe_bound = 0;
  std::string description;  // free-form, used by the CLI round trip

  bool operator()(const FiniteSet& s) const { return eval(s); }
};

// Ready-made predicates covering the CLI mini-language.
inline FCPredicate fc_true(Nat universe_bound) {
  return {[](const FiniteSet&) { return true; }, universe_bound, "true"};
}

inline FCPredicate fc_pointwise(std::function<bool(Nat)> keep, Nat universe_bound,
                                std::string description) {
  return {[keep = std::move(keep)](const FiniteSet& s) {
            for (Nat x : s)
              if (!keep(x)) return false;
            return true;
          },
          universe_bound, std::move(description)};
}

inline FCPredicate fc_not_divisible(Nat divisor, Nat universe_bound) {
  return fc_pointwise([divisor](Nat x) { return x % divisor != 0; }, universe_bound,
                      "not-divisible " + std::to_string(divisor));
}

inline FCPredicate fc_divisible(Nat divisor, Nat universe_bound) {
  return fc_pointwise([divisor](Nat x) { return x % divisor == 0; }, universe_bound,
                      "divisible " + std::to_string(divisor));
}

inline FCPredicate fc_member_of(FiniteSet allowed, Nat universe_bound) {
  return fc_pointwise([allowed = std::move(allowed)](Nat x) { return allowed.contains(x); },
                      universe_bound, "member-of");
}

inline FCPredicate fc_max_size(std::size_t n, Nat universe_bound) {
  return {[n](const FiniteSet& s) { return s.size() <= n; }, universe_bound,
          "max-size " + std::to_string(n)};
}

inline FCPredicate fc_avoid(FiniteSet banned, Nat universe_bound) {
  return {[banned = std::move(banned)](const FiniteSet& s) {
            for (Nat x : s)
              if (banned.contains(x)) return false;
            return true;
          },
          universe_bound, "avoid"};
}

struct FCViolation {
  FiniteSet smaller;  // F
  FiniteSet larger;   // G with F subset G, eval(G) but not eval(F)
};

struct FCCheck {
  bool ok = true;
  std::optional<FCViolation> violation;
};

// Exhaustive finite-character check over the predicate's universe: eval must
// hold of the empty set, and removing a single element from a satisfying set
// must keep it satisfying (single removals generate full subset closure).
inline FCCheck check_finite_character(const FCPredicate& pred) {
  if (pred.universe_bound > 20)
    throw InputTooLarge("finite-character check is exhaustive; universe bound must be <= 20");
  FCCheck out;
  if (!pred(FiniteSet{})) {
    out.ok = false;
    out.violation = FCViolation{FiniteSet{}, FiniteSet{}};
    return out;
  }
  const std::uint32_t limit = std::uint32_t(1) << pred.universe_bound;
  for (std::uint32_t mask = 0; mask < limit; ++mask) {
    FiniteSet g = finset_decode(mask);
    if (!pred(g)) continue;
    for (Nat x : g) {
      FiniteSet f = g;
      f.erase(x);
      if (!pred(f)) {
        out.ok = false;
        out.violation = FCViolation{std::move(f), std::move(g)};
        return out;
      }
    }
  }
  return out;
}

// Scans A in increasing order, keeping each element whose addition preserves
// the predicate.  Because the predicate is subset-closed, a blocked element
// stays blocked, so the result is maximal among subsets of A satisfying it.
inline FiniteSet fcp_greedy_max(const FCPredicate& pred, const FiniteSet& a) {
  if (!a.empty() && a.max() >= pred.universe_bound)
    throw BadInput("set escapes the predicate universe");
  if (!check_finite_character(pred).ok)
    throw NotFiniteCharacter("predicate is not of finite character");
  FiniteSet kept;
  for (Nat x : a) {
    if (pred(kept.with(x))) kept.insert(x);
  }
  return kept;
}

struct MinimalRemoval {
  FiniteSet kept;     // B = A \ F
  FiniteSet removed;  // F
};

// Searches removal sets by cardinality (ties broken by least canonical
// index) for the smallest F with pred(A \ F); minimality of F makes the
// remainder maximal.
inline MinimalRemoval sigma1_minimal_removal(const FCPredicate& pred, const FiniteSet& a) {
  if (a.size() > 20) throw InputTooLarge("removal search is exhaustive; |A| must be <= 20");
  const auto& elems = a.values();
  const std::uint32_t limit = std::uint32_t(1) << elems.size();
  for (std::size_t size = 0; size <= elems.size(); ++size) {
    // Masks of one popcount in increasing value order = increasing canonical
    // index of the removal set, since elems is sorted.
    for (std::uint32_t mask = 0; mask < limit; ++mask) {
      if (static_cast<std::size_t>(std::popcount(mask)) != size) continue;
      FiniteSet removed;
      for (std::size_t i = 0; i < elems.size(); ++i)
        if (mask & (std::uint32_t(1) << i)) removed.insert(elems[i]);
      FiniteSet kept = a.minus(removed);
      if (pred(kept)) return {std::move(kept), std::move(removed)};
    }
  }
  throw NoMaximalSubset("no removal set yields a satisfying subset");
}

// B_i = {i} when i is in the range of f, empty otherwise.
inline std::vector<FiniteSet> sequential_gadget(const std::vector<Nat>& f, std::size_t count) {
  for (std::size_t a = 0; a < f.size(); ++a)
    for (std::size_t b = a + 1; b < f.size(); ++b)
      if (f[a] == f[b]) throw BadInput("sequential gadget prefix must be injective");
  std::vector<FiniteSet> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    for (Nat v : f)
      if (v == static_cast<Nat>(i)) out[i].insert(static_cast<Nat>(i));
  }
  return out;
}

}  // namespace maxlab
