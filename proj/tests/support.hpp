#pragma once

// Shared deterministic generators for the test suites.  All randomness is
// seeded explicitly so every run sees the same corpus.

#include <random>
#include <vector>

#include "maxlab/maxlab.hpp"

namespace testsupport {

using maxlab::Family;
using maxlab::FiniteSet;
using maxlab::Nat;

inline Family random_family(std::mt19937& rng, std::size_t max_members, Nat max_horizon) {
  std::uniform_int_distribution<std::size_t> member_dist(1, max_members);
  std::uniform_int_distribution<Nat> horizon_dist(4, max_horizon);
  const std::size_t members = member_dist(rng);
  const Nat horizon = horizon_dist(rng);
  std::uniform_int_distribution<int> density(0, 3);
  std::vector<FiniteSet> sets(members);
  for (auto& s : sets) {
    const int keep_under = density(rng);  // 0: sparse .. 3: dense
    for (Nat x = 0; x < horizon; ++x)
      if (static_cast<int>(rng() % 4) <= keep_under - 1) s.insert(x);
  }
  bool nontrivial = false;
  for (const auto& s : sets)
    if (!s.empty()) nontrivial = true;
  if (!nontrivial) sets[0].insert(rng() % horizon);
  return Family(std::move(sets), horizon);
}

inline FiniteSet random_subset(std::mt19937& rng, const FiniteSet& of, double keep = 0.5) {
  FiniteSet out;
  for (Nat x : of)
    if (std::uniform_real_distribution<double>(0, 1)(rng) < keep) out.insert(x);
  return out;
}

inline maxlab::DetClosureOp random_det_op(std::mt19937& rng, std::size_t max_rules,
                                          Nat universe) {
  maxlab::DetClosureOp op;
  std::uniform_int_distribution<std::size_t> rule_dist(0, max_rules);
  const std::size_t rules = rule_dist(rng);
  for (std::size_t r = 0; r < rules; ++r) {
    FiniteSet premise;
    const std::size_t len = rng() % 3;
    for (std::size_t i = 0; i < len; ++i) premise.insert(rng() % universe);
    op.rules.push_back({std::move(premise), rng() % universe});
  }
  return op;
}

inline maxlab::NondetClosureOp random_nondet_op(std::mt19937& rng, std::size_t max_rules,
                                                Nat universe) {
  maxlab::NondetClosureOp op;
  std::uniform_int_distribution<std::size_t> rule_dist(0, max_rules);
  const std::size_t rules = rule_dist(rng);
  for (std::size_t r = 0; r < rules; ++r) {
    FiniteSet premise;
    const std::size_t plen = rng() % 3;
    for (std::size_t i = 0; i < plen; ++i) premise.insert(rng() % universe);
    FiniteSet choices;
    const std::size_t clen = 1 + rng() % 3;
    for (std::size_t i = 0; i < clen; ++i) choices.insert(rng() % universe);
    op.rules.push_back({std::move(premise), std::move(choices)});
  }
  return op;
}

// A random predicate from the same stock the CLI mini-language offers.
inline maxlab::FCPredicate random_fc_pred(std::mt19937& rng, Nat universe) {
  switch (rng() % 4) {
    case 0:
      return maxlab::fc_true(universe);
    case 1:
      return maxlab::fc_not_divisible(2 + rng() % 3, universe);
    case 2:
      return maxlab::fc_max_size(1 + rng() % 6, universe);
    default: {
      FiniteSet banned;
      const std::size_t len = rng() % 3;
      for (std::size_t i = 0; i < len; ++i) banned.insert(rng() % universe);
      return maxlab::fc_avoid(std::move(banned), universe);
    }
  }
}

inline maxlab::FinPoset random_poset(std::mt19937& rng, std::size_t max_size) {
  const std::size_t size = 1 + rng() % max_size;
  // Random strict edges i -> j for i < j, then transitive closure: always a
  // partial order.
  std::vector<std::vector<bool>> lt(size, std::vector<bool>(size, false));
  for (std::size_t i = 0; i < size; ++i)
    for (std::size_t j = i + 1; j < size; ++j)
      if (rng() % 3 == 0) lt[i][j] = true;
  for (std::size_t k = 0; k < size; ++k)
    for (std::size_t i = 0; i < size; ++i)
      for (std::size_t j = 0; j < size; ++j)
        if (lt[i][k] && lt[k][j]) lt[i][j] = true;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < size; ++i)
    for (std::size_t j = 0; j < size; ++j)
      if (lt[i][j]) pairs.emplace_back(i, j);
  return maxlab::FinPoset(size, pairs);
}

}  // namespace testsupport
