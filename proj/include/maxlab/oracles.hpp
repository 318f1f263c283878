#pragma once

// Brute-force verification oracles.  Everything here recomputes results from
// the definitions by plain enumeration, independently of the algorithmic
// paths it is used to check, and is shared by the test suites and the CLI
// verify subcommand.  Keep it slow and obvious.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "maxlab/closure_det.hpp"
#include "maxlab/closure_nondet.hpp"
#include "maxlab/constructions.hpp"
#include "maxlab/encoding.hpp"
#include "maxlab/families.hpp"
#include "maxlab/finite_character.hpp"
#include "maxlab/zorn.hpp"

namespace maxlab::oracle {

// ---------------------------------------------------------------------------
// Families
// ---------------------------------------------------------------------------

// Extensionally distinct member values picked by an index list.
inline std::vector<FiniteSet> distinct_values(const Family& fam,
                                              const std::vector<std::size_t>& indices) {
  std::vector<FiniteSet> out;
  for (std::size_t i : indices) {
    const auto& v = fam.member(i).elements;
    bool seen = false;
    for (const auto& u : out)
      if (u == v) {
        seen = true;
        break;
      }
    if (!seen) out.push_back(v);
  }
  return out;
}

namespace impl {

template <typename Check>
inline bool every_combination(const std::vector<FiniteSet>& values, std::size_t k,
                              Check check) {
  bool all = true;
  std::vector<std::size_t> comb;
  std::function<void(std::size_t)> rec = [&](std::size_t from) {
    if (!all) return;
    if (comb.size() == k) {
      FiniteSet joint = values[comb[0]];
      for (std::size_t i = 1; i < k; ++i) joint = joint.intersect(values[comb[i]]);
      if (!check(joint)) all = false;
      return;
    }
    for (std::size_t i = from; i < values.size(); ++i) {
      comb.push_back(i);
      rec(i + 1);
      comb.pop_back();
    }
  };
  if (k == 0 || k > values.size()) return true;
  rec(0);
  return all;
}

}  // namespace impl

// Property of a collection of distinct member values, straight from the
// definitions (vacuously true below the quantifier size).
inline bool values_have_property(const std::vector<FiniteSet>& values, PropertyTag p) {
  switch (p.kind) {
    case PropertyTag::Kind::Dn:
      return impl::every_combination(values, p.n,
                                     [](const FiniteSet& j) { return j.empty(); });
    case PropertyTag::Kind::DbarN:
      return impl::every_combination(values, p.n,
                                     [](const FiniteSet& j) { return !j.empty(); });
    case PropertyTag::Kind::F: {
      for (std::size_t m = 2; m <= values.size(); ++m)
        if (!impl::every_combination(values, m,
                                     [](const FiniteSet& j) { return !j.empty(); }))
          return false;
      return true;
    }
  }
  return false;
}

inline bool subfamily_has_property(const Family& fam, const SubfamilyIndex& sub,
                                   PropertyTag p) {
  return values_have_property(distinct_values(fam, sub.indices), p);
}

// Exhaustive maximality: no index subset whose distinct values properly
// contain the subfamily's values keeps the property.  Sound because all
// three properties are closed under subfamilies.
inline bool subfamily_is_maximal(const Family& fam, const SubfamilyIndex& sub,
                                 PropertyTag p) {
  const auto base = distinct_values(fam, sub.indices);
  if (!values_have_property(base, p)) return false;
  const std::size_t m = fam.member_count();
  if (m > 20) throw InputTooLarge("exhaustive subfamily oracle limited to 20 members");
  const std::uint32_t limit = std::uint32_t(1) << m;
  for (std::uint32_t mask = 0; mask < limit; ++mask) {
    std::vector<std::size_t> indices;
    for (std::size_t i = 0; i < m; ++i)
      if (mask & (std::uint32_t(1) << i)) indices.push_back(i);
    const auto values = distinct_values(fam, indices);
    bool contains_all = true;
    for (const auto& b : base) {
      bool found = false;
      for (const auto& v : values)
        if (v == b) {
          found = true;
          break;
        }
      if (!found) {
        contains_all = false;
        break;
      }
    }
    if (!contains_all || values.size() <= base.size()) continue;
    if (values_have_property(values, p)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Deterministic closure
// ---------------------------------------------------------------------------

// The level-set fixpoint: apply every rule in full passes until stable.
inline FiniteSet naive_cl(const DetClosureOp& op, const FiniteSet& start) {
  FiniteSet cur = start;
  while (true) {
    FiniteSet next = cur;
    for (const auto& rule : op.rules)
      if (rule.premise.subset_of(cur)) next.insert(rule.conclusion);
    if (next == cur) return cur;
    cur = std::move(next);
  }
}

inline bool det_closed(const DetClosureOp& op, const FiniteSet& x) {
  for (const auto& rule : op.rules)
    if (rule.premise.subset_of(x) && !x.contains(rule.conclusion)) return false;
  return true;
}

// Checks a claimed maximal closed extension against every superset in the
// ambient set.
inline bool ce_extension_is_maximal(const DetClosureOp& op, const FCPredicate& pred,
                                    const FiniteSet& ambient, const FiniteSet& seed,
                                    const FiniteSet& claimed) {
  if (!seed.subset_of(claimed) || !claimed.subset_of(ambient)) return false;
  if (!det_closed(op, claimed) || !pred(claimed)) return false;
  const auto& elems = ambient.values();
  if (elems.size() > 22) throw InputTooLarge("exhaustive closure oracle limited to 22 elements");
  const std::uint32_t limit = std::uint32_t(1) << elems.size();
  for (std::uint32_t mask = 0; mask < limit; ++mask) {
    FiniteSet s;
    for (std::size_t i = 0; i < elems.size(); ++i)
      if (mask & (std::uint32_t(1) << i)) s.insert(elems[i]);
    if (!claimed.subset_of(s) || s == claimed) continue;
    if (!seed.subset_of(s)) continue;
    if (det_closed(op, s) && pred(s)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Nondeterministic closure
// ---------------------------------------------------------------------------

inline bool n_closed(const NondetClosureOp& op, const FiniteSet& x) {
  for (const auto& rule : op.rules)
    if (rule.premise.subset_of(x) && rule.choices.intersect(x).empty()) return false;
  return true;
}

// All closed satisfying supersets of the seed inside the ambient set.
inline std::vector<FiniteSet> nce_closed_family(const NondetClosureOp& op,
                                                const FCPredicate& pred,
                                                const FiniteSet& ambient,
                                                const FiniteSet& seed) {
  const auto& elems = ambient.values();
  if (elems.size() > 22) throw InputTooLarge("exhaustive choice-rule oracle limited to 22 elements");
  std::vector<FiniteSet> out;
  const std::uint32_t limit = std::uint32_t(1) << elems.size();
  for (std::uint32_t mask = 0; mask < limit; ++mask) {
    FiniteSet s;
    for (std::size_t i = 0; i < elems.size(); ++i)
      if (mask & (std::uint32_t(1) << i)) s.insert(elems[i]);
    if (!seed.subset_of(s)) continue;
    if (n_closed(op, s) && pred(s)) out.push_back(std::move(s));
  }
  return out;
}

// The subset-enumeration answer the exact solver must agree with: a maximal
// element of the closed satisfying family, least canonical index among the
// maximal ones.
inline std::optional<FiniteSet> nce_best_maximal(const NondetClosureOp& op,
                                                 const FCPredicate& pred,
                                                 const FiniteSet& ambient,
                                                 const FiniteSet& seed) {
  auto family = nce_closed_family(op, pred, ambient, seed);
  std::optional<FiniteSet> best;
  for (const auto& s : family) {
    bool maximal = true;
    for (const auto& t : family)
      if (s != t && s.subset_of(t)) {
        maximal = false;
        break;
      }
    if (!maximal) continue;
    if (!best || FiniteSet::canonical_less(s, *best)) best = s;
  }
  return best;
}

// Minimal elements of the closed supersets of the base set.
inline std::vector<FiniteSet> minimal_nclosed_supersets(const NondetClosureOp& op,
                                                        const FiniteSet& base,
                                                        const FiniteSet& ambient) {
  FCPredicate always = fc_true(ambient.empty() ? 1 : ambient.max() + 1);
  auto family = nce_closed_family(op, always, ambient, base);
  std::vector<FiniteSet> out;
  for (const auto& s : family) {
    bool minimal = true;
    for (const auto& t : family)
      if (t != s && t.subset_of(s)) {
        minimal = false;
        break;
      }
    if (minimal) out.push_back(s);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trees and posets
// ---------------------------------------------------------------------------

// Indices of trees with a node at the truncation depth, by direct search.
inline FiniteSet tree_depth_reachability(const std::vector<TruncTree>& trees, Nat depth) {
  FiniteSet out;
  std::function<bool(const TruncTree::Node&, Nat)> reaches =
      [&](const TruncTree::Node& node, Nat remaining) -> bool {
    if (remaining == 0) return true;
    for (const auto& child : node.children)
      if (reaches(child, remaining - 1)) return true;
    return false;
  };
  for (std::size_t i = 0; i < trees.size(); ++i)
    if (trees[i].root && reaches(*trees[i].root, depth)) out.insert(static_cast<Nat>(i));
  return out;
}

inline bool is_ideal(const FinPoset& poset, const FiniteSet& x) {
  for (Nat a : x)
    for (std::size_t b = 0; b < poset.size(); ++b)
      if (poset.leq(b, static_cast<std::size_t>(a)) && !x.contains(static_cast<Nat>(b)))
        return false;
  for (Nat a : x)
    for (Nat b : x) {
      bool bounded = false;
      for (std::size_t r = 0; r < poset.size(); ++r)
        if (poset.leq(static_cast<std::size_t>(a), r) &&
            poset.leq(static_cast<std::size_t>(b), r) && x.contains(static_cast<Nat>(r))) {
          bounded = true;
          break;
        }
      if (!bounded) return false;
    }
  return true;
}

inline std::vector<FiniteSet> all_ideals(const FinPoset& poset) {
  if (poset.size() > 20) throw InputTooLarge("ideal enumeration limited to 20 elements");
  std::vector<FiniteSet> out;
  const std::uint32_t limit = std::uint32_t(1) << poset.size();
  for (std::uint32_t mask = 0; mask < limit; ++mask) {
    FiniteSet s = finset_decode(mask);
    if (is_ideal(poset, s)) out.push_back(std::move(s));
  }
  return out;
}

inline std::vector<FiniteSet> maximal_ideals(const FinPoset& poset) {
  auto ideals = all_ideals(poset);
  std::vector<FiniteSet> out;
  for (const auto& s : ideals) {
    bool maximal = true;
    for (const auto& t : ideals)
      if (s != t && s.subset_of(t)) {
        maximal = false;
        break;
      }
    if (maximal) out.push_back(s);
  }
  return out;
}

// Independent maximal-element scan for checking the chain climb.
inline std::vector<std::size_t> poset_maximals(const FinPoset& pos) {
  std::vector<std::size_t> out;
  for (std::size_t p = 0; p < pos.size(); ++p) {
    bool below_something = false;
    for (std::size_t q = 0; q < pos.size(); ++q)
      if (q != p && pos.leq(p, q)) below_something = true;
    if (!below_something) out.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// FCP
// ---------------------------------------------------------------------------

inline bool fcp_subset_is_maximal(const FCPredicate& pred, const FiniteSet& a,
                                  const FiniteSet& claimed) {
  if (!claimed.subset_of(a) || !pred(claimed)) return false;
  const auto& elems = a.values();
  if (elems.size() > 22) throw InputTooLarge("exhaustive subset oracle limited to 22 elements");
  const std::uint32_t limit = std::uint32_t(1) << elems.size();
  for (std::uint32_t mask = 0; mask < limit; ++mask) {
    FiniteSet s;
    for (std::size_t i = 0; i < elems.size(); ++i)
      if (mask & (std::uint32_t(1) << i)) s.insert(elems[i]);
    if (!claimed.subset_of(s) || s == claimed) continue;
    if (pred(s)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Constructions
// ---------------------------------------------------------------------------

// The witness-bound function: the least y such that every jointly
// intersecting index set drawn from {0..s} has a witness at or below y.
inline Nat witness_bound(const Family& fam, Nat s) {
  const std::size_t top = std::min<std::size_t>(fam.member_count(),
                                                static_cast<std::size_t>(s) + 1);
  if (top > 20) throw InputTooLarge("witness-bound oracle limited to 20 members");
  Nat bound = 0;
  const std::uint32_t limit = std::uint32_t(1) << top;
  for (std::uint32_t mask = 1; mask < limit; ++mask) {
    FiniteSet joint;
    bool first = true;
    for (std::size_t i = 0; i < top; ++i)
      if (mask & (std::uint32_t(1) << i)) {
        joint = first ? fam.member(i).elements : joint.intersect(fam.member(i).elements);
        first = false;
      }
    if (!joint.empty()) bound = std::max(bound, joint.min());
  }
  return bound;
}

struct InvariantReport {
  bool ok = true;
  std::string failure;

  void fail(const std::string& what) {
    if (ok) {
      ok = false;
      failure = what;
    }
  }
};

// Transcript-level invariants of the adversary construction.
inline InvariantReport check_adversary_invariants(const AdversaryResult& result) {
  InvariantReport report;
  Nat last_fresh = 0;
  bool any_fresh = false;
  std::map<Nat, Nat> next_follower;
  std::map<Nat, int> redefinitions;
  for (const auto& ev : result.transcript.events) {
    switch (ev.kind) {
      case AdvEventKind::TargetDefined:
      case AdvEventKind::TargetRedefined:
      case AdvEventKind::FollowerBorn: {
        if (any_fresh && ev.value <= last_fresh) report.fail("fresh numbers must increase");
        last_fresh = ev.value;
        any_fresh = true;
        if (ev.kind == AdvEventKind::FollowerBorn) {
          if (ev.n != next_follower[ev.e]) report.fail("followers born out of order");
          next_follower[ev.e] = ev.n + 1;
        }
        if (ev.kind == AdvEventKind::TargetRedefined) {
          if (++redefinitions[ev.e] > 1) report.fail("target redefined more than once");
        }
        break;
      }
      case AdvEventKind::Intersected: {
        if (any_fresh && ev.witness <= last_fresh) report.fail("fresh numbers must increase");
        last_fresh = ev.witness;
        any_fresh = true;
        if (ev.step != 2 && ev.step != 3 && ev.step != 4)
          report.fail("intersection outside steps 2-4");
        break;
      }
      default:
        break;
    }
  }
  // Evens law on the produced family.
  for (std::size_t i = 0; i < result.family.member_count(); ++i) {
    for (Nat x : result.family.member(i).elements)
      if (x % 2 == 0 && x != 2 * static_cast<Nat>(i))
        report.fail("member holds a foreign even tag");
    if (!result.family.member(i).elements.contains(2 * static_cast<Nat>(i)))
      report.fail("member misses its own even tag");
  }
  return report;
}

// History-level invariants of the permitting construction: the pinned copy,
// the permission law at every transition, and joint intersection of every
// approximation.  Removals need a permission (an enumeration change below
// the removed code); additions are settled by monotone growth instead, since
// every fresh copy clears everything present before it.
inline InvariantReport check_permitting_invariants(const Family& fam,
                                                   const StagedEnumeration& w,
                                                   const PermitResult& result) {
  InvariantReport report;
  Nat high_water = 0;
  for (std::size_t s = 0; s + 1 < result.history.size(); ++s) {
    const auto& cur = result.history[s].codes;
    const auto& nxt = result.history[s + 1].codes;
    const FiniteSet w_new =
        w.at_stage(static_cast<Nat>(s) + 1).minus(w.at_stage(static_cast<Nat>(s)));
    FiniteSet cur_set(cur), nxt_set(nxt);
    for (Nat c : cur) high_water = std::max(high_water, c);
    for (Nat m : cur_set.minus(nxt_set)) {
      bool changed_below = false;
      for (Nat wn : w_new)
        if (wn < m) {
          changed_below = true;
          break;
        }
      if (!changed_below) report.fail("removal without a permission");
    }
    for (Nat m : nxt_set.minus(cur_set)) {
      if (m <= high_water) report.fail("fresh copy below the high-water mark");
    }
  }
  for (const auto& st : result.history) {
    FiniteSet codes(st.codes);
    if (!codes.contains(0)) report.fail("the pinned copy <0,0> disappeared");
    FiniteSet joint;
    bool first = true;
    for (Nat code : st.codes) {
      const auto [i, n] = unpair(code);
      if (i >= fam.member_count()) {
        report.fail("copy of an index beyond the truncation");
        continue;
      }
      joint = first ? fam.member(static_cast<std::size_t>(i)).elements
                    : joint.intersect(fam.member(static_cast<std::size_t>(i)).elements);
      first = false;
    }
    if (!first && joint.empty()) report.fail("approximation lost its joint witness");
  }
  return report;
}

}  // namespace maxlab::oracle
