#pragma once

// Finite-horizon set families and their intersection properties: the greedy
// maximal-subfamily construction, the staged odd-number transform, and the
// range-coding family with its decoders.
//
// Horizon semantics: every membership fact is settled strictly below the
// family's shared horizon, so "nonempty intersection" always means a witness
// below the horizon and verdicts are exact for the truncated objects.

#include <bit>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "maxlab/encoding.hpp"
#include "maxlab/errors.hpp"

namespace maxlab {

// One member of a family, truncated at a horizon.
struct BoundedSet {
  FiniteSet elements;
  Nat horizon = 0;

  BoundedSet() = default;
  BoundedSet(FiniteSet elems, Nat hor) : elements(std::move(elems)), horizon(hor) {
    if (!elements.empty() && elements.max() >= horizon)
      throw BadInput("bounded set has an element at or above its horizon");
  }

  bool is_singleton() const { return elements.size() == 1; }
};

// An indexed sequence of bounded sets sharing one horizon.
class Family {
 public:
  Family() = default;

  Family(std::vector<FiniteSet> members, Nat horizon) : horizon_(horizon) {
    members_.reserve(members.size());
    for (auto& m : members) members_.emplace_back(std::move(m), horizon);
  }

  std::size_t member_count() const { return members_.size(); }
  Nat horizon() const { return horizon_; }

  const BoundedSet& member(std::size_t i) const {
    if (i >= members_.size()) throw BadIndex("family member index out of range");
    return members_[i];
  }

  const std::vector<BoundedSet>& members() const { return members_; }

  bool nontrivial() const {
    for (const auto& m : members_)
      if (!m.elements.empty()) return true;
    return false;
  }

 private:
  std::vector<BoundedSet> members_;
  Nat horizon_ = 0;
};

// An index map J picking the subfamily <A_{J(i)}>.  Repeated indices are
// allowed; the subfamily they define is the same up to extensional equality.
struct SubfamilyIndex {
  std::vector<std::size_t> indices;

  bool operator==(const SubfamilyIndex&) const = default;
};

// Which intersection property is being checked: D_n (any n distinct members
// have empty intersection), Dbar_n (nonempty), or F (nonempty for every
// finite count >= 2).
struct PropertyTag {
  enum class Kind { Dn, DbarN, F };

  Kind kind = Kind::F;
  unsigned n = 2;  // meaningful for Dn / DbarN only

  static PropertyTag dn(unsigned n) {
    if (n < 2) throw BadInput("intersection properties need n >= 2");
    return {Kind::Dn, n};
  }
  static PropertyTag dbar(unsigned n) {
    if (n < 2) throw BadInput("intersection properties need n >= 2");
    return {Kind::DbarN, n};
  }
  static PropertyTag f() { return {Kind::F, 2}; }

  bool operator==(const PropertyTag&) const = default;
};

struct PropertyVerdict {
  enum class Kind { Holds, Vacuous, Fails };

  Kind kind = Kind::Holds;
  // For Fails: member indices of a distinct tuple violating the property.
  std::vector<std::size_t> witness_members;
  // For Dn failures, a common element; for DbarN/F holds, the least element
  // of the full intersection of the distinct members when there is one.
  std::optional<Nat> witness_element;

  bool ok() const { return kind != Kind::Fails; }
};

inline bool sets_distinct(const Family& fam, std::size_t i, std::size_t j) {
  return fam.member(i).elements != fam.member(j).elements;
}

namespace detail {

// Representative indices of the extensionally distinct members named by sub,
// in first-appearance order.
inline std::vector<std::size_t> distinct_reps(const Family& fam,
                                              const SubfamilyIndex& sub) {
  std::vector<std::size_t> reps;
  for (std::size_t idx : sub.indices) {
    if (idx >= fam.member_count())
      throw BadIndex("subfamily index out of range");
    bool seen = false;
    for (std::size_t r : reps)
      if (fam.member(r).elements == fam.member(idx).elements) {
        seen = true;
        break;
      }
    if (!seen) reps.push_back(idx);
  }
  return reps;
}

// First k-tuple of reps whose joint intersection satisfies bad, if any.
template <typename Pred>
inline std::optional<std::vector<std::size_t>> find_tuple(
    const Family& fam, const std::vector<std::size_t>& reps, std::size_t k,
    Pred bad) {
  std::optional<std::vector<std::size_t>> found;
  for_each_combination(reps.size(), k, [&](const std::vector<std::size_t>& comb) {
    FiniteSet joint = fam.member(reps[comb[0]]).elements;
    for (std::size_t i = 1; i < k; ++i)
      joint = joint.intersect(fam.member(reps[comb[i]]).elements);
    if (bad(joint)) {
      std::vector<std::size_t> out;
      for (std::size_t c : comb) out.push_back(reps[c]);
      found = std::move(out);
      return true;
    }
    return false;
  });
  return found;
}

}  // namespace detail

// Checks the property of the subfamily defined by sub.  Vacuous means fewer
// distinct members exist than the property quantifies over.
inline PropertyVerdict has_property(const Family& fam, const SubfamilyIndex& sub,
                                    PropertyTag p) {
  const auto reps = detail::distinct_reps(fam, sub);
  PropertyVerdict v;

  const auto empty_joint = [](const FiniteSet& s) { return s.empty(); };
  const auto nonempty_joint = [](const FiniteSet& s) { return !s.empty(); };

  switch (p.kind) {
    case PropertyTag::Kind::Dn: {
      if (reps.size() < p.n) {
        v.kind = PropertyVerdict::Kind::Vacuous;
        return v;
      }
      if (auto bad = detail::find_tuple(fam, reps, p.n, nonempty_joint)) {
        v.kind = PropertyVerdict::Kind::Fails;
        v.witness_members = *bad;
        FiniteSet joint = fam.member((*bad)[0]).elements;
        for (std::size_t i = 1; i < bad->size(); ++i)
          joint = joint.intersect(fam.member((*bad)[i]).elements);
        v.witness_element = joint.min();
        return v;
      }
      v.kind = PropertyVerdict::Kind::Holds;
      return v;
    }
    case PropertyTag::Kind::DbarN: {
      if (reps.size() < p.n) {
        v.kind = PropertyVerdict::Kind::Vacuous;
        return v;
      }
      if (auto bad = detail::find_tuple(fam, reps, p.n, empty_joint)) {
        v.kind = PropertyVerdict::Kind::Fails;
        v.witness_members = *bad;
        return v;
      }
      v.kind = PropertyVerdict::Kind::Holds;
      break;
    }
    case PropertyTag::Kind::F: {
      if (reps.size() < 2) {
        v.kind = PropertyVerdict::Kind::Vacuous;
        return v;
      }
      // Search failures smallest-first so the witness tuple is minimal.
      for (std::size_t m = 2; m <= reps.size(); ++m) {
        if (auto bad = detail::find_tuple(fam, reps, m, empty_joint)) {
          v.kind = PropertyVerdict::Kind::Fails;
          v.witness_members = *bad;
          return v;
        }
      }
      v.kind = PropertyVerdict::Kind::Holds;
      break;
    }
  }
  // Holds for DbarN/F: report the least common witness of all distinct
  // members when the total intersection is nonempty.
  FiniteSet joint = fam.member(reps[0]).elements;
  for (std::size_t i = 1; i < reps.size(); ++i)
    joint = joint.intersect(fam.member(reps[i]).elements);
  if (!joint.empty()) v.witness_element = joint.min();
  return v;
}

struct GreedyResult {
  SubfamilyIndex sub;
  bool exhausted = true;
};

// The least-index greedy: p(0) is the least j >= start such that <A_j> has
// the property, and p(i+1) the least j > p(i) that keeps it.  Members
// extensionally equal to an already-picked one never extend the subfamily,
// so they are skipped.
inline GreedyResult greedy_max_subfamily(const Family& fam, PropertyTag p,
                                         std::size_t start = 0) {
  GreedyResult out;
  const std::size_t m = fam.member_count();
  for (std::size_t j = start; j < m; ++j) {
    bool duplicate = false;
    for (std::size_t picked : out.sub.indices)
      if (!sets_distinct(fam, picked, j)) {
        duplicate = true;
        break;
      }
    if (duplicate) continue;
    SubfamilyIndex candidate = out.sub;
    candidate.indices.push_back(j);
    if (has_property(fam, candidate, p).ok()) out.sub = std::move(candidate);
  }
  if (out.sub.indices.empty())
    throw EmptyResult("no member qualifies for the greedy seed");
  out.exhausted = true;  // the finite index range is always scanned fully
  return out;
}

struct MaximalityVerdict {
  bool maximal = true;
  std::optional<std::size_t> extendable_by;
};

// Exact single-addition maximality test: valid because all three properties
// are closed under subfamilies, so a blocked single addition stays blocked.
inline MaximalityVerdict is_maximal(const Family& fam, const SubfamilyIndex& sub,
                                    PropertyTag p) {
  if (!has_property(fam, sub, p).ok())
    throw NotAProperty("subfamily does not have the property");
  for (std::size_t k = 0; k < fam.member_count(); ++k) {
    bool present = false;
    for (std::size_t idx : sub.indices)
      if (!sets_distinct(fam, idx, k)) {
        present = true;
        break;
      }
    if (present) continue;
    SubfamilyIndex extended = sub;
    extended.indices.push_back(k);
    if (has_property(fam, extended, p).ok())
      return {false, k};
  }
  return {true, std::nullopt};
}

// Staged transform feeding the F-property solver: even tags identify members,
// and every qualifying set F of n+1 or more indices whose n-subsets all
// intersect below the stage gets one fresh shared odd number.  Fresh odds
// increase monotonically, so odd numbers never collide across stages.
inline Family tilde_transform(const Family& fam, unsigned n, Nat stages) {
  if (n < 2) throw BadInput("tilde transform needs n >= 2");
  const std::size_t m = fam.member_count();
  std::vector<FiniteSet> out(m);
  Nat max_elem = 0;
  for (std::size_t i = 0; i < m; ++i) {
    out[i].insert(2 * static_cast<Nat>(i));
    max_elem = std::max(max_elem, 2 * static_cast<Nat>(i));
  }
  Nat next_odd = 1;
  for (Nat s = 0; s < stages; ++s) {
    // Candidate index sets F subset {0..s} with |F| >= n+1 whose n-subsets
    // all intersect with a witness <= s, listed in canonical-index order.
    const std::size_t top = std::min<std::size_t>(m, static_cast<std::size_t>(s) + 1);
    if (top == 0) continue;
    std::vector<std::vector<std::size_t>> firing;
    const std::uint32_t limit = std::uint32_t(1) << top;
    for (std::uint32_t mask = 0; mask < limit; ++mask) {
      if (static_cast<unsigned>(std::popcount(mask)) < n + 1) continue;
      std::vector<std::size_t> f;
      for (std::size_t i = 0; i < top; ++i)
        if (mask & (std::uint32_t(1) << i)) f.push_back(i);
      const bool some_n_subset_misses = detail::for_each_combination(
          f.size(), n, [&](const std::vector<std::size_t>& comb) {
            FiniteSet joint = fam.member(f[comb[0]]).elements;
            for (std::size_t i = 1; i < n; ++i)
              joint = joint.intersect(fam.member(f[comb[i]]).elements);
            for (Nat x : joint)
              if (x <= s) return false;  // witnessed below the stage
            return true;
          });
      if (!some_n_subset_misses) firing.push_back(std::move(f));
    }
    for (const auto& f : firing) {
      const Nat odd = next_odd;
      next_odd += 2;
      max_elem = std::max(max_elem, odd);
      for (std::size_t i : f) out[i].insert(odd);
    }
  }
  return Family(std::move(out), max_elem + 1);
}

// The range-coding family: A_i = {2i} union {2x+1 : exists y <= x, f(y) = i},
// truncated to the horizon.  A_i is a singleton exactly when i is outside
// the range of f.
inline Family range_coding_family(const std::vector<Nat>& f, std::size_t member_count,
                                  Nat horizon) {
  for (std::size_t a = 0; a < f.size(); ++a)
    for (std::size_t b = a + 1; b < f.size(); ++b)
      if (f[a] == f[b]) throw BadInput("range-coding prefix must be injective");
  std::vector<FiniteSet> members(member_count);
  for (std::size_t i = 0; i < member_count; ++i) {
    if (2 * static_cast<Nat>(i) < horizon) members[i].insert(2 * static_cast<Nat>(i));
    // least y with f(y) = i, if any
    std::optional<std::size_t> pos;
    for (std::size_t y = 0; y < f.size(); ++y)
      if (f[y] == i) {
        pos = y;
        break;
      }
    if (pos) {
      for (Nat x = *pos; 2 * x + 1 < horizon; ++x) members[i].insert(2 * x + 1);
    }
  }
  return Family(std::move(members), horizon);
}

struct RangeDecode {
  FiniteSet decoded;
  // For D_n only: indices of non-singleton members the maximal subfamily kept
  // (at most n-1 of them by maximality).
  FiniteSet exceptions;
};

// Reads the range of the coding function back off a maximal subfamily.  For
// F / Dbar_n the decoded set is {i : 2i in some member}; that argument
// presupposes no member is a singleton, which we surface as an error instead
// of guessing.  For D_n the complement rule applies, with the kept
// non-singleton members reported as exceptions.
inline RangeDecode decode_range(const Family& fam, const SubfamilyIndex& sub,
                                PropertyTag p) {
  RangeDecode out;
  const auto reps = detail::distinct_reps(fam, sub);
  if (p.kind == PropertyTag::Kind::F || p.kind == PropertyTag::Kind::DbarN) {
    for (std::size_t r : reps) {
      const auto& elems = fam.member(r).elements;
      if (elems.size() <= 1)
        throw DegenerateMaximalFamily(
            "maximal subfamily contains a singleton member; the range decode "
            "presupposes non-singletons");
      for (Nat x : elems)
        if (x % 2 == 0) out.decoded.insert(x / 2);
    }
    return out;
  }
  // D_n: tags present in the subfamily.
  FiniteSet tagged;
  for (std::size_t r : reps) {
    for (Nat x : fam.member(r).elements)
      if (x % 2 == 0) tagged.insert(x / 2);
    if (fam.member(r).elements.size() > 1) {
      for (Nat x : fam.member(r).elements)
        if (x % 2 == 0) out.exceptions.insert(x / 2);
    }
  }
  for (std::size_t i = 0; i < fam.member_count(); ++i)
    if (!tagged.contains(static_cast<Nat>(i))) out.decoded.insert(static_cast<Nat>(i));
  return out;
}

}  // namespace maxlab
