#pragma once

// Nondeterministic finitary closure operators: choice rules <F, S>, exact and
// greedy maximal-closed-extension solvers, the poset-ideal encoding, and the
// tree encoding with path decoding.
//
// Maximality under choice rules is not decided by single additions, because
// closedness is not downward closed.  The exact solver therefore checks true
// superset-maximality by enumeration; the greedy solver guarantees the weaker
// single-addition form (which coincides with the exact notion on the
// singleton-premise operators produced by the encodings here).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <unordered_set>
#include <utility>
#include <vector>

#include "maxlab/encoding.hpp"
#include "maxlab/errors.hpp"
#include "maxlab/finite_character.hpp"
#include "maxlab/zorn.hpp"

namespace maxlab {

struct NRule {
  FiniteSet premise;  // F
  FiniteSet choices;  // S, nonempty

  bool operator==(const NRule&) const = default;
};

struct NondetClosureOp {
  std::vector<NRule> rules;

  void validate() const {
    for (const auto& r : rules)
      if (r.choices.empty()) throw BadInput("choice rule with empty choice set");
  }
};

struct NClosedVerdict {
  bool closed = true;
  std::optional<std::size_t> violated_rule;
};

inline NClosedVerdict is_nclosed(const NondetClosureOp& op, const FiniteSet& x) {
  op.validate();
  for (std::size_t r = 0; r < op.rules.size(); ++r) {
    if (op.rules[r].premise.subset_of(x) && op.rules[r].choices.intersect(x).empty())
      return {false, r};
  }
  return {true, std::nullopt};
}

enum class NceMode { Exact, Greedy };

namespace nce_detail {

// Rules compiled to bit positions over the ambient set.  Rules whose premise
// escapes the ambient set can never fire inside it and are dropped; a rule
// whose choices all escape makes any premise-containing subset non-closed,
// which an empty choice mask encodes naturally.
struct MaskProblem {
  std::vector<Nat> elems;  // ambient, ascending; bit i <-> elems[i]
  std::vector<std::pair<std::uint64_t, std::uint64_t>> rules;  // (premise, choices)
  std::uint64_t full = 0;

  static MaskProblem build(const NondetClosureOp& op, const FiniteSet& ambient) {
    if (ambient.size() > 63) throw InputTooLarge("ambient set too large for the solver");
    MaskProblem p;
    p.elems = ambient.values();
    p.full = (ambient.size() == 0) ? 0 : ((std::uint64_t(1) << ambient.size()) - 1);
    auto pos = [&](Nat x) -> std::optional<std::size_t> {
      auto it = std::lower_bound(p.elems.begin(), p.elems.end(), x);
      if (it == p.elems.end() || *it != x) return std::nullopt;
      return static_cast<std::size_t>(it - p.elems.begin());
    };
    for (const auto& r : op.rules) {
      std::uint64_t premise = 0, choices = 0;
      bool premise_inside = true;
      for (Nat x : r.premise) {
        auto i = pos(x);
        if (!i) {
          premise_inside = false;
          break;
        }
        premise |= std::uint64_t(1) << *i;
      }
      if (!premise_inside) continue;
      for (Nat x : r.choices)
        if (auto i = pos(x)) choices |= std::uint64_t(1) << *i;
      p.rules.emplace_back(premise, choices);
    }
    return p;
  }

  std::uint64_t to_mask(const FiniteSet& s) const {
    std::uint64_t m = 0;
    for (Nat x : s) {
      auto it = std::lower_bound(elems.begin(), elems.end(), x);
      if (it == elems.end() || *it != x) throw BadInput("set escapes the ambient set");
      m |= std::uint64_t(1) << (it - elems.begin());
    }
    return m;
  }

  FiniteSet to_set(std::uint64_t mask) const {
    std::vector<Nat> xs;
    for (std::size_t i = 0; i < elems.size(); ++i)
      if (mask & (std::uint64_t(1) << i)) xs.push_back(elems[i]);
    return FiniteSet(std::move(xs));
  }

  bool closed(std::uint64_t s) const {
    for (auto [premise, choices] : rules)
      if ((premise & ~s) == 0 && (choices & s) == 0) return false;
    return true;
  }

  std::optional<std::size_t> first_violated(std::uint64_t s) const {
    for (std::size_t r = 0; r < rules.size(); ++r)
      if ((rules[r].first & ~s) == 0 && (rules[r].second & s) == 0) return r;
    return std::nullopt;
  }
};

// Does some closed, predicate-satisfying completion of s exist inside the
// ambient set?  Backtracking over the choices of the first violated rule;
// subset-closure of the predicate justifies pruning on predicate failure.
class CompletionSearch {
 public:
  CompletionSearch(const MaskProblem& problem, const FCPredicate& pred)
      : problem_(problem), pred_(pred) {}

  bool completable(std::uint64_t s) {
    if (dead_.count(s)) return false;
    if (!pred_(problem_.to_set(s))) {
      dead_.insert(s);
      return false;
    }
    const auto violated = problem_.first_violated(s);
    if (!violated) return true;
    std::uint64_t options = problem_.rules[*violated].second & ~s;
    for (std::size_t i = 0; i < 64; ++i) {
      const std::uint64_t bit = std::uint64_t(1) << i;
      if (options & bit) {
        if (completable(s | bit)) return true;
      }
    }
    dead_.insert(s);
    return false;
  }

 private:
  const MaskProblem& problem_;
  const FCPredicate& pred_;
  std::unordered_set<std::uint64_t> dead_;
};

}  // namespace nce_detail

// Maximal closed extension of the seed inside the ambient set.
//
// Exact mode enumerates subsets (|ambient \ seed| <= 22) and returns a truly
// superset-maximal closed satisfying set, breaking ties by least canonical
// index.  Greedy mode scans elements in increasing order and keeps one
// exactly when a closed satisfying completion still exists; its output is
// closed, satisfies the predicate, and is single-addition-maximal.
//
// The seed must satisfy the predicate; it may itself be non-closed as long
// as some closed satisfying extension exists (the solvers find one).
inline FiniteSet max_nclosed_extension(const NondetClosureOp& op, const FCPredicate& pred,
                                       const FiniteSet& ambient, const FiniteSet& seed,
                                       NceMode mode) {
  op.validate();
  if (!seed.subset_of(ambient)) throw BadSeed("seed escapes the ambient set");
  if (!pred(seed)) throw BadSeed("seed does not satisfy the predicate");

  const auto problem = nce_detail::MaskProblem::build(op, ambient);
  const std::uint64_t seed_mask = problem.to_mask(seed);

  if (mode == NceMode::Greedy) {
    nce_detail::CompletionSearch search(problem, pred);
    if (!search.completable(seed_mask))
      throw BadSeed("seed has no closed satisfying extension");
    std::uint64_t kept = seed_mask;
    for (std::size_t i = 0; i < problem.elems.size(); ++i) {
      const std::uint64_t bit = std::uint64_t(1) << i;
      if (kept & bit) continue;
      if (search.completable(kept | bit)) kept |= bit;
    }
    return problem.to_set(kept);
  }

  const std::size_t free = problem.elems.size() - static_cast<std::size_t>(
                              std::popcount(seed_mask));
  if (free > 22) throw InputTooLarge("exact mode enumerates subsets; |ambient - seed| must be <= 22");

  // Positions not pinned by the seed, used to spread enumeration masks.
  std::vector<std::size_t> free_pos;
  for (std::size_t i = 0; i < problem.elems.size(); ++i)
    if (!(seed_mask & (std::uint64_t(1) << i))) free_pos.push_back(i);

  // Descending popcount: every non-maximal closed satisfying set is strictly
  // contained in some earlier-seen maximal one.
  std::vector<std::uint64_t> maximals;
  for (std::size_t size = free_pos.size() + 1; size-- > 0;) {
    detail::for_each_combination(free_pos.size(), size,
                                 [&](const std::vector<std::size_t>& comb) {
      std::uint64_t s = seed_mask;
      for (std::size_t c : comb) s |= std::uint64_t(1) << free_pos[c];
      if (!problem.closed(s)) return false;
      for (std::uint64_t m : maximals)
        if ((s & ~m) == 0) return false;  // strictly below a known maximal
      if (!pred(problem.to_set(s))) return false;
      maximals.push_back(s);
      return false;
    });
  }
  if (maximals.empty()) throw BadSeed("seed has no closed satisfying extension");
  std::uint64_t best = maximals.front();
  FiniteSet best_set = problem.to_set(best);
  for (std::size_t i = 1; i < maximals.size(); ++i) {
    FiniteSet s = problem.to_set(maximals[i]);
    if (FiniteSet::canonical_less(s, best_set)) best_set = std::move(s);
  }
  return best_set;
}

// The truncated no-minimum operator on {0..max_element}: something must be
// chosen, and every element demands a cyclically later one.  The wrap keeps
// the defining feature alive after truncation: the closed supersets of the
// empty set have several incomparable minimal elements.
inline NondetClosureOp no_minimum_op(Nat max_element) {
  if (max_element == 0) throw BadInput("no-minimum operator needs max_element >= 1");
  NondetClosureOp op;
  op.rules.push_back({FiniteSet{}, FiniteSet::range(0, max_element + 1)});
  for (Nat i = 0; i < max_element; ++i)
    op.rules.push_back({FiniteSet{i}, FiniteSet::range(i + 1, max_element + 1)});
  op.rules.push_back({FiniteSet{max_element}, FiniteSet::range(0, max_element)});
  return op;
}

// Ideals of a countable poset, as closed-and-satisfying sets: down-closure
// choice rules, join-choice rules guarded on the existence of a common upper
// bound, and the common-upper-bound predicate.
inline std::pair<NondetClosureOp, FCPredicate> poset_ideal_encoding(const FinPoset& poset) {
  NondetClosureOp op;
  for (std::size_t k = 0; k < poset.size(); ++k)
    for (std::size_t j = 0; j < poset.size(); ++j)
      if (j != k && poset.leq(j, k))
        op.rules.push_back({FiniteSet{static_cast<Nat>(k)}, FiniteSet{static_cast<Nat>(j)}});
  for (std::size_t j = 0; j < poset.size(); ++j)
    for (std::size_t k = j + 1; k < poset.size(); ++k) {
      FiniteSet uppers;
      for (std::size_t n = 0; n < poset.size(); ++n)
        if (poset.leq(j, n) && poset.leq(k, n)) uppers.insert(static_cast<Nat>(n));
      if (!uppers.empty())
        op.rules.push_back({FiniteSet{static_cast<Nat>(j), static_cast<Nat>(k)},
                            std::move(uppers)});
    }
  FCPredicate pred;
  pred.universe_bound = static_cast<Nat>(poset.size());
  pred.description = "pairwise-upper-bounded";
  pred.eval = [poset](const FiniteSet& x) {
    const auto& xs = x.values();
    for (std::size_t a = 0; a < xs.size(); ++a)
      for (std::size_t b = a + 1; b < xs.size(); ++b) {
        bool bounded = false;
        for (std::size_t n = 0; n < poset.size(); ++n)
          if (poset.leq(static_cast<std::size_t>(xs[a]), n) &&
              poset.leq(static_cast<std::size_t>(xs[b]), n)) {
            bounded = true;
            break;
          }
        if (!bounded) return false;
      }
    return true;
  };
  return {std::move(op), std::move(pred)};
}

// A tree truncated at a depth bound, given as nested child arrays.  The empty
// tree (no root) is allowed and simply contributes nothing to the encoding.
struct TruncTree {
  struct Node {
    std::vector<Node> children;
  };

  std::optional<Node> root;

  static TruncTree leaf_only() { return {Node{}}; }
  static TruncTree empty() { return {std::nullopt}; }
};

struct TreeEncoding {
  FiniteSet ambient;
  NondetClosureOp op;
  FCPredicate pred;
  Nat z = 0;
  Nat depth = 0;
  std::vector<std::optional<Nat>> roots;  // element code of <i, empty-string>
};

namespace nce_detail {

inline Nat tree_elem(std::size_t tree_index, const std::vector<Nat>& path) {
  return 1 + pair(static_cast<Nat>(tree_index), seq_encode(path));
}

inline void encode_node(const TruncTree::Node& node, std::size_t tree_index,
                        std::vector<Nat>& path, Nat depth, TreeEncoding& enc) {
  if (path.size() > depth) throw BadInput("tree node deeper than the common depth bound");
  const Nat elem = tree_elem(tree_index, path);
  enc.ambient.insert(elem);
  if (path.size() == depth) return;  // success leaf: no rule, children forbidden
  if (node.children.empty()) {
    enc.op.rules.push_back({FiniteSet{elem}, FiniteSet{enc.z}});  // dead end
    return;
  }
  FiniteSet next;
  for (std::size_t c = 0; c < node.children.size(); ++c) {
    path.push_back(static_cast<Nat>(c));
    next.insert(tree_elem(tree_index, path));
    encode_node(node.children[c], tree_index, path, depth, enc);
    path.pop_back();
  }
  enc.op.rules.push_back({FiniteSet{elem}, std::move(next)});
}

}  // namespace nce_detail

// Element <i, sigma> for every node, a distinguished sink z, dead-end rules
// routing to z, extension rules offering the immediate children, and the
// predicate "z not in X".  Nodes at the depth bound count as success leaves.
inline TreeEncoding tree_encoding(const std::vector<TruncTree>& trees, Nat depth) {
  if (trees.empty()) throw BadInput("tree encoding needs at least one tree");
  TreeEncoding enc;
  enc.z = 0;
  enc.depth = depth;
  enc.ambient.insert(enc.z);
  enc.roots.resize(trees.size());
  for (std::size_t i = 0; i < trees.size(); ++i) {
    if (!trees[i].root) continue;
    std::vector<Nat> path;
    enc.roots[i] = nce_detail::tree_elem(i, path);
    nce_detail::encode_node(*trees[i].root, i, path, depth, enc);
  }
  enc.pred = fc_avoid(FiniteSet{enc.z}, enc.ambient.empty() ? 1 : enc.ambient.max() + 1);
  enc.pred.description = "sink-free";
  return enc;
}

// Tree indices whose root survives in a maximal closed sink-free set; equals
// depth-bound reachability for the truncation.  The guard checks closedness,
// the predicate, and single-addition maximality.
inline FiniteSet decode_paths(const TreeEncoding& enc, const FiniteSet& chosen) {
  if (!is_nclosed(enc.op, chosen).closed)
    throw NotMaximal("decoded set is not closed");
  if (!enc.pred(chosen)) throw NotMaximal("decoded set contains the sink");
  for (Nat x : enc.ambient.minus(chosen)) {
    FiniteSet extended = chosen.with(x);
    if (is_nclosed(enc.op, extended).closed && enc.pred(extended))
      throw NotMaximal("decoded set extends by a single element");
  }
  FiniteSet out;
  for (std::size_t i = 0; i < enc.roots.size(); ++i)
    if (enc.roots[i] && chosen.contains(*enc.roots[i])) out.insert(static_cast<Nat>(i));
  return out;
}

}  // namespace maxlab
