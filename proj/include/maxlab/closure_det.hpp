#pragma once

// Deterministic finitary closure operators: Horn-style rules <F, n>, the
// least-fixpoint closure, the greedy maximal closed extension, and the two
// gadgets feeding it (prime-power ladders, semilattice ideals).

#include <cstddef>
#include <map>
#include <unordered_map>
#include <utility>
#include <vector>

#include "maxlab/encoding.hpp"
#include "maxlab/errors.hpp"
#include "maxlab/finite_character.hpp"

namespace maxlab {

struct DetRule {
  FiniteSet premise;  // F
  Nat conclusion;     // n

  bool operator==(const DetRule&) const = default;
};

struct DetClosureOp {
  std::vector<DetRule> rules;
};

// Least fixed point of rule application starting at X, via a worklist with
// per-rule unsatisfied-premise counters.  Elements produced by rules are
// retained even when they escape [0, universe); callers test containment.
inline FiniteSet cl(const DetClosureOp& op, const FiniteSet& start, Nat universe = 0) {
  (void)universe;  // the ambient bound constrains callers, not the fixpoint
  std::vector<std::size_t> unsatisfied(op.rules.size());
  std::unordered_map<Nat, std::vector<std::size_t>> premise_index;
  std::vector<Nat> queue;
  FiniteSet closed = start;

  for (std::size_t r = 0; r < op.rules.size(); ++r) {
    std::size_t missing = 0;
    for (Nat x : op.rules[r].premise)
      if (!closed.contains(x)) {
        ++missing;
        premise_index[x].push_back(r);
      }
    unsatisfied[r] = missing;
    if (missing == 0 && !closed.contains(op.rules[r].conclusion)) {
      closed.insert(op.rules[r].conclusion);
      queue.push_back(op.rules[r].conclusion);
    }
  }
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    auto it = premise_index.find(queue[qi]);
    if (it == premise_index.end()) continue;
    for (std::size_t r : it->second) {
      if (unsatisfied[r] == 0) continue;
      if (--unsatisfied[r] == 0) {
        const Nat n = op.rules[r].conclusion;
        if (!closed.contains(n)) {
          closed.insert(n);
          queue.push_back(n);
        }
      }
    }
  }
  return closed;
}

inline bool is_closed(const DetClosureOp& op, const FiniteSet& x) {
  for (const auto& rule : op.rules)
    if (rule.premise.subset_of(x) && !x.contains(rule.conclusion)) return false;
  return true;
}

// Greedy maximal closed extension: scan A \ C in increasing order and adjoin
// an element exactly when the closure of the kept set plus it stays inside A
// and satisfies the predicate.  Single additions decide maximality here
// because closures compose: cl(X + {a,b}) = cl(cl(X + {a}) + {b}).
inline FiniteSet ce_greedy_max(const DetClosureOp& op, const FCPredicate& pred,
                               const FiniteSet& ambient, const FiniteSet& seed) {
  if (!seed.subset_of(ambient)) throw BadSeed("seed escapes the ambient set");
  if (!is_closed(op, seed)) throw BadSeed("seed is not closed");
  if (!pred(seed)) throw BadSeed("seed does not satisfy the predicate");
  FiniteSet kept = seed;
  for (Nat x : ambient.minus(seed)) {
    if (kept.contains(x)) continue;
    FiniteSet candidate = cl(op, kept.with(x));
    if (candidate.subset_of(ambient) && pred(candidate)) kept = std::move(candidate);
  }
  return kept;
}

// First `count` primes.
inline std::vector<Nat> first_primes(std::size_t count) {
  std::vector<Nat> out;
  for (Nat p = 2; out.size() < count; ++p) {
    bool prime = true;
    for (Nat d = 2; d * d <= p; ++d)
      if (p % d == 0) {
        prime = false;
        break;
      }
    if (prime) out.push_back(p);
  }
  return out;
}

// The prime-power coding operator.  Ladder rules link the positive powers of
// each prime cyclically within [1, exp_bound], so a closed set contains every
// positive power of p_i or none even after truncation; the trigger rules
// route to 0 with their exponent wrapped the same way.
inline DetClosureOp prime_gadget(const std::vector<Nat>& f, std::size_t prime_count,
                                 Nat exp_bound) {
  for (std::size_t a = 0; a < f.size(); ++a)
    for (std::size_t b = a + 1; b < f.size(); ++b)
      if (f[a] == f[b]) throw BadInput("prime gadget prefix must be injective");
  for (Nat v : f)
    if (v >= prime_count) throw BadInput("prime gadget prefix value out of range");
  if (exp_bound == 0) throw BadInput("prime gadget needs exp_bound >= 1");

  const auto primes = first_primes(prime_count);
  auto power = [](Nat base, Nat exp) {
    Nat out = 1;
    for (Nat i = 0; i < exp; ++i) out *= base;
    return out;
  };

  DetClosureOp op;
  for (std::size_t i = 0; i < prime_count; ++i) {
    for (Nat k = 1; k <= exp_bound; ++k) {
      const Nat up = (k % exp_bound) + 1;
      const Nat down = ((k + exp_bound - 2) % exp_bound) + 1;
      if (up != k) op.rules.push_back({FiniteSet{power(primes[i], k)}, power(primes[i], up)});
      if (down != k && down != up)
        op.rules.push_back({FiniteSet{power(primes[i], k)}, power(primes[i], down)});
    }
  }
  for (std::size_t n = 0; n < f.size(); ++n) {
    const std::size_t i = static_cast<std::size_t>(f[n]);
    const Nat exp = (static_cast<Nat>(n) % exp_bound) + 1;
    op.rules.push_back({FiniteSet{power(primes[i], exp)}, 0});
  }
  return op;
}

// Ambient set for prime-gadget experiments: 0 plus every truncated power.
inline FiniteSet prime_gadget_universe(std::size_t prime_count, Nat exp_bound) {
  const auto primes = first_primes(prime_count);
  FiniteSet out{0};
  for (Nat p : primes) {
    Nat pow = 1;
    for (Nat k = 1; k <= exp_bound; ++k) {
      pow *= p;
      out.insert(pow);
    }
  }
  return out;
}

// Reads the range of f off a maximal closed 0-free set: exactly the primes
// with no positive power present.
inline FiniteSet prime_gadget_decode(const FiniteSet& maximal_set, std::size_t prime_count) {
  const auto primes = first_primes(prime_count);
  FiniteSet out;
  for (std::size_t i = 0; i < prime_count; ++i)
    if (!maximal_set.contains(primes[i])) out.insert(static_cast<Nat>(i));
  return out;
}

// A finite join-semilattice: a poset with all binary joins and a greatest
// element.  The join table is validated against the order.
class JoinSemilattice {
 public:
  JoinSemilattice(std::size_t size,
                  const std::vector<std::pair<std::size_t, std::size_t>>& leq_pairs,
                  std::vector<std::vector<std::size_t>> join, std::size_t top)
      : size_(size), leq_(size * size, false), join_(std::move(join)), top_(top) {
    for (std::size_t i = 0; i < size; ++i) leq_[i * size + i] = true;
    for (auto [a, b] : leq_pairs) {
      if (a >= size || b >= size) throw BadIndex("semilattice pair out of range");
      leq_[a * size + b] = true;
    }
    validate();
  }

  std::size_t size() const { return size_; }
  std::size_t top() const { return top_; }
  bool leq(std::size_t a, std::size_t b) const { return leq_[a * size_ + b]; }
  std::size_t join(std::size_t a, std::size_t b) const { return join_[a][b]; }

 private:
  void validate() const {
    if (top_ >= size_) throw BadIndex("semilattice top out of range");
    for (std::size_t a = 0; a < size_; ++a) {
      if (!leq(a, top_)) throw BadInput("top element is not greatest");
      for (std::size_t b = 0; b < size_; ++b) {
        if (a != b && leq(a, b) && leq(b, a)) throw BadInput("order is not antisymmetric");
        for (std::size_t c = 0; c < size_; ++c)
          if (leq(a, b) && leq(b, c) && !leq(a, c))
            throw BadInput("order is not transitive");
        if (join_.size() != size_ || join_[a].size() != size_)
          throw BadInput("join table has the wrong shape");
        const std::size_t j = join_[a][b];
        if (j >= size_ || !leq(a, j) || !leq(b, j))
          throw BadInput("join is not an upper bound");
        for (std::size_t c = 0; c < size_; ++c)
          if (leq(a, c) && leq(b, c) && !leq(j, c))
            throw BadInput("join is not the least upper bound");
      }
    }
  }

  std::size_t size_;
  std::vector<bool> leq_;
  std::vector<std::vector<std::size_t>> join_;
  std::size_t top_;
};

// Join rules plus down-closure rules make the closed sets exactly the ideals
// of L; the paired predicate keeps the top element out, so maximal closed
// satisfying sets are the maximal proper ideals.
inline std::pair<DetClosureOp, FCPredicate> semilattice_ideal_op(const JoinSemilattice& lat) {
  DetClosureOp op;
  for (std::size_t a = 0; a < lat.size(); ++a)
    for (std::size_t b = a + 1; b < lat.size(); ++b) {
      const std::size_t c = lat.join(a, b);
      if (c != a && c != b)
        op.rules.push_back({FiniteSet{static_cast<Nat>(a), static_cast<Nat>(b)},
                            static_cast<Nat>(c)});
    }
  for (std::size_t a = 0; a < lat.size(); ++a)
    for (std::size_t b = 0; b < lat.size(); ++b)
      if (a != b && lat.leq(b, a))
        op.rules.push_back({FiniteSet{static_cast<Nat>(a)}, static_cast<Nat>(b)});
  FCPredicate pred = fc_avoid(FiniteSet{static_cast<Nat>(lat.top())},
                              static_cast<Nat>(lat.size()));
  pred.description = "top-free";
  return {std::move(op), std::move(pred)};
}

}  // namespace maxlab
