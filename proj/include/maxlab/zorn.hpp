#pragma once

// Finite posets: the chain-climbing algorithm, maximal-element computations,
// and the reversal gadget poset built from an injective prefix.

#include <cstddef>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "maxlab/encoding.hpp"
#include "maxlab/errors.hpp"

namespace maxlab {

// A reflexive, antisymmetric, transitive relation on {0..size-1}.  Reflexive
// pairs are implied; antisymmetry and transitivity of the given pairs are
// checked on construction.
class FinPoset {
 public:
  FinPoset() = default;

  FinPoset(std::size_t size, const std::vector<std::pair<std::size_t, std::size_t>>& pairs)
      : size_(size), leq_(size * size, false) {
    for (std::size_t i = 0; i < size; ++i) set(i, i);
    for (auto [a, b] : pairs) {
      if (a >= size || b >= size) throw BadIndex("poset relation pair out of range");
      set(a, b);
    }
    validate();
  }

  std::size_t size() const { return size_; }

  bool leq(std::size_t a, std::size_t b) const { return leq_[a * size_ + b]; }
  bool lt(std::size_t a, std::size_t b) const { return a != b && leq(a, b); }

 private:
  void set(std::size_t a, std::size_t b) { leq_[a * size_ + b] = true; }

  void validate() const {
    for (std::size_t a = 0; a < size_; ++a)
      for (std::size_t b = 0; b < size_; ++b) {
        if (a != b && leq(a, b) && leq(b, a))
          throw BadInput("relation is not antisymmetric");
        for (std::size_t c = 0; c < size_; ++c)
          if (leq(a, b) && leq(b, c) && !leq(a, c))
            throw BadInput("relation is not transitive");
      }
  }

  std::size_t size_ = 0;
  std::vector<bool> leq_;
};

struct ClimbResult {
  std::vector<std::size_t> chain;  // the values q_0, q_1, ... with repeats removed
  std::size_t top = 0;
};

// Replays the q_i recursion over the enumeration 0..size-1: climb to p_i
// whenever the current value lies strictly below it.  On a finite poset the
// final value is always a maximal element above the start.
inline ClimbResult zl1_climb(const FinPoset& pos, std::size_t start) {
  if (start >= pos.size()) throw BadIndex("start element out of range");
  ClimbResult out;
  std::size_t q = start;
  out.chain.push_back(q);
  for (std::size_t i = 0; i < pos.size(); ++i) {
    if (pos.lt(q, i)) {
      q = i;
      out.chain.push_back(q);
    }
  }
  out.top = q;
  return out;
}

inline std::vector<std::size_t> maximal_elements(const FinPoset& pos) {
  std::vector<std::size_t> out;
  for (std::size_t p = 0; p < pos.size(); ++p) {
    bool topped = false;
    for (std::size_t q = 0; q < pos.size(); ++q)
      if (pos.lt(p, q)) {
        topped = true;
        break;
      }
    if (!topped) out.push_back(p);
  }
  return out;
}

// m(p) = the numerically least maximal q with p <= q.  Total on finite posets.
inline std::vector<std::size_t> maximal_assignment(const FinPoset& pos) {
  const auto maxes = maximal_elements(pos);
  std::vector<std::size_t> m(pos.size());
  for (std::size_t p = 0; p < pos.size(); ++p) {
    bool assigned = false;
    for (std::size_t q : maxes)
      if (pos.leq(p, q)) {
        m[p] = q;
        assigned = true;
        break;
      }
    if (!assigned) throw BadInput("element below no maximal element");
  }
  return m;
}

// The reversal poset on labels p_{i,s} for i < member_count, s < stage_count.
// Nodes with different i are incomparable; within column i,
// p_{i,t} < p_{i,s} holds iff f(s) = i, or f(t) != i and t > s.
class GadgetPoset {
 public:
  GadgetPoset(const std::vector<Nat>& f, std::size_t member_count, std::size_t stage_count)
      : f_(f), members_(member_count), stages_(stage_count) {
    for (std::size_t a = 0; a < f.size(); ++a)
      for (std::size_t b = a + 1; b < f.size(); ++b)
        if (f[a] == f[b]) throw BadInput("gadget prefix must be injective");
  }

  std::size_t node(std::size_t i, std::size_t s) const { return i * stages_ + s; }
  std::pair<std::size_t, std::size_t> label(std::size_t idx) const {
    return {idx / stages_, idx % stages_};
  }

  FinPoset poset() const {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < members_; ++i)
      for (std::size_t s = 0; s < stages_; ++s)
        for (std::size_t t = 0; t < stages_; ++t) {
          if (s == t) continue;
          const bool f_s_hits = s < f_.size() && f_[s] == i;
          const bool f_t_hits = t < f_.size() && f_[t] == i;
          if (f_s_hits || (!f_t_hits && t > s))
            pairs.emplace_back(node(i, t), node(i, s));  // p_{i,t} < p_{i,s}
        }
    return FinPoset(members_ * stages_, pairs);
  }

  std::size_t member_count() const { return members_; }
  std::size_t stage_count() const { return stages_; }

 private:
  std::vector<Nat> f_;
  std::size_t members_;
  std::size_t stages_;
};

// Builds the gadget, computes the maximal assignment, and reads the range of
// f back off it: i is decoded iff m(p_{i,0}) = p_{i,s} implies f(s) = i.
inline FiniteSet zl_reversal_decode(const std::vector<Nat>& f, std::size_t member_count,
                                    std::size_t stage_count) {
  const GadgetPoset gadget(f, member_count, stage_count);
  const auto m = maximal_assignment(gadget.poset());
  FiniteSet out;
  for (std::size_t i = 0; i < member_count; ++i) {
    const auto [mi, ms] = gadget.label(m[gadget.node(i, 0)]);
    if (ms < f.size() && f[ms] == i) out.insert(static_cast<Nat>(i));
  }
  return out;
}

}  // namespace maxlab
