#pragma once

// Base numeric encodings shared by every other module: Cantor pairing of
// tuples, canonical (bit-set) indices of finite sets, and a bijective
// sequence codec built on top of the pairing.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <optional>
#include <tuple>
#include <utility>
#include <vector>

#include "maxlab/errors.hpp"

namespace maxlab {

using Nat = std::uint64_t;

// A finite set of naturals with value semantics.  Elements are kept sorted
// and unique; construction normalizes arbitrary input.
class FiniteSet {
 public:
  FiniteSet() = default;

  FiniteSet(std::initializer_list<Nat> xs) : elems_(xs) { normalize(); }

  explicit FiniteSet(std::vector<Nat> xs) : elems_(std::move(xs)) {
    normalize();
  }

  static FiniteSet range(Nat lo, Nat hi) {  // [lo, hi)
    FiniteSet s;
    for (Nat x = lo; x < hi; ++x) s.elems_.push_back(x);
    return s;
  }

  bool contains(Nat x) const {
    return std::binary_search(elems_.begin(), elems_.end(), x);
  }

  void insert(Nat x) {
    auto it = std::lower_bound(elems_.begin(), elems_.end(), x);
    if (it == elems_.end() || *it != x) elems_.insert(it, x);
  }

  void erase(Nat x) {
    auto it = std::lower_bound(elems_.begin(), elems_.end(), x);
    if (it != elems_.end() && *it == x) elems_.erase(it);
  }

  bool subset_of(const FiniteSet& other) const {
    return std::includes(other.elems_.begin(), other.elems_.end(),
                         elems_.begin(), elems_.end());
  }

  FiniteSet unite(const FiniteSet& other) const {
    FiniteSet out;
    std::set_union(elems_.begin(), elems_.end(), other.elems_.begin(),
                   other.elems_.end(), std::back_inserter(out.elems_));
    return out;
  }

  FiniteSet intersect(const FiniteSet& other) const {
    FiniteSet out;
    std::set_intersection(elems_.begin(), elems_.end(), other.elems_.begin(),
                          other.elems_.end(), std::back_inserter(out.elems_));
    return out;
  }

  FiniteSet minus(const FiniteSet& other) const {
    FiniteSet out;
    std::set_difference(elems_.begin(), elems_.end(), other.elems_.begin(),
                        other.elems_.end(), std::back_inserter(out.elems_));
    return out;
  }

  FiniteSet with(Nat x) const {
    FiniteSet out = *this;
    out.insert(x);
    return out;
  }

  bool empty() const { return elems_.empty(); }
  std::size_t size() const { return elems_.size(); }
  Nat min() const { return elems_.front(); }
  Nat max() const { return elems_.back(); }

  const std::vector<Nat>& values() const { return elems_; }
  auto begin() const { return elems_.begin(); }
  auto end() const { return elems_.end(); }

  bool operator==(const FiniteSet& other) const = default;

  // Canonical-index order: compare as bit sets, i.e. by the value of
  // sum(2^e).  Works for elements past word size too, since the highest
  // differing element decides.
  static bool canonical_less(const FiniteSet& a, const FiniteSet& b) {
    auto ia = a.elems_.rbegin(), ib = b.elems_.rbegin();
    for (; ia != a.elems_.rend() && ib != b.elems_.rend(); ++ia, ++ib) {
      if (*ia != *ib) return *ia < *ib;
    }
    return ia == a.elems_.rend() && ib != b.elems_.rend();
  }

 private:
  void normalize() {
    std::sort(elems_.begin(), elems_.end());
    elems_.erase(std::unique(elems_.begin(), elems_.end()), elems_.end());
  }

  std::vector<Nat> elems_;
};

// Cantor pairing: pair(j, k) = (j+k)(j+k+1)/2 + k, a bijection N^2 -> N.
inline Nat pair(Nat j, Nat k) {
  const Nat s = j + k;
  if (s < j || s > (Nat(1) << 32))
    throw InputTooLarge("pair arguments overflow the machine word");
  const Nat tri = (s % 2 == 0) ? (s / 2) * (s + 1) : s * ((s + 1) / 2);
  return tri + k;
}

inline std::pair<Nat, Nat> unpair(Nat code) {
  const auto tri = [](Nat n) {  // n(n+1)/2 without intermediate overflow
    return (n % 2 == 0) ? (n / 2) * (n + 1) : n * ((n + 1) / 2);
  };
  // Invert the triangular part: s = floor((sqrt(8c+1)-1)/2).
  Nat s = 0;
  {
    long double approx = (std::sqrt(8.0L * static_cast<long double>(code) + 1.0L) - 1.0L) / 2.0L;
    s = static_cast<Nat>(approx);
    while (tri(s + 1) <= code) ++s;
    while (tri(s) > code) --s;
  }
  const Nat k = code - tri(s);
  return {s - k, k};
}

// Triples code as pair(j, pair(k, l)).
inline Nat triple(Nat j, Nat k, Nat l) { return pair(j, pair(k, l)); }

inline std::tuple<Nat, Nat, Nat> untriple(Nat code) {
  auto [j, rest] = unpair(code);
  auto [k, l] = unpair(rest);
  return {j, k, l};
}

// Canonical index of a finite set: sum of 2^i over its elements.
inline Nat finset_encode(const FiniteSet& f) {
  Nat code = 0;
  for (Nat x : f) {
    if (x >= 64) throw InputTooLarge("finite-set element beyond word size");
    code |= Nat(1) << x;
  }
  return code;
}

inline FiniteSet finset_decode(Nat code) {
  std::vector<Nat> xs;
  for (Nat i = 0; i < 64; ++i)
    if (code & (Nat(1) << i)) xs.push_back(i);
  return FiniteSet(std::move(xs));
}

namespace detail {

// Visits all k-subsets of {0..n-1} in lexicographic order; stops early when
// the visitor returns true and reports whether that happened.
template <typename Visit>
inline bool for_each_combination(std::size_t n, std::size_t k, Visit visit) {
  if (k > n) return false;
  std::vector<std::size_t> comb(k);
  for (std::size_t i = 0; i < k; ++i) comb[i] = i;
  while (true) {
    if (visit(comb)) return true;
    std::size_t i = k;
    while (i > 0 && comb[i - 1] == i - 1 + n - k) --i;
    if (i == 0) return false;
    ++comb[i - 1];
    for (std::size_t j = i; j < k; ++j) comb[j] = comb[j - 1] + 1;
  }
}

}  // namespace detail

// Bijection N <-> N^<N used wherever the constructions code strings as
// numbers.  The sequence maps to the bit set of its shifted partial sums,
//   code(x_0..x_{n-1}) = sum_i 2^(x_0+...+x_i + i),
// so code size grows linearly with the entry sum rather than exponentially
// with the length.  0 is the empty sequence.
inline Nat seq_encode(const std::vector<Nat>& seq) {
  Nat code = 0;
  Nat exponent = 0;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    exponent += seq[i] + (i == 0 ? 0 : 1);
    if (exponent >= 64) throw InputTooLarge("sequence code beyond word size");
    code |= Nat(1) << exponent;
  }
  return code;
}

inline std::vector<Nat> seq_decode(Nat code) {
  std::vector<Nat> out;
  Nat prev = 0;
  bool first = true;
  for (Nat q = 0; q < 64; ++q) {
    if (!(code & (Nat(1) << q))) continue;
    out.push_back(first ? q : q - prev - 1);
    prev = q;
    first = false;
  }
  return out;
}

}  // namespace maxlab
