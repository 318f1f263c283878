#include "doctest.h"
#include "maxlab/closure_det.hpp"
#include "maxlab/oracles.hpp"
#include "support.hpp"

#include <random>

using namespace maxlab;

TEST_CASE("closure fixpoints") {
  SUBCASE("no rules") {
    const DetClosureOp op;
    CHECK(cl(op, FiniteSet{1, 4}) == FiniteSet{1, 4});
  }
  SUBCASE("chained rules") {
    const DetClosureOp op{{{FiniteSet{1, 2}, 3}, {FiniteSet{3}, 4}}};
    CHECK(cl(op, FiniteSet{1, 2}) == FiniteSet{1, 2, 3, 4});
  }
  SUBCASE("nullary rules always fire") {
    const DetClosureOp op{{{FiniteSet{}, 7}}};
    CHECK(cl(op, FiniteSet{}) == FiniteSet{7});
  }
}

TEST_CASE("closedness") {
  const DetClosureOp op{{{FiniteSet{1}, 2}}};
  CHECK_FALSE(is_closed(op, FiniteSet{1}));
  CHECK(is_closed(op, FiniteSet{2}));
  std::mt19937 rng(808);
  for (int trial = 0; trial < 50; ++trial) {
    const auto rop = testsupport::random_det_op(rng, 6, 10);
    const FiniteSet x = testsupport::random_subset(rng, FiniteSet::range(0, 10));
    CHECK(is_closed(rop, cl(rop, x)));  // idempotence via the definition
  }
}

TEST_CASE("closure laws against the naive fixpoint oracle") {
  std::mt19937 rng(909);
  for (int trial = 0; trial < 150; ++trial) {
    const auto op = testsupport::random_det_op(rng, 8, 10);
    const FiniteSet x = testsupport::random_subset(rng, FiniteSet::range(0, 10));
    const FiniteSet y = x.unite(testsupport::random_subset(rng, FiniteSet::range(0, 10)));
    const FiniteSet cx = cl(op, x);
    CHECK(cx == oracle::naive_cl(op, x));        // worklist = level sets
    CHECK(x.subset_of(cx));                      // extensive
    CHECK(cl(op, cx) == cx);                     // idempotent
    CHECK(cx.subset_of(cl(op, y)));              // monotone
  }
}

TEST_CASE("greedy maximal closed extension") {
  SUBCASE("empty operator with a free predicate keeps the ambient set") {
    const DetClosureOp op;
    const FiniteSet a{0, 3, 5};
    CHECK(ce_greedy_max(op, fc_true(6), a, FiniteSet{}) == a);
  }
  SUBCASE("a forced conclusion blocks its premises") {
    const DetClosureOp op{{{FiniteSet{1}, 2}}};
    const FCPredicate pred = fc_avoid(FiniteSet{2}, 4);
    CHECK(ce_greedy_max(op, pred, FiniteSet{1, 2, 3}, FiniteSet{}) == FiniteSet{3});
  }
  SUBCASE("seed violations are rejected") {
    const DetClosureOp op{{{FiniteSet{1}, 2}}};
    CHECK_THROWS_AS(ce_greedy_max(op, fc_true(4), FiniteSet{1, 2}, FiniteSet{1}), BadSeed);
    CHECK_THROWS_AS(ce_greedy_max(op, fc_avoid(FiniteSet{0}, 4), FiniteSet{0, 1},
                                  FiniteSet{0}),
                    BadSeed);
    CHECK_THROWS_AS(ce_greedy_max(op, fc_true(4), FiniteSet{1}, FiniteSet{0, 1}), BadSeed);
  }
}

TEST_CASE("greedy extension passes the exhaustive superset oracle") {
  std::mt19937 rng(1010);
  int done = 0;
  while (done < 100) {
    const auto op = testsupport::random_det_op(rng, 6, 12);
    const auto pred = testsupport::random_fc_pred(rng, 12);
    const FiniteSet a = testsupport::random_subset(rng, FiniteSet::range(0, 12), 0.8);
    const FiniteSet c = cl(op, FiniteSet{});
    if (!c.subset_of(a) || !pred(c)) continue;
    const FiniteSet b = ce_greedy_max(op, pred, a, c);
    CHECK(oracle::ce_extension_is_maximal(op, pred, a, c, b));
    ++done;
  }
}

TEST_CASE("prime gadget") {
  SUBCASE("empty prefix has no trigger rules") {
    const auto op = prime_gadget({}, 3, 3);
    for (const auto& rule : op.rules) CHECK(rule.conclusion != 0);
  }
  SUBCASE("trigger rule wraps the exponent") {
    const auto op = prime_gadget({1}, 3, 3);
    const DetRule expected{FiniteSet{3}, 0};
    CHECK(std::find(op.rules.begin(), op.rules.end(), expected) != op.rules.end());
  }
  SUBCASE("ladders make powers all-or-nothing") {
    const auto op = prime_gadget({}, 3, 3);
    const FiniteSet c = cl(op, FiniteSet{9});  // 3^2 pulls the whole ladder of 3
    CHECK(c == FiniteSet{3, 9, 27});
  }
  SUBCASE("injectivity and range are validated") {
    CHECK_THROWS_AS(prime_gadget({1, 1}, 3, 3), BadInput);
    CHECK_THROWS_AS(prime_gadget({5}, 3, 3), BadInput);
  }
}

TEST_CASE("prime gadget decodes the range exactly") {
  // all injective prefixes of length <= 4 over indices < 4
  std::vector<std::vector<Nat>> prefixes{{}};
  for (std::size_t len = 0; len < 4; ++len) {
    std::vector<std::vector<Nat>> grown;
    for (const auto& f : prefixes) {
      if (f.size() < len) continue;
      for (Nat v = 0; v < 4; ++v) {
        if (std::find(f.begin(), f.end(), v) != f.end()) continue;
        auto g = f;
        g.push_back(v);
        grown.push_back(std::move(g));
      }
    }
    for (auto& g : grown) prefixes.push_back(std::move(g));
  }
  CHECK(prefixes.size() == 65);  // 1 + 4 + 12 + 24 + 24
  const FiniteSet universe = prime_gadget_universe(4, 3);
  for (const auto& f : prefixes) {
    const auto op = prime_gadget(f, 4, 3);
    const FCPredicate pred = fc_avoid(FiniteSet{0}, universe.max() + 1);
    const FiniteSet b = ce_greedy_max(op, pred, universe, FiniteSet{});
    FiniteSet range;
    for (Nat v : f) range.insert(v);
    CHECK(prime_gadget_decode(b, 4) == range);
  }
}

TEST_CASE("semilattice ideals") {
  // diamond: 0 below a=1,b=2 below top=3
  const JoinSemilattice diamond(
      4, {{0, 1}, {0, 2}, {0, 3}, {1, 3}, {2, 3}},
      {{0, 1, 2, 3}, {1, 1, 3, 3}, {2, 3, 2, 3}, {3, 3, 3, 3}}, 3);
  const auto [op, pred] = semilattice_ideal_op(diamond);

  SUBCASE("closed satisfying sets are the proper ideals") {
    std::vector<FiniteSet> got;
    for (Nat mask = 0; mask < 16; ++mask) {
      const FiniteSet s = finset_decode(mask);
      if (is_closed(op, s) && pred(s)) got.push_back(s);
    }
    const std::vector<FiniteSet> expected{FiniteSet{}, FiniteSet{0}, FiniteSet{0, 1},
                                          FiniteSet{0, 2}};
    CHECK(got == expected);
  }
  SUBCASE("greedy from the bottom finds a maximal proper ideal") {
    const FiniteSet b = ce_greedy_max(op, pred, FiniteSet{0, 1, 2, 3}, FiniteSet{0});
    CHECK(b == FiniteSet{0, 1});  // deterministic least-first scan
    CHECK(oracle::ce_extension_is_maximal(op, pred, FiniteSet{0, 1, 2, 3}, FiniteSet{0}, b));
  }
  SUBCASE("chains keep everything below the top") {
    const JoinSemilattice chain(3, {{0, 1}, {0, 2}, {1, 2}},
                                {{0, 1, 2}, {1, 1, 2}, {2, 2, 2}}, 2);
    const auto [cop, cpred] = semilattice_ideal_op(chain);
    CHECK(ce_greedy_max(cop, cpred, FiniteSet{0, 1, 2}, FiniteSet{}) == FiniteSet{0, 1});
  }
  SUBCASE("join tables are validated") {
    CHECK_THROWS_AS(JoinSemilattice(2, {{0, 1}}, {{0, 0}, {0, 1}}, 1), BadInput);
  }
}

namespace {

// Enumerates every poset on `size` labeled elements aligned with the numeric
// order (each finite poset has such a labeling), keeping those that carry a
// join operation and a top.
template <typename Visit>
void for_each_join_semilattice(std::size_t size, Visit visit) {
  std::vector<std::pair<std::size_t, std::size_t>> slots;
  for (std::size_t i = 0; i < size; ++i)
    for (std::size_t j = i + 1; j < size; ++j) slots.emplace_back(i, j);
  const std::uint32_t limit = std::uint32_t(1) << slots.size();
  for (std::uint32_t mask = 0; mask < limit; ++mask) {
    std::vector<std::vector<bool>> leq(size, std::vector<bool>(size, false));
    for (std::size_t i = 0; i < size; ++i) leq[i][i] = true;
    for (std::size_t b = 0; b < slots.size(); ++b)
      if (mask & (std::uint32_t(1) << b)) leq[slots[b].first][slots[b].second] = true;
    // transitive closure; antisymmetry is free since edges point upward
    for (std::size_t k = 0; k < size; ++k)
      for (std::size_t i = 0; i < size; ++i)
        for (std::size_t j = 0; j < size; ++j)
          if (leq[i][k] && leq[k][j]) leq[i][j] = true;
    // least upper bounds must exist everywhere
    std::vector<std::vector<std::size_t>> join(size, std::vector<std::size_t>(size));
    bool is_lattice = true;
    for (std::size_t a = 0; a < size && is_lattice; ++a)
      for (std::size_t b = 0; b < size && is_lattice; ++b) {
        std::optional<std::size_t> least;
        for (std::size_t c = 0; c < size; ++c) {
          if (!leq[a][c] || !leq[b][c]) continue;
          if (!least || leq[c][*least]) least = c;
        }
        if (!least) {
          is_lattice = false;
          break;
        }
        for (std::size_t c = 0; c < size; ++c)
          if (leq[a][c] && leq[b][c] && !leq[*least][c]) is_lattice = false;
        join[a][b] = least ? *least : 0;
      }
    if (!is_lattice) continue;
    std::optional<std::size_t> top;
    for (std::size_t c = 0; c < size; ++c) {
      bool greatest = true;
      for (std::size_t a = 0; a < size; ++a)
        if (!leq[a][c]) greatest = false;
      if (greatest) top = c;
    }
    if (!top) continue;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < size; ++i)
      for (std::size_t j = 0; j < size; ++j)
        if (i != j && leq[i][j]) pairs.emplace_back(i, j);
    visit(JoinSemilattice(size, pairs, join, *top));
  }
}

}  // namespace

TEST_CASE("closed sets of the semilattice operator are exactly the ideals") {
  // exhaustive over every join-semilattice on up to 5 elements
  std::size_t seen = 0;
  for (std::size_t size = 1; size <= 5; ++size) {
    for_each_join_semilattice(size, [&](const JoinSemilattice& lat) {
      ++seen;
      const auto [op, pred] = semilattice_ideal_op(lat);
      const Nat limit = Nat(1) << lat.size();
      for (Nat mask = 0; mask < limit; ++mask) {
        const FiniteSet s = finset_decode(mask);
        bool ideal = true;
        for (Nat a : s) {
          for (std::size_t b = 0; b < lat.size(); ++b)
            if (lat.leq(b, static_cast<std::size_t>(a)) && !s.contains(b)) ideal = false;
          for (Nat b : s)
            if (!s.contains(lat.join(static_cast<std::size_t>(a),
                                     static_cast<std::size_t>(b))))
              ideal = false;
        }
        CHECK(is_closed(op, s) == ideal);
        if (is_closed(op, s) && pred(s)) CHECK_FALSE(s.contains(lat.top()));
      }
    });
  }
  CHECK(seen > 100);  // the enumeration is not vacuous
}
