#include "doctest.h"
#include "maxlab/constructions.hpp"
#include "maxlab/oracles.hpp"
#include "support.hpp"

#include <random>

using namespace maxlab;

namespace {

// Small caps keep the uncapped exponential string growth out of unit tests
// that do not depend on it.
AdversaryCaps tight_caps() { return {Nat(2), std::size_t(2)}; }

Family all_full_family(std::size_t members, Nat horizon) {
  std::vector<FiniteSet> sets(members, FiniteSet::range(0, horizon));
  return Family(std::move(sets), horizon);
}

}  // namespace

TEST_CASE("strategy oracle validation and stepping") {
  StrategyOracle ok{{{0, 3}, {5, 8}, {2, 8}}};
  ok.validate(0);
  CHECK_FALSE(ok.step(0, 2).has_value());
  CHECK(ok.step(0, 3) == Nat(0));
  CHECK(ok.step(1, 8) == Nat(5));
  CHECK(ok.step(1, 200) == Nat(5));  // answers never change
  CHECK_FALSE(ok.step(3, 200).has_value());
  CHECK(ok.largest_converged(7) == Nat(0));
  CHECK(ok.largest_converged(8) == Nat(2));
  CHECK(ok.induced_prefix(9) == std::vector<Nat>{0, 5, 2});
  CHECK(ok.induced_prefix(8) == std::vector<Nat>{0});

  StrategyOracle decreasing{{{0, 5}, {0, 4}}};
  CHECK_THROWS_AS(decreasing.validate(0), BadInput);
  StrategyOracle early{{{0, 1}}};
  CHECK_THROWS_AS(early.validate(2), BadInput);  // stage below the index
  StrategyOracle big_value{{{9, 3}}};
  CHECK_THROWS_AS(big_value.validate(0), BadInput);
}

TEST_CASE("adversary run without strategies never reaches step 4") {
  const auto result = adversary_run({}, 50, tight_caps());
  for (const auto& ev : result.transcript.events) {
    CHECK(ev.kind != AdvEventKind::AcceptableStage);
    CHECK(ev.step != 4);
  }
  const auto report = oracle::check_adversary_invariants(result);
  INFO(report.failure);
  CHECK(report.ok);
}

TEST_CASE("adversary target redefinition at the first convergence stage") {
  const StrategyOracle strat{{{0, 3}}};
  // items window wide enough that the target's singleton string is reached
  const auto result = adversary_run({strat}, 6, {Nat(2), std::size_t(8)});
  int redefined = 0;
  bool type1_before = false;
  bool retyped = false;
  for (const auto& ev : result.transcript.events) {
    if (ev.kind == AdvEventKind::TargetRedefined && ev.e == 0) {
      ++redefined;
      CHECK(ev.stage == 3);
    }
    if (ev.kind == AdvEventKind::FollowerBorn && ev.e == 0 && ev.follower_type == 1 &&
        ev.stage < 3)
      type1_before = true;
    if (ev.kind == AdvEventKind::FollowersRetyped && ev.e == 0 && ev.value > 0)
      retyped = true;
  }
  CHECK(redefined == 1);
  CHECK(type1_before);
  CHECK(retyped);
  const auto report = oracle::check_adversary_invariants(result);
  INFO(report.failure);
  CHECK(report.ok);
}

TEST_CASE("adversary runs are transcript-deterministic") {
  const std::vector<StrategyOracle> suite{{{{0, 2}, {1, 5}}}, {{{3, 4}}}};
  const auto a = adversary_run(suite, 12, tight_caps());
  const auto b = adversary_run(suite, 12, tight_caps());
  CHECK(a.transcript == b.transcript);
}

TEST_CASE("adversary audit") {
  SUBCASE("a pairwise-failing prefix is already diagonalized") {
    const auto result = adversary_run({}, 8, tight_caps());
    // members 0 and 1 only ever meet followers, never each other
    const auto verdict =
        adversary_audit(result.transcript, result.family, {{0, 1}}, 0);
    CHECK(verdict.diagonalized);
  }
  SUBCASE("a target meeting every member while unlisted is the contradiction") {
    ConstructionTranscript transcript;
    AdvEvent ev;
    ev.kind = AdvEventKind::TargetDefined;
    ev.e = 0;
    ev.value = 2;
    transcript.events.push_back(ev);
    const Family fam({FiniteSet{1, 5}, FiniteSet{1, 7}, FiniteSet{5, 7, 9}}, 10);
    const auto verdict = adversary_audit(transcript, fam, {{0, 1}}, 0);
    CHECK(verdict.diagonalized);
  }
  SUBCASE("inconclusive cases") {
    ConstructionTranscript transcript;
    AdvEvent ev;
    ev.kind = AdvEventKind::TargetDefined;
    ev.e = 0;
    ev.value = 2;
    transcript.events.push_back(ev);
    const Family fam({FiniteSet{1, 5}, FiniteSet{1, 7}, FiniteSet{5, 9}}, 10);
    // target misses member 1
    CHECK_FALSE(adversary_audit(transcript, fam, {{0, 1}}, 0).diagonalized);
    // target listed in the prefix
    CHECK_FALSE(adversary_audit(transcript, fam, {{0, 2}}, 0).diagonalized);
    // no target recorded for strategy 3
    CHECK_FALSE(adversary_audit(transcript, fam, {{0, 1}}, 3).diagonalized);
  }
}

TEST_CASE("acceptable stages never fire at desk scale") {
  // The string (0, p_{0,0}) is bounded from its birth on, hence viable at
  // every convergence stage with x = 1, and it can never satisfy the
  // interior-follower condition: its only earlier entry is the bare index 0.
  // Deeper viability levels need follower-of-follower values below the stage
  // bound, which the fresh counter outruns quadratically.  So step 4's gate
  // never opens in a finite run; the transcript stays in steps 1-3 and 5.
  const StrategyOracle strat{{{0, 4}, {0, 16}, {0, 30}}};
  const AdversaryCaps caps{Nat(4), std::size_t(16)};
  const auto result = adversary_run({strat}, 36, caps);
  for (const auto& ev : result.transcript.events) {
    CHECK(ev.kind != AdvEventKind::AcceptableStage);
    CHECK(ev.step != 4);
  }
  const auto report = oracle::check_adversary_invariants(result);
  INFO(report.failure);
  CHECK(report.ok);
}

TEST_CASE("permitting on the all-full family with an empty enumeration") {
  const Family fam = all_full_family(8, 16);
  const auto result = permitting_run(fam, {}, 20);
  // the final index set is an initial segment
  for (std::size_t k = 0; k < result.subfamily.indices.size(); ++k)
    CHECK(result.subfamily.indices[k] == k);
  CHECK(result.subfamily.indices.size() > 1);
  const auto report = oracle::check_permitting_invariants(fam, {}, result);
  INFO(report.failure);
  CHECK(report.ok);
}

TEST_CASE("permitting stalls on a disjoint family") {
  const Family fam({FiniteSet{0}, FiniteSet{1}, FiniteSet{2}}, 4);
  const auto result = permitting_run(fam, {}, 15);
  CHECK(result.subfamily.indices == std::vector<std::size_t>{0});
  for (const auto& st : result.history) CHECK(st.codes == std::vector<Nat>{0});
}

TEST_CASE("permitting removal happens exactly at the permission") {
  // A_0 meets A_3 early (witness 3) and A_1 late (witness 50); A_1 and A_3
  // never meet.  Index 3 enters first; once W changes below its copy, index 1
  // replaces it.
  const Family fam({FiniteSet{3, 50}, FiniteSet{50}, FiniteSet{}, FiniteSet{3}}, 64);
  StagedEnumeration w;
  w.schedule.resize(52);
  w.schedule[51] = {1};
  const auto result = permitting_run(fam, w, 55);

  REQUIRE(result.history.size() == 56);
  CHECK(result.history[4].codes == std::vector<Nat>{0, 6});    // <0,0>, <3,0>
  CHECK(result.history[4].chosen_index == Nat(3));
  CHECK(result.history[51].codes == std::vector<Nat>{0, 8});   // <0,0>, <1,2>
  CHECK(result.history[51].chosen_index == Nat(1));
  CHECK(result.history[51].removed_codes == std::vector<Nat>{6});
  CHECK(result.history[55].codes == std::vector<Nat>{0, 8});
  CHECK(result.subfamily.indices == std::vector<std::size_t>{0, 1});

  const auto report = oracle::check_permitting_invariants(fam, w, result);
  INFO(report.failure);
  CHECK(report.ok);
}

TEST_CASE("permitting precondition") {
  const Family fam({FiniteSet{}}, 4);
  CHECK_THROWS_AS(permitting_run(fam, {}, 5), BadInput);
}

TEST_CASE("escape subfamily") {
  SUBCASE("all-full family enumerates the indices in order") {
    const Family fam = all_full_family(5, 8);
    std::vector<Nat> fast;
    for (Nat s = 0; s < 8; ++s) fast.push_back(s);
    const auto j = escape_subfamily(fam, fast, 8);
    CHECK(j.indices == std::vector<std::size_t>{0, 0, 1, 2, 3, 4, 0, 0, 0});
  }
  SUBCASE("a zero bound never finds witnesses") {
    const Family fam({FiniteSet{1, 2}, FiniteSet{1}}, 4);
    const auto j = escape_subfamily(fam, std::vector<Nat>(6, 0), 6);
    CHECK(j.indices == std::vector<std::size_t>(7, 0));
  }
  SUBCASE("collects the ranged members reachable from the seed") {
    // member 0 replaced by {3} so the coding members with odd witnesses meet it
    Family coding = range_coding_family({5, 3}, 6, 16);
    std::vector<FiniteSet> sets;
    for (std::size_t i = 0; i < coding.member_count(); ++i)
      sets.push_back(coding.member(i).elements);
    sets[0] = FiniteSet{3};
    const Family fam(std::move(sets), 16);
    const auto j = escape_subfamily(fam, std::vector<Nat>(8, 16), 8);
    FiniteSet picked;
    for (std::size_t idx : j.indices) picked.insert(static_cast<Nat>(idx));
    CHECK(picked == FiniteSet{0, 3, 5});
  }
  SUBCASE("the literal coding family stalls on its singleton seed") {
    const Family fam = range_coding_family({5, 3}, 6, 16);
    const auto j = escape_subfamily(fam, std::vector<Nat>(8, 16), 8);
    CHECK(j.indices == std::vector<std::size_t>(9, 0));
  }
}

TEST_CASE("escape with the computed witness bound is maximal") {
  std::mt19937 rng(1616);
  for (int trial = 0; trial < 40; ++trial) {
    Family fam = testsupport::random_family(rng, 6, 32);
    if (fam.member(0).elements.empty()) {
      std::vector<FiniteSet> sets;
      for (std::size_t i = 0; i < fam.member_count(); ++i)
        sets.push_back(fam.member(i).elements);
      sets[0].insert(rng() % fam.horizon());
      fam = Family(std::move(sets), fam.horizon());
    }
    const Nat steps = 2 * fam.member_count() + 2;
    std::vector<Nat> fast;
    for (Nat s = 0; s < steps; ++s) fast.push_back(oracle::witness_bound(fam, s));
    const auto j = escape_subfamily(fam, fast, steps);
    CHECK(has_property(fam, j, PropertyTag::f()).ok());
    CHECK(is_maximal(fam, j, PropertyTag::f()).maximal);
  }
}

TEST_CASE("forcing conditions") {
  const Family fam = range_coding_family({5, 3}, 6, 16);
  CHECK(is_forcing_condition(fam, {3, 5, 4}));   // witness 3 <= 4
  CHECK_FALSE(is_forcing_condition(fam, {3, 5, 2}));
  CHECK(is_forcing_condition(fam, {2}));          // any length-1 string
  CHECK(is_forcing_condition(fam, {0, 0}));
  CHECK_FALSE(is_forcing_condition(fam, {9, 0}));  // payload out of range
}

TEST_CASE("forcing generic") {
  SUBCASE("maximality steps alone meet every addable index") {
    const Family fam({FiniteSet{1, 3}, FiniteSet{1}, FiniteSet{3, 5}}, 6);
    const auto j = forcing_generic(fam, {}, 4);
    CHECK(j.indices == std::vector<std::size_t>{0, 1});
    CHECK(has_property(fam, j, PropertyTag::f()).ok());
  }
  SUBCASE("a dense oracle can steer the condition") {
    const Family fam({FiniteSet{1, 3}, FiniteSet{1}, FiniteSet{3, 5}}, 6);
    std::vector<DenseOracle> dense(1);
    dense[0] = [&fam](const std::vector<Nat>& cond) -> std::optional<std::vector<Nat>> {
      std::vector<Nat> ext(cond.begin(), cond.end() - 1);
      ext.push_back(2);
      ext.push_back(3);  // witness 3 meets members 0 and 2
      if (!is_forcing_condition(fam, ext)) return std::nullopt;
      return ext;
    };
    const auto j = forcing_generic(fam, dense, 4);
    CHECK(j.indices == std::vector<std::size_t>{0, 2});
    CHECK(has_property(fam, j, PropertyTag::f()).ok());
  }
  SUBCASE("invalid oracle answers are rejected") {
    const Family fam({FiniteSet{1, 3}, FiniteSet{1}}, 6);
    std::vector<DenseOracle> dense(1);
    dense[0] = [](const std::vector<Nat>&) -> std::optional<std::vector<Nat>> {
      return std::vector<Nat>{1, 0};  // ignores the current payload
    };
    CHECK_THROWS_AS(forcing_generic(fam, dense, 3), BadDenseOracle);
  }
  SUBCASE("generic outputs keep the property on random families") {
    std::mt19937 rng(1717);
    for (int trial = 0; trial < 40; ++trial) {
      const Family fam = testsupport::random_family(rng, 6, 32);
      const auto j = forcing_generic(fam, {}, fam.member_count() + 2);
      CHECK(has_property(fam, j, PropertyTag::f()).ok());
    }
  }
}

TEST_CASE("good sequences") {
  const Family fam({FiniteSet{2, 4}, FiniteSet{1, 4}}, 6);
  SUBCASE("all-zero strings have no good numbers") {
    BitString sigma;
    sigma.length = 64;
    CHECK(good_sequence(sigma, fam).positions.empty());
  }
  SUBCASE("a single coded witness is picked up") {
    const Nat x = seq_encode({0, 2});  // tau = (0), bound 2, witness 2 in A_0
    BitString sigma;
    sigma.set(x);
    const auto gs = good_sequence(sigma, fam);
    CHECK(gs.positions == std::vector<Nat>{x});
    CHECK(gs.witness == std::vector<Nat>{0});
    CHECK(gs.bound == Nat(2));
  }
  SUBCASE("a one-bit whose coded bound misses the members is not good") {
    const Nat x = seq_encode({0, 0});  // bound 0 below min(A_0) = 2
    BitString sigma;
    sigma.set(x);
    CHECK(good_sequence(sigma, fam).positions.empty());
  }
  SUBCASE("incompatible later witnesses are skipped") {
    const Nat x1 = seq_encode({0, 2});
    const Nat x2 = seq_encode({1, 1});  // tau = (1): not an extension of (0)
    REQUIRE(x1 < x2);
    BitString sigma;
    sigma.set(x1);
    sigma.set(x2);
    const auto gs = good_sequence(sigma, fam);
    CHECK(gs.positions == std::vector<Nat>{x1});
  }
  SUBCASE("extending witnesses chain up") {
    const Nat x1 = seq_encode({0, 2});
    const Nat x2 = seq_encode({0, 1, 4});  // tau = (0,1), witness 4
    REQUIRE(x1 < x2);
    BitString sigma;
    sigma.set(x1);
    sigma.set(x2);
    const auto gs = good_sequence(sigma, fam);
    CHECK(gs.positions == std::vector<Nat>{x1, x2});
    CHECK(gs.witness == std::vector<Nat>{0, 1});
  }
}

TEST_CASE("generic run through the dense sets") {
  SUBCASE("no indices leave the string empty") {
    const Family fam({FiniteSet{1}, FiniteSet{2}}, 4);
    CHECK(pi01_generic_run(fam, {}, 5).indices.empty());
    CHECK(pi01_generic_run(fam, {0, 1}, 0).indices.empty());
  }
  SUBCASE("disjoint members are met by the disjointness disjunct") {
    const Family fam({FiniteSet{1}, FiniteSet{2}, FiniteSet{1, 3}}, 6);
    const auto j = pi01_generic_run(fam, {0, 1, 2}, 9);
    CHECK(j.indices == std::vector<std::size_t>{0, 2});
    CHECK(has_property(fam, j, PropertyTag::f()).ok());
  }
  SUBCASE("trivial families cannot start the construction") {
    const Family fam({FiniteSet{}, FiniteSet{}}, 4);
    CHECK_THROWS_AS(pi01_generic_run(fam, {0}, 4), FiniteMaximalFamily);
  }
  SUBCASE("outputs keep the property on random families") {
    std::mt19937 rng(1818);
    for (int trial = 0; trial < 40; ++trial) {
      const Family fam = testsupport::random_family(rng, 6, 32);
      std::vector<Nat> indices;
      for (std::size_t i = 0; i < fam.member_count(); ++i) indices.push_back(i);
      const auto j = pi01_generic_run(fam, indices, 2 * fam.member_count());
      CHECK(has_property(fam, j, PropertyTag::f()).ok());
    }
  }
}
