#pragma once

// Stage-based constructions: the hyperimmunity adversary, the permitting
// construction, the domination-escape subfamily, forcing with dense sets,
// and the good-sequence genericity machinery.
//
// Each construction is a single-threaded deterministic state machine; two
// runs over identical inputs produce bit-identical transcripts.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "maxlab/encoding.hpp"
#include "maxlab/errors.hpp"
#include "maxlab/families.hpp"

namespace maxlab {

// ---------------------------------------------------------------------------
// Strategy oracles
// ---------------------------------------------------------------------------

// A declarative strategy: entry x holds the value and the stage at which the
// answer for argument x first converges.  Answers never change once given.
// The stage convention requires, for a strategy installed at index e, that
// convergence stages are nondecreasing in x and that stage >= max(e, x, value).
struct StrategyOracle {
  struct Entry {
    Nat value = 0;
    Nat stage = 0;
  };

  std::vector<Entry> entries;

  void validate(std::size_t index) const {
    Nat prev = 0;
    for (std::size_t x = 0; x < entries.size(); ++x) {
      const auto& en = entries[x];
      if (en.stage < prev)
        throw BadInput("strategy convergence stages must be nondecreasing");
      if (en.stage < index || en.stage < x || en.stage < en.value)
        throw BadInput("strategy violates the stage convention");
      prev = en.stage;
    }
  }

  // The value of argument x if converged by stage s.
  std::optional<Nat> step(Nat x, Nat s) const {
    if (x >= entries.size() || entries[x].stage > s) return std::nullopt;
    return entries[x].value;
  }

  std::optional<Nat> convergence_stage(Nat x) const {
    if (x >= entries.size()) return std::nullopt;
    return entries[x].stage;
  }

  // Largest argument converged by stage s, if any.
  std::optional<Nat> largest_converged(Nat s) const {
    std::optional<Nat> out;
    for (std::size_t x = 0; x < entries.size() && entries[x].stage <= s; ++x)
      out = static_cast<Nat>(x);
    return out;
  }

  // The index sequence the strategy commits to within a run of the given
  // number of stages (arguments whose answers converge before the run ends).
  std::vector<Nat> induced_prefix(Nat stages) const {
    std::vector<Nat> out;
    for (const auto& en : entries) {
      if (en.stage >= stages) break;
      out.push_back(en.value);
    }
    return out;
  }
};

// ---------------------------------------------------------------------------
// Adversary construction
// ---------------------------------------------------------------------------

enum class AdvEventKind {
  TargetDefined,
  TargetRedefined,
  FollowersRetyped,
  FollowerBorn,
  Intersected,
  AcceptableStage,
  ComplementsFinalized,
  CapEngaged,
};

struct AdvEvent {
  Nat stage = 0;
  Nat substage = 0;
  int step = 0;
  AdvEventKind kind = AdvEventKind::TargetDefined;
  Nat e = 0;
  Nat n = 0;
  Nat value = 0;
  int follower_type = 0;
  std::vector<Nat> sigma;
  Nat set_a = 0;
  Nat set_b = 0;
  Nat witness = 0;

  bool operator==(const AdvEvent&) const = default;
};

struct ConstructionTranscript {
  std::vector<AdvEvent> events;

  bool operator==(const ConstructionTranscript&) const = default;

  // Final target value of substage e, if one was ever defined.
  std::optional<Nat> final_target(Nat e) const {
    std::optional<Nat> out;
    for (const auto& ev : events)
      if ((ev.kind == AdvEventKind::TargetDefined ||
           ev.kind == AdvEventKind::TargetRedefined) &&
          ev.e == e)
        out = ev.value;
    return out;
  }
};

// Enumeration caps for the combinatorial steps.  The per-stage growth of
// bounded strings is exponential in general, so long runs need both knobs;
// engaged caps are flagged in the transcript.
struct AdversaryCaps {
  std::optional<Nat> max_string_length;
  std::optional<std::size_t> max_items_per_step;
};

struct AdversaryResult {
  Family family;
  ConstructionTranscript transcript;
};

namespace adversary_detail {

struct FollowerRec {
  Nat e = 0;
  Nat n = 0;
  Nat value = 0;
  int type = 2;
  std::vector<Nat> sigma;
  Nat born_stage = 0;
};

class Runner {
 public:
  Runner(const std::vector<StrategyOracle>& strategies, Nat stages, AdversaryCaps caps)
      : strategies_(strategies), stages_(stages), caps_(caps) {
    if (stages == 0) throw BadInput("adversary run needs at least one stage");
    for (std::size_t e = 0; e < strategies_.size(); ++e) strategies_[e].validate(e);
  }

  AdversaryResult run() {
    for (Nat s = 0; s < stages_; ++s) {
      for (Nat e = 0; e <= s; ++e) {
        step1(s, e);
        step2(s, e);
        step3(s, e);
        step4(s, e);
      }
      log({s, s, 5, AdvEventKind::ComplementsFinalized, 0, 0, max_mentioned_});
    }
    return {build_family(), std::move(transcript_)};
  }

 private:
  // --- bookkeeping -------------------------------------------------------

  void mention(Nat x) { max_mentioned_ = std::max(max_mentioned_, x); }

  void touch_index(Nat v) {
    max_index_ = std::max(max_index_, v);
    mention(v);
  }

  Nat fresh(Nat s) {
    const Nat r = std::max(s, max_mentioned_) + 1;
    mention(r);
    return r;
  }

  Nat fresh_odd(Nat s) {
    Nat r = std::max(s, max_mentioned_) + 1;
    if (r % 2 == 0) ++r;
    mention(r);
    return r;
  }

  void log(AdvEvent ev) { transcript_.events.push_back(std::move(ev)); }

  std::optional<Nat> first_odd(Nat v) const {
    auto it = odds_.find(v);
    if (it == odds_.end() || it->second.empty()) return std::nullopt;
    return it->second.front();
  }

  std::optional<Nat> shared_odd(Nat a, Nat b) const {
    auto it = adj_.find(a);
    if (it == adj_.end()) return std::nullopt;
    auto jt = it->second.find(b);
    if (jt == it->second.end()) return std::nullopt;
    return jt->second;
  }

  void intersect(Nat a, Nat b, Nat s, Nat e, int step) {
    const Nat odd = fresh_odd(s);
    touch_index(a);
    touch_index(b);
    odds_[a].push_back(odd);
    if (b != a) {
      odds_[b].push_back(odd);
      if (!shared_odd(a, b)) {
        adj_[a][b] = odd;
        adj_[b][a] = odd;
      }
    }
    AdvEvent ev{s, e, step, AdvEventKind::Intersected};
    ev.set_a = a;
    ev.set_b = b;
    ev.witness = odd;
    log(std::move(ev));
  }

  // --- bounded strings ----------------------------------------------------

  bool singleton_bounded(Nat v, Nat bound) const {
    if (v > bound) return false;
    if (2 * v <= bound) return true;
    const auto fo = first_odd(v);
    return fo && *fo <= bound;
  }

  bool value_compatible(Nat w, const std::vector<Nat>& sigma, Nat bound) const {
    for (Nat v : sigma) {
      if (v == w) continue;
      const auto o = shared_odd(v, w);
      if (!o || *o > bound) return false;
    }
    return true;
  }

  Nat effective_len_cap(Nat bound) const {
    Nat cap = bound;
    if (caps_.max_string_length) cap = std::min(cap, *caps_.max_string_length);
    return cap;
  }

  // Candidate next entries for extending sigma under the bound: repeats of
  // values already present plus values sharing an early-enough odd with all
  // of them.  Ascending, deduplicated.
  std::vector<Nat> extension_candidates(const std::vector<Nat>& sigma, Nat bound) const {
    std::vector<Nat> distinct = sigma;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    std::vector<Nat> cands = distinct;  // repeats always compatible
    // Values adjacent to the first entry are the only possible new ones; the
    // neighbor map is keyed ascending, so stop at the entry bound.
    auto it = adj_.find(distinct.front());
    if (it != adj_.end()) {
      for (auto jt = it->second.begin(); jt != it->second.end() && jt->first <= bound;
           ++jt) {
        const auto [w, odd] = *jt;
        if (odd > bound) continue;
        if (!singleton_bounded(w, bound)) continue;
        if (value_compatible(w, distinct, bound)) cands.push_back(w);
      }
    }
    std::sort(cands.begin(), cands.end());
    cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
    return cands;
  }

  // Enumerates strings bounded by `bound` that extend `base` (including base
  // itself when it qualifies), shortest first and lexicographic within a
  // length, calling visit for each.  Length-first order keeps capped windows
  // spread across the short strings instead of sinking into the first root's
  // subtree.  Returns true when the cap cut the enumeration short.
  bool enumerate_extensions(const std::vector<Nat>& base, Nat bound,
                            const std::function<bool(const std::vector<Nat>&)>& visit,
                            std::optional<Nat> len_override = std::nullopt) const {
    Nat len_cap = effective_len_cap(bound);
    if (len_override) len_cap = std::min(len_cap, *len_override);
    std::size_t budget = caps_.max_items_per_step
                             ? *caps_.max_items_per_step
                             : std::numeric_limits<std::size_t>::max();
    bool capped = false;
    bool stop = false;

    auto bounded_base = [&]() {
      if (base.empty() || base.size() > len_cap) return false;
      for (Nat v : base)
        if (!singleton_bounded(v, bound)) return false;
      for (std::size_t i = 0; i < base.size(); ++i)
        for (std::size_t j = i + 1; j < base.size(); ++j) {
          if (base[i] == base[j]) continue;
          const auto o = shared_odd(base[i], base[j]);
          if (!o || *o > bound) return false;
        }
      return true;
    };

    // Emits exactly the length-`target` extensions of sigma, lex order.
    std::function<void(std::vector<Nat>&, std::size_t)> emit =
        [&](std::vector<Nat>& sigma, std::size_t target) {
          if (stop) return;
          if (sigma.size() == target) {
            if (budget == 0) {
              capped = true;
              stop = true;
              return;
            }
            --budget;
            if (visit(sigma)) stop = true;
            return;
          }
          for (Nat w : extension_candidates(sigma, bound)) {
            sigma.push_back(w);
            emit(sigma, target);
            sigma.pop_back();
            if (stop) return;
          }
        };

    if (base.empty()) {
      for (std::size_t target = 1; target <= len_cap && !stop; ++target) {
        for (Nat v = 0; v <= bound && !stop; ++v) {
          if (!singleton_bounded(v, bound)) continue;
          std::vector<Nat> sigma{v};
          emit(sigma, target);
        }
      }
    } else if (bounded_base()) {
      std::vector<Nat> sigma = base;
      for (std::size_t target = base.size(); target <= len_cap && !stop; ++target)
        emit(sigma, target);
    }
    return capped;
  }

  // --- construction steps ------------------------------------------------

  void step1(Nat s, Nat e) {
    auto it = targets_.find(e);
    if (it == targets_.end()) {
      const Nat t = fresh(s);
      touch_index(t);
      targets_[e] = t;
      log({s, e, 1, AdvEventKind::TargetDefined, e, 0, t});
      return;
    }
    if (e < strategies_.size()) {
      const auto s0 = strategies_[e].convergence_stage(0);
      if (s0 && *s0 == s) {
        const Nat t = fresh(s);
        touch_index(t);
        targets_[e] = t;
        log({s, e, 1, AdvEventKind::TargetRedefined, e, 0, t});
        Nat flipped = 0;
        for (std::size_t fi : followers_by_e_[e]) {
          if (followers_[fi].type == 1) {
            followers_[fi].type = 2;
            ++flipped;
          }
        }
        AdvEvent ev{s, e, 1, AdvEventKind::FollowersRetyped, e};
        ev.value = flipped;
        log(std::move(ev));
      }
    }
  }

  void step2(Nat s, Nat e) {
    const Nat t_e = targets_.at(e);
    const bool capped = enumerate_extensions({}, s, [&](const std::vector<Nat>& sigma) {
      const Nat n = static_cast<Nat>(followers_by_e_[e].size());
      const Nat value = fresh(s);
      touch_index(value);
      int type = 2;
      for (Nat v : sigma)
        if (v == t_e) {
          type = 1;
          break;
        }
      FollowerRec rec{e, n, value, type, sigma, s};
      follower_by_value_[value] = followers_.size();
      followers_by_e_[e].push_back(followers_.size());
      followers_.push_back(rec);
      AdvEvent ev{s, e, 2, AdvEventKind::FollowerBorn, e, n, value};
      ev.follower_type = type;
      ev.sigma = sigma;
      log(std::move(ev));
      for (Nat v : sigma) intersect(value, v, s, e, 2);
      return false;
    });
    if (capped) log({s, e, 2, AdvEventKind::CapEngaged});
  }

  void step3(Nat s, Nat e) {
    const Nat t_e = targets_.at(e);
    std::size_t budget = caps_.max_items_per_step
                             ? *caps_.max_items_per_step
                             : std::numeric_limits<std::size_t>::max();
    bool capped = false;
    for (std::size_t fi : followers_by_e_[e]) {
      const auto& rec = followers_[fi];
      if (rec.born_stage >= s) continue;
      if (budget == 0) {
        capped = true;
        break;
      }
      std::size_t local = budget;
      enumerate_extensions(rec.sigma, s, [&](const std::vector<Nat>& sigma) {
        if (local == 0) return true;
        --local;
        if (rec.type == 2) {
          for (Nat v : sigma)
            if (v == t_e) return false;
        }
        for (Nat v : sigma) intersect(rec.value, v, s, e, 3);
        return false;
      });
      budget = local;
    }
    if (capped) log({s, e, 3, AdvEventKind::CapEngaged});
  }

  struct Viable {
    std::vector<Nat> sigma;
    std::optional<std::size_t> k;  // least witnessing position for strategy e
  };

  // Viable strings for e at stage s = s_{e,x}: chains of bounded strings
  // following the convergence stages, each link ranging over followers of
  // every earlier strategy index.
  std::vector<Viable> viable_strings(Nat e, Nat x) {
    const auto& strat = strategies_[e];
    std::vector<Viable> level;
    enumerate_extensions(
        {}, *strat.convergence_stage(0),
        [&](const std::vector<Nat>& sigma) {
          level.push_back({sigma, std::nullopt});
          return false;
        },
        Nat(1));
    for (Nat i = 0; i < x; ++i) {
      const Nat next_bound = *strat.convergence_stage(i + 1);
      std::map<std::vector<Nat>, std::optional<std::size_t>> next;
      for (const auto& cur : level) {
        enumerate_extensions(cur.sigma, next_bound, [&](const std::vector<Nat>& sigma) {
          if (sigma.size() <= cur.sigma.size()) return false;  // proper only
          // For each j <= i there must be a position holding a j-follower
          // whose defining string tau satisfies cur.sigma <= tau < sigma.
          std::optional<std::size_t> k_for_e;
          bool all_found = true;
          for (Nat j = 0; j <= i && all_found; ++j) {
            bool found = false;
            for (std::size_t k = cur.sigma.size(); k < sigma.size(); ++k) {
              auto fit = follower_by_value_.find(sigma[k]);
              if (fit == follower_by_value_.end()) continue;
              const auto& rec = followers_[fit->second];
              if (rec.e != j) continue;
              if (!is_prefix(cur.sigma, rec.sigma)) continue;
              if (!is_proper_prefix(rec.sigma, sigma)) continue;
              found = true;
              if (j == e && i == x - 1) k_for_e = k;  // ascending scan: least k
              break;
            }
            if (!found) all_found = false;
          }
          if (!all_found) return false;
          auto [it, inserted] = next.emplace(sigma, k_for_e);
          if (!inserted && k_for_e && (!it->second || *k_for_e < *it->second))
            it->second = k_for_e;
          return false;
        });
      }
      level.clear();
      for (auto& [sigma, k] : next) level.push_back({sigma, k});
    }
    return level;
  }

  static bool is_prefix(const std::vector<Nat>& a, const std::vector<Nat>& b) {
    if (a.size() > b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i] != b[i]) return false;
    return true;
  }

  static bool is_proper_prefix(const std::vector<Nat>& a, const std::vector<Nat>& b) {
    return a.size() < b.size() && is_prefix(a, b);
  }

  bool disjoint_from(Nat a, Nat b) const { return !shared_odd(a, b).has_value(); }

  void step4(Nat s, Nat e) {
    if (e >= strategies_.size()) return;
    const auto& strat = strategies_[e];
    const auto x_opt = strat.largest_converged(s);
    if (!x_opt) return;
    const Nat x = *x_opt;
    if (*strat.convergence_stage(x) != s) return;
    if (x <= e) return;  // k^sigma would be undefined

    const Nat t_e = targets_.at(e);
    auto viables = viable_strings(e, x);
    if (viables.empty()) return;  // stages with no viable string do not count

    // All viable strings need a defined k; collect the flagged positions.
    std::vector<Nat> flagged;
    for (const auto& v : viables) {
      if (!v.k) return;
      flagged.push_back(v.sigma[*v.k]);
    }

    // Acceptability: every viable string passes (b) and (c); remember the
    // largest admissible i per string for the intersection pass.
    std::vector<std::size_t> chosen;
    for (const auto& v : viables) {
      if (!disjoint_from(v.sigma[*v.k], t_e)) return;
      std::optional<std::size_t> best;
      for (std::size_t i = 0; i < *v.k; ++i) {
        auto fit = follower_by_value_.find(v.sigma[i]);
        if (fit == follower_by_value_.end() || followers_[fit->second].e != e) continue;
        if (!disjoint_from(v.sigma[i], t_e)) continue;
        bool clean = true;
        for (std::size_t j = 0; j <= i && clean; ++j)
          for (Nat f : flagged)
            if (v.sigma[j] == f) {
              clean = false;
              break;
            }
        if (clean) best = i;
      }
      if (!best) return;
      chosen.push_back(*best);
    }

    AdvEvent ev{s, e, 4, AdvEventKind::AcceptableStage, e};
    ev.value = x;
    log(std::move(ev));
    for (std::size_t vi = 0; vi < viables.size(); ++vi) {
      for (std::size_t j = 0; j <= chosen[vi]; ++j)
        intersect(viables[vi].sigma[j], t_e, s, e, 4);
    }
  }

  Family build_family() const {
    const std::size_t count = static_cast<std::size_t>(max_index_) + 1;
    std::vector<FiniteSet> members(count);
    Nat max_elem = 0;
    for (std::size_t i = 0; i < count; ++i) {
      members[i].insert(2 * static_cast<Nat>(i));
      max_elem = std::max(max_elem, 2 * static_cast<Nat>(i));
      auto it = odds_.find(static_cast<Nat>(i));
      if (it != odds_.end())
        for (Nat o : it->second) {
          members[i].insert(o);
          max_elem = std::max(max_elem, o);
        }
    }
    return Family(std::move(members), max_elem + 1);
  }

  std::vector<StrategyOracle> strategies_;
  Nat stages_;
  AdversaryCaps caps_;

  ConstructionTranscript transcript_;
  std::map<Nat, std::vector<Nat>> odds_;
  std::map<Nat, std::map<Nat, Nat>> adj_;
  std::vector<FollowerRec> followers_;
  std::map<Nat, std::vector<std::size_t>> followers_by_e_;
  std::map<Nat, std::size_t> follower_by_value_;
  std::map<Nat, Nat> targets_;
  Nat max_mentioned_ = 0;
  Nat max_index_ = 0;
};

}  // namespace adversary_detail

// Replays the adversary construction for the given number of stages and
// returns the truncated family together with the full event transcript.
inline AdversaryResult adversary_run(const std::vector<StrategyOracle>& strategies,
                                     Nat stages, AdversaryCaps caps = {}) {
  adversary_detail::Runner runner(strategies, stages, caps);
  return runner.run();
}

struct AuditVerdict {
  bool diagonalized = false;
  std::string reason;
};

// Diagonalization audit: the subfamily named by J either already fails the
// pairwise intersection property, or the target set meets every listed
// member while staying outside the subfamily (the contradiction pattern).
// Finite truncations cannot always settle it, hence the inconclusive case.
inline AuditVerdict adversary_audit(const ConstructionTranscript& transcript,
                                    const Family& fam, const SubfamilyIndex& sub,
                                    Nat e) {
  if (sub.indices.empty()) return {false, "empty index prefix"};
  const auto verdict = has_property(fam, sub, PropertyTag::dbar(2));
  if (!verdict.ok()) return {true, "subfamily fails the pairwise intersection property"};

  const auto target = transcript.final_target(e);
  if (!target) return {false, "no target was defined for this strategy"};
  const Nat t = *target;
  if (t >= fam.member_count()) return {false, "target index beyond the truncation"};
  for (std::size_t idx : sub.indices)
    if (static_cast<Nat>(idx) == t)
      return {false, "target entered the subfamily's index prefix"};
  const auto& target_set = fam.member(static_cast<std::size_t>(t)).elements;
  for (std::size_t idx : sub.indices)
    if (target_set.intersect(fam.member(idx).elements).empty())
      return {false, "target misses a listed member"};
  return {true, "target meets every listed member yet lies outside the subfamily"};
}

// ---------------------------------------------------------------------------
// Permitting
// ---------------------------------------------------------------------------

// A monotone staged enumeration: the elements listed at stage s become
// members of W[s] and stay forever.
struct StagedEnumeration {
  std::vector<std::vector<Nat>> schedule;

  FiniteSet at_stage(Nat s) const {
    FiniteSet out;
    for (std::size_t t = 0; t < schedule.size() && t <= s; ++t)
      for (Nat w : schedule[t]) out.insert(w);
    return out;
  }
};

struct PermitStage {
  Nat stage = 0;
  std::vector<Nat> codes;  // M[s], ascending pair codes <i,n>
  std::optional<Nat> chosen_index;
  std::vector<Nat> removed_codes;

  bool operator==(const PermitStage&) const = default;
};

struct PermitResult {
  std::vector<PermitStage> history;
  SubfamilyIndex subfamily;
};

// The permitting construction: M[0] = {<0,0>}; at each stage the least
// admissible index i (its joint witness reaches down to l(i,s), no copies
// strictly between, and every higher copy is permitted by a W-change below
// its code) replaces everything above l(i,s) by a fresh copy of i.
inline PermitResult permitting_run(const Family& fam, const StagedEnumeration& w, Nat stages) {
  if (fam.member_count() == 0 || fam.member(0).elements.empty())
    throw BadInput("permitting needs a family whose first member is nonempty");

  std::map<Nat, Nat> copies;  // index -> code of its copy in M[s]
  copies[0] = pair(0, 0);

  PermitResult out;
  auto snapshot = [&](Nat stage, std::optional<Nat> chosen, std::vector<Nat> removed) {
    PermitStage st;
    st.stage = stage;
    for (const auto& [i, code] : copies) st.codes.push_back(code);
    std::sort(st.codes.begin(), st.codes.end());
    st.chosen_index = chosen;
    st.removed_codes = std::move(removed);
    out.history.push_back(std::move(st));
  };
  snapshot(0, std::nullopt, {});

  for (Nat s = 0; s < stages; ++s) {
    const FiniteSet w_now = w.at_stage(s);
    const FiniteSet w_next = w.at_stage(s + 1);
    const FiniteSet w_new = w_next.minus(w_now);

    // l(i,s) per candidate i: the greatest index k with a copy such that a
    // witness <= s meets A_i and every copied A_j with j <= k.
    auto ell = [&](Nat i) -> std::optional<Nat> {
      std::optional<Nat> best;
      for (auto it = copies.rbegin(); it != copies.rend(); ++it) {
        const Nat k = it->first;
        FiniteSet joint = fam.member(static_cast<std::size_t>(i)).elements;
        for (const auto& [j, code] : copies) {
          if (j > k) break;
          joint = joint.intersect(fam.member(static_cast<std::size_t>(j)).elements);
        }
        bool witnessed = false;
        for (Nat x : joint)
          if (x <= s) {
            witnessed = true;
            break;
          }
        if (witnessed) {
          best = k;
          break;
        }
      }
      return best;
    };

    std::optional<Nat> chosen;
    std::optional<Nat> chosen_ell;
    for (Nat i = 0; i <= s && i < fam.member_count(); ++i) {
      if (copies.count(i)) continue;
      const auto l = ell(i);
      if (!l) continue;
      bool between = false;
      for (const auto& [j, code] : copies)
        if (*l < j && j < i) {
          between = true;
          break;
        }
      if (between) continue;
      bool permitted = true;
      for (const auto& [j, code] : copies) {
        if (j <= *l) continue;
        bool changed_below = false;
        for (Nat wn : w_new)
          if (wn < code) {
            changed_below = true;
            break;
          }
        if (!changed_below) {
          permitted = false;
          break;
        }
      }
      if (!permitted) continue;
      chosen = i;
      chosen_ell = l;
      break;
    }

    std::vector<Nat> removed;
    if (chosen) {
      // The fresh copy clears everything in the pre-removal M[s] and the
      // newly enumerated elements.
      Nat floor = 0;
      for (const auto& [j, code] : copies) floor = std::max(floor, code);
      for (Nat wn : w_new) floor = std::max(floor, wn);
      for (auto it = copies.begin(); it != copies.end();) {
        if (it->first > *chosen_ell) {
          removed.push_back(it->second);
          it = copies.erase(it);
        } else {
          ++it;
        }
      }
      Nat n = 0;
      while (pair(*chosen, n) <= floor) ++n;
      copies[*chosen] = pair(*chosen, n);
    }
    snapshot(s + 1, chosen, std::move(removed));
  }

  for (const auto& [i, code] : copies)
    out.subfamily.indices.push_back(static_cast<std::size_t>(i));
  return out;
}

// ---------------------------------------------------------------------------
// Escape subfamily
// ---------------------------------------------------------------------------

// The witness-chasing recursion: J(0) = 0, and at each step the least index
// not yet picked whose witness against everything picked so far stays below
// the fast function.
inline SubfamilyIndex escape_subfamily(const Family& fam, const std::vector<Nat>& fast,
                                       Nat steps) {
  if (fam.member_count() == 0) throw BadIndex("family has no members");
  if (fast.size() < steps) throw BadInput("fast function shorter than the run");
  SubfamilyIndex j;
  j.indices.push_back(0);
  FiniteSet joint = fam.member(0).elements;
  FiniteSet picked{0};
  for (Nat s = 0; s < steps; ++s) {
    std::optional<std::size_t> next;
    for (Nat i = 0; i <= s && i < fam.member_count(); ++i) {
      if (picked.contains(i)) continue;
      const FiniteSet meet = joint.intersect(fam.member(static_cast<std::size_t>(i)).elements);
      bool witnessed = false;
      for (Nat x : meet)
        if (x <= fast[static_cast<std::size_t>(s)]) {
          witnessed = true;
          break;
        }
      if (witnessed) {
        next = static_cast<std::size_t>(i);
        break;
      }
    }
    if (next) {
      j.indices.push_back(*next);
      picked.insert(static_cast<Nat>(*next));
      joint = joint.intersect(fam.member(*next).elements);
    } else {
      j.indices.push_back(0);
    }
  }
  return j;
}

// ---------------------------------------------------------------------------
// Forcing
// ---------------------------------------------------------------------------

// A condition is a string whose last entry bounds a witness common to all
// the members its other entries name.  Any length-1 string qualifies.
inline bool is_forcing_condition(const Family& fam, const std::vector<Nat>& entries) {
  if (entries.empty()) return false;
  for (std::size_t i = 0; i + 1 < entries.size(); ++i)
    if (entries[i] >= fam.member_count()) return false;
  if (entries.size() == 1) return true;
  FiniteSet joint;
  bool first = true;
  for (std::size_t i = 0; i + 1 < entries.size(); ++i) {
    const auto& m = fam.member(static_cast<std::size_t>(entries[i])).elements;
    joint = first ? m : joint.intersect(m);
    first = false;
  }
  for (Nat x : joint)
    if (x <= entries.back()) return true;
  return false;
}

// Extension compares payloads only: the final bound entries are scratch.
inline bool forcing_extends(const std::vector<Nat>& ext, const std::vector<Nat>& base) {
  if (ext.empty() || base.empty()) return false;
  if (ext.size() < base.size()) return false;
  for (std::size_t i = 0; i + 1 < base.size(); ++i)
    if (ext[i] != base[i]) return false;
  return true;
}

using DenseOracle =
    std::function<std::optional<std::vector<Nat>>(const std::vector<Nat>&)>;

// Alternates user-supplied dense steps with the built-in maximality steps
// that try to force each index into the condition's payload.  The returned
// index string is the union of all payloads, and its subfamily always has
// the full intersection property within the horizon.
inline SubfamilyIndex forcing_generic(const Family& fam,
                                      const std::vector<DenseOracle>& dense, Nat steps) {
  if (!fam.nontrivial()) throw BadInput("forcing needs a nontrivial family");
  std::vector<Nat> cond;
  for (std::size_t i = 0; i < fam.member_count(); ++i) {
    if (!fam.member(i).elements.empty()) {
      cond = {static_cast<Nat>(i), fam.member(i).elements.min()};
      break;
    }
  }

  for (Nat e = 0; e < steps; ++e) {
    if (e < dense.size() && dense[e]) {
      if (auto ext = dense[e](cond)) {
        if (!is_forcing_condition(fam, *ext) || !forcing_extends(*ext, cond))
          throw BadDenseOracle("dense oracle returned a non-extension");
        cond = std::move(*ext);
      }
    }
    // Maximality step: adjoin e to the payload when a witness allows it.
    bool present = false;
    for (std::size_t i = 0; i + 1 < cond.size(); ++i)
      if (cond[i] == e) {
        present = true;
        break;
      }
    if (present || e >= fam.member_count()) continue;
    FiniteSet joint = fam.member(static_cast<std::size_t>(e)).elements;
    for (std::size_t i = 0; i + 1 < cond.size(); ++i)
      joint = joint.intersect(fam.member(static_cast<std::size_t>(cond[i])).elements);
    if (!joint.empty()) {
      std::vector<Nat> extended(cond.begin(), cond.end() - 1);
      extended.push_back(e);
      extended.push_back(joint.min());
      cond = std::move(extended);
    }
  }

  SubfamilyIndex out;
  for (std::size_t i = 0; i + 1 < cond.size(); ++i)
    out.indices.push_back(static_cast<std::size_t>(cond[i]));
  return out;
}

// ---------------------------------------------------------------------------
// Good sequences and genericity
// ---------------------------------------------------------------------------

// A finite bit string stored sparsely: the positions of its ones, ascending.
// Positions coded by the sequence codec get large, so dense storage is out.
struct BitString {
  Nat length = 0;
  std::vector<Nat> ones;

  void set(Nat x) {
    auto it = std::lower_bound(ones.begin(), ones.end(), x);
    if (it == ones.end() || *it != x) ones.insert(it, x);
    length = std::max(length, x + 1);
  }

  bool test(Nat x) const {
    return x < length && std::binary_search(ones.begin(), ones.end(), x);
  }
};

using SeqCoder = std::function<std::vector<Nat>(Nat)>;

inline SeqCoder default_seq_coder() {
  return [](Nat x) { return seq_decode(x); };
}

struct GoodSequence {
  std::vector<Nat> positions;    // x_0 ... x_n
  std::vector<Nat> witness;      // tau of the last good number
  std::optional<Nat> bound;      // b of the last good number
};

// A position x is good for sigma when sigma(x) = 1 and its coded string
// tau|b has a witness y <= b common to all the members tau names.  The good
// sequence takes the least good number, then repeatedly the least later one
// whose witness string properly extends the previous witness.
inline GoodSequence good_sequence(const BitString& sigma, const Family& fam,
                                  const SeqCoder& coder = default_seq_coder()) {
  GoodSequence out;
  auto good_witness = [&](Nat x) -> std::optional<std::pair<std::vector<Nat>, Nat>> {
    std::vector<Nat> coded = coder(x);
    if (coded.empty()) return std::nullopt;
    const Nat b = coded.back();
    coded.pop_back();
    for (Nat v : coded)
      if (v >= fam.member_count()) return std::nullopt;
    if (coded.empty()) return std::make_pair(coded, b);
    FiniteSet joint = fam.member(static_cast<std::size_t>(coded[0])).elements;
    for (std::size_t i = 1; i < coded.size(); ++i)
      joint = joint.intersect(fam.member(static_cast<std::size_t>(coded[i])).elements);
    for (Nat y : joint)
      if (y <= b) return std::make_pair(coded, b);
    return std::nullopt;
  };

  for (Nat x : sigma.ones) {
    if (x >= sigma.length) break;
    const auto gw = good_witness(x);
    if (!gw) continue;
    if (out.positions.empty()) {
      out.positions.push_back(x);
      out.witness = gw->first;
      out.bound = gw->second;
      continue;
    }
    if (gw->first.size() > out.witness.size() &&
        std::equal(out.witness.begin(), out.witness.end(), gw->first.begin())) {
      out.positions.push_back(x);
      out.witness = gw->first;
      out.bound = gw->second;
    }
  }
  return out;
}

// Builds a bit string whose good sequence meets the dense set of each
// requested index, via the explicit zero-padded single-bit extension, then
// reads the subfamily off the final witness string.  The steps parameter
// budgets how many extensions may be performed.
inline SubfamilyIndex pi01_generic_run(const Family& fam, const std::vector<Nat>& indices,
                                       Nat steps) {
  for (Nat i : indices)
    if (i >= fam.member_count()) throw BadIndex("dense-set index out of range");

  BitString sigma;
  Nat used = 0;

  auto met = [&](Nat i) {
    const auto gs = good_sequence(sigma, fam);
    if (gs.positions.empty()) return false;
    for (Nat v : gs.witness)
      if (v == i) return true;
    FiniteSet joint = fam.member(static_cast<std::size_t>(i)).elements;
    for (Nat v : gs.witness)
      joint = joint.intersect(fam.member(static_cast<std::size_t>(v)).elements);
    return joint.empty();
  };

  for (Nat i : indices) {
    if (met(i)) continue;
    if (used == steps) break;
    const auto gs = good_sequence(sigma, fam);
    std::vector<Nat> tau;
    Nat y_min = 0;
    if (gs.positions.empty()) {
      std::optional<Nat> j;
      for (Nat cand = i; cand < fam.member_count(); ++cand)
        if (!fam.member(static_cast<std::size_t>(cand)).elements.empty()) {
          j = cand;
          break;
        }
      if (!j)
        throw FiniteMaximalFamily(
            "no member can extend the construction; the family has a finite "
            "maximal subfamily within the horizon");
      tau = {*j};
      y_min = fam.member(static_cast<std::size_t>(*j)).elements.min();
    } else {
      FiniteSet joint = fam.member(static_cast<std::size_t>(gs.witness[0])).elements;
      for (std::size_t k = 1; k < gs.witness.size(); ++k)
        joint = joint.intersect(fam.member(static_cast<std::size_t>(gs.witness[k])).elements);
      std::optional<Nat> j;
      FiniteSet best;
      for (Nat cand = i; cand < fam.member_count(); ++cand) {
        const FiniteSet meet =
            joint.intersect(fam.member(static_cast<std::size_t>(cand)).elements);
        if (!meet.empty()) {
          j = cand;
          best = meet;
          break;
        }
      }
      if (!j)
        throw FiniteMaximalFamily(
            "no member can extend the construction; the family has a finite "
            "maximal subfamily within the horizon");
      tau = gs.witness;
      tau.push_back(*j);
      y_min = best.min();
    }
    // Least b >= the witness with a coded position past the current string.
    Nat b = y_min;
    auto position = [&](Nat bb) {
      std::vector<Nat> full = tau;
      full.push_back(bb);
      return seq_encode(full);
    };
    while (position(b) < sigma.length) ++b;
    sigma.set(position(b));
    ++used;
  }

  const auto gs = good_sequence(sigma, fam);
  SubfamilyIndex out;
  for (Nat v : gs.witness) out.indices.push_back(static_cast<std::size_t>(v));
  return out;
}

}  // namespace maxlab
