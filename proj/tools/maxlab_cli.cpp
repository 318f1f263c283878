// maxlab: reproducible command-line experiments over the library, with JSON
// input/output.  Every produced document embeds its command and input, so it
// can be handed back to `maxlab verify oracle` for an independent
// brute-force re-check.
//
// Exit codes: 0 success, 1 domain error, 2 usage or schema error.

#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "maxlab/json_io.hpp"
#include "maxlab/maxlab.hpp"

using maxlab::Family;
using maxlab::FiniteSet;
using maxlab::Nat;
using maxlab::io::Json;
using maxlab::io::SchemaError;

namespace {

Json read_json(const std::string& path) {
  try {
    if (path == "-") return Json::parse(std::cin);
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open input file '" + path + "'");
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed JSON: ") + e.what());
  }
}

void write_json(const std::string& path, const Json& doc) {
  if (path == "-") {
    std::cout << doc.dump() << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) throw SchemaError("cannot open output file '" + path + "'");
  out << doc.dump() << "\n";
}

const char* verdict_name(maxlab::PropertyVerdict::Kind kind) {
  switch (kind) {
    case maxlab::PropertyVerdict::Kind::Holds: return "holds";
    case maxlab::PropertyVerdict::Kind::Vacuous: return "vacuous";
    default: return "fails";
  }
}

// ---------------------------------------------------------------------------
// Command handlers
// ---------------------------------------------------------------------------

Json family_check(const Json& in) {
  const Family fam = maxlab::io::family_from(maxlab::io::field(in, "family"));
  const auto sub = maxlab::io::subfamily_from(maxlab::io::field(in, "subfamily"));
  const auto p = maxlab::io::property_from(maxlab::io::field(in, "property"));
  const auto v = maxlab::has_property(fam, sub, p);
  Json out{{"verdict", verdict_name(v.kind)}};
  if (!v.witness_members.empty()) {
    Json members = Json::array();
    for (std::size_t i : v.witness_members) members.push_back(i);
    out["witness_members"] = std::move(members);
  }
  if (v.witness_element) out["witness_element"] = *v.witness_element;
  return out;
}

Json family_greedy(const Json& in) {
  const Family fam = maxlab::io::family_from(maxlab::io::field(in, "family"));
  const auto p = maxlab::io::property_from(maxlab::io::field(in, "property"));
  std::size_t start = 0;
  if (in.contains("start")) start = static_cast<std::size_t>(maxlab::io::nat_field(in, "start"));
  const auto res = maxlab::greedy_max_subfamily(fam, p, start);
  Json out = maxlab::io::to_json(res.sub);
  out["exhausted"] = res.exhausted;
  return out;
}

Json family_tilde(const Json& in) {
  const Family fam = maxlab::io::family_from(maxlab::io::field(in, "family"));
  const auto n = static_cast<unsigned>(maxlab::io::nat_field(in, "n"));
  const Nat stages = maxlab::io::nat_field(in, "stages");
  const Json transformed = maxlab::io::to_json(maxlab::tilde_transform(fam, n, stages));
  return Json{{"family", transformed}};
}

Json family_encode_range(const Json& in) {
  const auto f = maxlab::io::nat_list(maxlab::io::field(in, "f"), "'f'");
  const auto members = static_cast<std::size_t>(maxlab::io::nat_field(in, "members"));
  const Nat horizon = maxlab::io::nat_field(in, "horizon");
  const Json coded = maxlab::io::to_json(maxlab::range_coding_family(f, members, horizon));
  return Json{{"family", coded}};
}

Json family_decode_range(const Json& in) {
  const Family fam = maxlab::io::family_from(maxlab::io::field(in, "family"));
  const auto sub = maxlab::io::subfamily_from(maxlab::io::field(in, "subfamily"));
  const auto p = maxlab::io::property_from(maxlab::io::field(in, "property"));
  const auto res = maxlab::decode_range(fam, sub, p);
  return Json{{"decoded", maxlab::io::to_json(res.decoded)},
              {"exceptions", maxlab::io::to_json(res.exceptions)}};
}

Json poset_zl1(const Json& in) {
  const auto pos = maxlab::io::poset_from(maxlab::io::field(in, "poset"));
  const auto start = static_cast<std::size_t>(maxlab::io::nat_field(in, "start"));
  const auto res = maxlab::zl1_climb(pos, start);
  Json chain = Json::array();
  for (std::size_t q : res.chain) chain.push_back(q);
  return Json{{"chain", std::move(chain)}, {"top", res.top}};
}

Json poset_maximals(const Json& in) {
  const auto pos = maxlab::io::poset_from(maxlab::io::field(in, "poset"));
  Json arr = Json::array();
  for (std::size_t p : maxlab::maximal_elements(pos)) arr.push_back(p);
  return Json{{"maximals", std::move(arr)}};
}

Json poset_assign(const Json& in) {
  const auto pos = maxlab::io::poset_from(maxlab::io::field(in, "poset"));
  Json arr = Json::array();
  for (std::size_t q : maxlab::maximal_assignment(pos)) arr.push_back(q);
  return Json{{"assignment", std::move(arr)}};
}

Json poset_reversal(const Json& in) {
  const auto f = maxlab::io::nat_list(maxlab::io::field(in, "f"), "'f'");
  const auto members = static_cast<std::size_t>(maxlab::io::nat_field(in, "members"));
  const auto stages = static_cast<std::size_t>(maxlab::io::nat_field(in, "stages"));
  const Json decoded = maxlab::io::to_json(maxlab::zl_reversal_decode(f, members, stages));
  return Json{{"decoded", decoded}};
}

Json fcp_max(const Json& in) {
  const auto pred = maxlab::io::predicate_from(maxlab::io::field(in, "pred"));
  const auto set = maxlab::io::finite_set_from(maxlab::io::field(in, "set"));
  const Json kept = maxlab::io::to_json(maxlab::fcp_greedy_max(pred, set));
  return Json{{"kept", kept}};
}

Json fcp_sigma1(const Json& in) {
  const auto pred = maxlab::io::predicate_from(maxlab::io::field(in, "pred"));
  const auto set = maxlab::io::finite_set_from(maxlab::io::field(in, "set"));
  const auto res = maxlab::sigma1_minimal_removal(pred, set);
  return Json{{"kept", maxlab::io::to_json(res.kept)},
              {"removed", maxlab::io::to_json(res.removed)}};
}

Json fcp_sequential(const Json& in) {
  const auto f = maxlab::io::nat_list(maxlab::io::field(in, "f"), "'f'");
  const auto count = static_cast<std::size_t>(maxlab::io::nat_field(in, "count"));
  Json arr = Json::array();
  for (const auto& s : maxlab::sequential_gadget(f, count))
    arr.push_back(maxlab::io::to_json(s));
  return Json{{"sets", std::move(arr)}};
}

Json closure_cl(const Json& in) {
  const auto op = maxlab::io::det_op_from(maxlab::io::field(in, "op"));
  const auto set = maxlab::io::finite_set_from(maxlab::io::field(in, "set"));
  const Json closure = maxlab::io::to_json(maxlab::cl(op, set));
  return Json{{"closure", closure}};
}

Json closure_closed(const Json& in) {
  const auto op = maxlab::io::det_op_from(maxlab::io::field(in, "op"));
  const auto set = maxlab::io::finite_set_from(maxlab::io::field(in, "set"));
  return Json{{"closed", maxlab::is_closed(op, set)}};
}

Json closure_ce_max(const Json& in) {
  const auto op = maxlab::io::det_op_from(maxlab::io::field(in, "op"));
  const auto pred = maxlab::io::predicate_from(maxlab::io::field(in, "pred"));
  const auto ambient = maxlab::io::finite_set_from(maxlab::io::field(in, "ambient"));
  const auto seed = maxlab::io::finite_set_from(maxlab::io::field(in, "seed"));
  const Json solved = maxlab::io::to_json(maxlab::ce_greedy_max(op, pred, ambient, seed));
  return Json{{"maximal_set", solved}};
}

Json closure_prime_gadget(const Json& in) {
  const auto f = maxlab::io::nat_list(maxlab::io::field(in, "f"), "'f'");
  const auto primes = static_cast<std::size_t>(maxlab::io::nat_field(in, "primes"));
  const Nat exp_bound = maxlab::io::nat_field(in, "exp_bound");
  const Json op = maxlab::io::to_json(maxlab::prime_gadget(f, primes, exp_bound));
  const Json universe = maxlab::io::to_json(maxlab::prime_gadget_universe(primes, exp_bound));
  return Json{{"op", op}, {"universe", universe}};
}

Json closure_semilattice(const Json& in) {
  const auto lat = maxlab::io::semilattice_from(maxlab::io::field(in, "lattice"));
  const auto [op, pred] = maxlab::semilattice_ideal_op(lat);
  return Json{{"op", maxlab::io::to_json(op)},
              {"pred", Json{{"type", "avoid"},
                            {"banned", Json::array({lat.top()})},
                            {"universe", lat.size()}}}};
}

Json nce_check(const Json& in) {
  const auto op = maxlab::io::nondet_op_from(maxlab::io::field(in, "op"));
  const auto set = maxlab::io::finite_set_from(maxlab::io::field(in, "set"));
  const auto v = maxlab::is_nclosed(op, set);
  Json out{{"closed", v.closed}};
  if (v.violated_rule) out["violated_rule"] = *v.violated_rule;
  return out;
}

maxlab::NceMode mode_from(const Json& in) {
  if (!in.contains("mode")) return maxlab::NceMode::Exact;
  const std::string m = maxlab::io::field(in, "mode").get<std::string>();
  if (m == "exact") return maxlab::NceMode::Exact;
  if (m == "greedy") return maxlab::NceMode::Greedy;
  throw SchemaError("mode must be 'exact' or 'greedy'");
}

Json nce_max(const Json& in) {
  const auto op = maxlab::io::nondet_op_from(maxlab::io::field(in, "op"));
  const auto pred = maxlab::io::predicate_from(maxlab::io::field(in, "pred"));
  const auto ambient = maxlab::io::finite_set_from(maxlab::io::field(in, "ambient"));
  const auto seed = maxlab::io::finite_set_from(maxlab::io::field(in, "seed"));
  const Json solved = maxlab::io::to_json(
      maxlab::max_nclosed_extension(op, pred, ambient, seed, mode_from(in)));
  return Json{{"maximal_set", solved}};
}

Json nce_ideal_encode(const Json& in) {
  const auto pos = maxlab::io::poset_from(maxlab::io::field(in, "poset"));
  const auto [op, pred] = maxlab::poset_ideal_encoding(pos);
  return Json{{"op", maxlab::io::to_json(op)},
              {"pred", Json{{"type", "pairwise-upper-bounded"}, {"universe", pos.size()}}}};
}

Json nce_tree_encode(const Json& in) {
  const auto trees = maxlab::io::trees_from(in);
  const Nat depth = maxlab::io::nat_field(in, "depth");
  const auto enc = maxlab::tree_encoding(trees, depth);
  Json roots = Json::array();
  for (const auto& r : enc.roots) {
    if (r) {
      roots.push_back(*r);
    } else {
      roots.push_back(nullptr);
    }
  }
  return Json{{"ambient", maxlab::io::to_json(enc.ambient)},
              {"op", maxlab::io::to_json(enc.op)},
              {"z", enc.z},
              {"roots", std::move(roots)}};
}

Json nce_decode_paths(const Json& in) {
  const auto trees = maxlab::io::trees_from(in);
  const Nat depth = maxlab::io::nat_field(in, "depth");
  const auto enc = maxlab::tree_encoding(trees, depth);
  FiniteSet chosen;
  if (in.contains("set")) {
    chosen = maxlab::io::finite_set_from(in.at("set"));
  } else {
    chosen = maxlab::max_nclosed_extension(enc.op, enc.pred, enc.ambient, FiniteSet{},
                                           maxlab::NceMode::Greedy);
  }
  const Json paths = maxlab::io::to_json(maxlab::decode_paths(enc, chosen));
  return Json{{"paths", paths}, {"set", maxlab::io::to_json(chosen)}};
}

maxlab::AdversaryCaps caps_from(const Json& in) {
  maxlab::AdversaryCaps caps;
  if (!in.contains("caps")) return caps;
  const Json& c = in.at("caps");
  if (c.contains("max_string_length"))
    caps.max_string_length = c.at("max_string_length").get<Nat>();
  if (c.contains("max_items_per_step"))
    caps.max_items_per_step = c.at("max_items_per_step").get<std::size_t>();
  return caps;
}

Json construct_adversary(const Json& in, const std::string& transcript_path) {
  const auto strategies = maxlab::io::strategies_from(in);
  const Nat stages = maxlab::io::nat_field(in, "stages");
  const auto result = maxlab::adversary_run(strategies, stages, caps_from(in));
  Json out{{"family", maxlab::io::to_json(result.family)}};
  Json targets = Json::object();
  for (Nat e = 0; e < stages; ++e)
    if (auto t = result.transcript.final_target(e)) targets[std::to_string(e)] = *t;
  out["targets"] = std::move(targets);
  if (!transcript_path.empty()) {
    std::ofstream tout(transcript_path);
    if (!tout) throw SchemaError("cannot open transcript file '" + transcript_path + "'");
    for (const auto& ev : result.transcript.events)
      tout << maxlab::io::to_json(ev).dump() << "\n";
    out["transcript_file"] = transcript_path;
    out["transcript_events"] = result.transcript.events.size();
  } else {
    Json events = Json::array();
    for (const auto& ev : result.transcript.events)
      events.push_back(maxlab::io::to_json(ev));
    out["transcript"] = std::move(events);
  }
  return out;
}

Json construct_permit(const Json& in) {
  const Family fam = maxlab::io::family_from(maxlab::io::field(in, "family"));
  const auto w = maxlab::io::schedule_from(in);
  const Nat stages = maxlab::io::nat_field(in, "stages");
  const auto result = maxlab::permitting_run(fam, w, stages);
  Json history = Json::array();
  for (const auto& st : result.history) history.push_back(maxlab::io::to_json(st));
  return Json{{"history", std::move(history)},
              {"subfamily", maxlab::io::to_json(result.subfamily)}};
}

Json construct_escape(const Json& in) {
  const Family fam = maxlab::io::family_from(maxlab::io::field(in, "family"));
  const auto fast = maxlab::io::nat_list(maxlab::io::field(in, "fast"), "'fast'");
  const Nat steps = maxlab::io::nat_field(in, "steps");
  const Json sub = maxlab::io::to_json(maxlab::escape_subfamily(fam, fast, steps));
  return Json{{"subfamily", sub}};
}

Json construct_forcing(const Json& in) {
  const Family fam = maxlab::io::family_from(maxlab::io::field(in, "family"));
  const Nat steps = maxlab::io::nat_field(in, "steps");
  // Dense oracles are user code; the CLI runs the built-in maximality steps.
  const Json sub = maxlab::io::to_json(maxlab::forcing_generic(fam, {}, steps));
  return Json{{"subfamily", sub}};
}

Json construct_pi01g(const Json& in) {
  const Family fam = maxlab::io::family_from(maxlab::io::field(in, "family"));
  const auto indices = maxlab::io::nat_list(maxlab::io::field(in, "indices"), "'indices'");
  const Nat steps = maxlab::io::nat_field(in, "steps");
  const Json sub = maxlab::io::to_json(maxlab::pi01_generic_run(fam, indices, steps));
  return Json{{"subfamily", sub}};
}

// ---------------------------------------------------------------------------
// verify oracle
// ---------------------------------------------------------------------------

Json verify_one(const Json& artifact) {
  namespace io = maxlab::io;
  namespace oracle = maxlab::oracle;
  const std::string cmd = io::field(artifact, "command").get<std::string>();
  const Json& in = io::field(artifact, "input");
  const Json& out = io::field(artifact, "output");

  bool ok = false;
  std::string detail;
  bool maximality_oracle = false;

  if (cmd == "family greedy") {
    const Family fam = io::family_from(io::field(in, "family"));
    const auto p = io::property_from(io::field(in, "property"));
    const auto sub = io::subfamily_from(out);
    ok = oracle::subfamily_is_maximal(fam, sub, p);
    detail = "exhaustive subfamily maximality";
    maximality_oracle = true;
  } else if (cmd == "family check") {
    const Family fam = io::family_from(io::field(in, "family"));
    const auto p = io::property_from(io::field(in, "property"));
    const auto sub = io::subfamily_from(io::field(in, "subfamily"));
    const bool holds = io::field(out, "verdict").get<std::string>() != "fails";
    ok = holds == oracle::subfamily_has_property(fam, sub, p);
    detail = "definition-level property recheck";
  } else if (cmd == "family decode-range") {
    const Family fam = io::family_from(io::field(in, "family"));
    const auto p = io::property_from(io::field(in, "property"));
    const auto sub = io::subfamily_from(io::field(in, "subfamily"));
    const auto res = maxlab::decode_range(fam, sub, p);
    ok = oracle::subfamily_is_maximal(fam, sub, p) &&
         io::to_json(res.decoded) == io::field(out, "decoded") &&
         io::to_json(res.exceptions) == io::field(out, "exceptions");
    detail = "maximality precondition and decode recheck";
    maximality_oracle = true;
  } else if (cmd == "poset zl1") {
    const auto pos = io::poset_from(io::field(in, "poset"));
    const auto start = static_cast<std::size_t>(io::nat_field(in, "start"));
    const auto top = static_cast<std::size_t>(io::nat_field(out, "top"));
    const auto maxes = oracle::poset_maximals(pos);
    ok = std::find(maxes.begin(), maxes.end(), top) != maxes.end() && pos.leq(start, top);
    detail = "top is a maximal element above the start";
  } else if (cmd == "poset maximals") {
    const auto pos = io::poset_from(io::field(in, "poset"));
    Json arr = Json::array();
    for (std::size_t p : oracle::poset_maximals(pos)) arr.push_back(p);
    ok = arr == io::field(out, "maximals");
    detail = "independent scan";
  } else if (cmd == "poset assign") {
    const auto pos = io::poset_from(io::field(in, "poset"));
    const auto maxes = oracle::poset_maximals(pos);
    const auto assignment = io::nat_list(io::field(out, "assignment"), "'assignment'");
    ok = assignment.size() == pos.size();
    for (std::size_t p = 0; ok && p < pos.size(); ++p) {
      const auto q = static_cast<std::size_t>(assignment[p]);
      ok = std::find(maxes.begin(), maxes.end(), q) != maxes.end() && pos.leq(p, q);
      for (std::size_t r = 0; ok && r < q; ++r)
        if (pos.leq(p, r) && std::find(maxes.begin(), maxes.end(), r) != maxes.end())
          ok = false;
    }
    detail = "least maximal element above each point";
  } else if (cmd == "poset reversal") {
    const auto f = io::nat_list(io::field(in, "f"), "'f'");
    const auto members = io::nat_field(in, "members");
    FiniteSet range;
    for (Nat v : f)
      if (v < members) range.insert(v);
    ok = io::to_json(range) == io::field(out, "decoded");
    detail = "decoded set equals the range";
  } else if (cmd == "fcp max") {
    const auto pred = io::predicate_from(io::field(in, "pred"));
    const auto set = io::finite_set_from(io::field(in, "set"));
    ok = oracle::fcp_subset_is_maximal(pred, set, io::finite_set_from(io::field(out, "kept")));
    detail = "exhaustive subset maximality";
    maximality_oracle = true;
  } else if (cmd == "fcp sigma1") {
    const auto pred = io::predicate_from(io::field(in, "pred"));
    const auto set = io::finite_set_from(io::field(in, "set"));
    const auto kept = io::finite_set_from(io::field(out, "kept"));
    const auto removed = io::finite_set_from(io::field(out, "removed"));
    ok = kept.unite(removed) == set && kept.intersect(removed).empty() &&
         oracle::fcp_subset_is_maximal(pred, set, kept);
    detail = "partition and exhaustive maximality";
    maximality_oracle = true;
  } else if (cmd == "fcp sequential") {
    const auto f = io::nat_list(io::field(in, "f"), "'f'");
    const auto count = static_cast<std::size_t>(io::nat_field(in, "count"));
    Json arr = Json::array();
    for (std::size_t i = 0; i < count; ++i) {
      FiniteSet s;
      for (Nat v : f)
        if (v == static_cast<Nat>(i)) s.insert(v);
      arr.push_back(io::to_json(s));
    }
    ok = arr == io::field(out, "sets");
    detail = "pointwise recomputation";
  } else if (cmd == "family encode-range") {
    const auto f = io::nat_list(io::field(in, "f"), "'f'");
    const auto members = static_cast<std::size_t>(io::nat_field(in, "members"));
    const Nat horizon = io::nat_field(in, "horizon");
    const Family produced = io::family_from(io::field(out, "family"));
    ok = produced.member_count() == members && produced.horizon() == horizon;
    for (std::size_t i = 0; ok && i < members; ++i)
      for (Nat x = 0; ok && x < horizon; ++x) {
        bool expect = (x == 2 * static_cast<Nat>(i));
        if (x % 2 == 1) {
          const Nat xx = (x - 1) / 2;
          for (std::size_t y = 0; y < f.size() && static_cast<Nat>(y) <= xx; ++y)
            if (f[y] == static_cast<Nat>(i)) expect = true;
        }
        if (produced.member(i).elements.contains(x) != expect) ok = false;
      }
    detail = "pointwise recomputation of the coding formula";
  } else if (cmd == "family tilde") {
    const Family fam = io::family_from(io::field(in, "family"));
    const auto n = static_cast<unsigned>(io::nat_field(in, "n"));
    const Nat stages = io::nat_field(in, "stages");
    ok = io::to_json(maxlab::tilde_transform(fam, n, stages)) == io::field(out, "family");
    const Family produced = io::family_from(io::field(out, "family"));
    std::map<Nat, std::size_t> odd_share;
    for (std::size_t i = 0; i < produced.member_count(); ++i) {
      if (!produced.member(i).elements.contains(2 * static_cast<Nat>(i))) ok = false;
      for (Nat x : produced.member(i).elements) {
        if (x % 2 == 0 && x != 2 * static_cast<Nat>(i)) ok = false;
        if (x % 2 == 1) ++odd_share[x];
      }
    }
    for (const auto& [odd, count] : odd_share)
      if (count < n + 1) ok = false;  // each firing set has at least n+1 indices
    detail = "even-tag and shared-odd laws, deterministic replay";
  } else if (cmd == "closure semilattice") {
    const auto lat = io::semilattice_from(io::field(in, "lattice"));
    const auto op = io::det_op_from(io::field(out, "op"));
    if (lat.size() > 16) throw SchemaError("semilattice verify is exhaustive; size <= 16");
    ok = true;
    const Nat limit = Nat(1) << lat.size();
    for (Nat mask = 0; mask < limit && ok; ++mask) {
      const FiniteSet s = maxlab::finset_decode(mask);
      bool ideal = true;
      for (Nat a : s) {
        for (std::size_t b = 0; b < lat.size(); ++b)
          if (lat.leq(b, static_cast<std::size_t>(a)) && !s.contains(static_cast<Nat>(b)))
            ideal = false;
        for (Nat b : s)
          if (!s.contains(static_cast<Nat>(
                  lat.join(static_cast<std::size_t>(a), static_cast<std::size_t>(b)))))
            ideal = false;
      }
      if (oracle::det_closed(op, s) != ideal) ok = false;
    }
    detail = "closed sets are exactly the ideals";
  } else if (cmd == "nce tree-encode") {
    const auto trees = io::trees_from(in);
    const Nat depth = io::nat_field(in, "depth");
    const auto enc = maxlab::tree_encoding(trees, depth);
    ok = io::to_json(enc.op) == io::field(out, "op") &&
         io::to_json(enc.ambient) == io::field(out, "ambient");
    for (const auto& rule : enc.op.rules) {
      if (rule.premise.size() != 1 || !rule.premise.subset_of(enc.ambient)) ok = false;
      if (!rule.choices.subset_of(enc.ambient)) ok = false;
    }
    detail = "deterministic replay and rule shape";
  } else if (cmd == "closure cl") {
    const auto op = io::det_op_from(io::field(in, "op"));
    const auto set = io::finite_set_from(io::field(in, "set"));
    ok = io::to_json(oracle::naive_cl(op, set)) == io::field(out, "closure");
    detail = "naive level-set fixpoint";
  } else if (cmd == "closure closed") {
    const auto op = io::det_op_from(io::field(in, "op"));
    const auto set = io::finite_set_from(io::field(in, "set"));
    ok = oracle::det_closed(op, set) == io::field(out, "closed").get<bool>();
    detail = "rule-by-rule recheck";
  } else if (cmd == "closure ce-max") {
    const auto op = io::det_op_from(io::field(in, "op"));
    const auto pred = io::predicate_from(io::field(in, "pred"));
    const auto ambient = io::finite_set_from(io::field(in, "ambient"));
    const auto seed = io::finite_set_from(io::field(in, "seed"));
    ok = oracle::ce_extension_is_maximal(op, pred, ambient, seed,
                                         io::finite_set_from(io::field(out, "maximal_set")));
    detail = "exhaustive superset oracle";
    maximality_oracle = true;
  } else if (cmd == "closure prime-gadget") {
    const auto f = io::nat_list(io::field(in, "f"), "'f'");
    const auto primes = static_cast<std::size_t>(io::nat_field(in, "primes"));
    const auto op = io::det_op_from(io::field(out, "op"));
    const auto universe = io::finite_set_from(io::field(out, "universe"));
    const auto pred = maxlab::fc_avoid(FiniteSet{0}, universe.max() + 1);
    const auto solved = maxlab::ce_greedy_max(op, pred, universe, FiniteSet{});
    FiniteSet range;
    for (Nat v : f) range.insert(v);
    ok = oracle::ce_extension_is_maximal(op, pred, universe, FiniteSet{}, solved) &&
         maxlab::prime_gadget_decode(solved, primes) == range;
    detail = "maximal 0-free set decodes to the range";
    maximality_oracle = true;
  } else if (cmd == "nce check") {
    const auto op = io::nondet_op_from(io::field(in, "op"));
    const auto set = io::finite_set_from(io::field(in, "set"));
    ok = oracle::n_closed(op, set) == io::field(out, "closed").get<bool>();
    detail = "rule-by-rule recheck";
  } else if (cmd == "nce max") {
    const auto op = io::nondet_op_from(io::field(in, "op"));
    const auto pred = io::predicate_from(io::field(in, "pred"));
    const auto ambient = io::finite_set_from(io::field(in, "ambient"));
    const auto seed = io::finite_set_from(io::field(in, "seed"));
    const auto claimed = io::finite_set_from(io::field(out, "maximal_set"));
    if (mode_from(in) == maxlab::NceMode::Exact) {
      const auto best = oracle::nce_best_maximal(op, pred, ambient, seed);
      ok = best && *best == claimed;
      detail = "subset enumeration with the same tie-break";
    maximality_oracle = true;
    } else {
      ok = oracle::n_closed(op, claimed) && pred(claimed) && seed.subset_of(claimed);
      for (Nat x : ambient.minus(claimed)) {
        const FiniteSet ext = claimed.with(x);
        if (oracle::n_closed(op, ext) && pred(ext)) ok = false;
      }
      detail = "closedness, predicate, single-addition maximality";
    maximality_oracle = true;
    }
  } else if (cmd == "nce decode-paths") {
    const auto trees = io::trees_from(in);
    const Nat depth = io::nat_field(in, "depth");
    ok = io::to_json(oracle::tree_depth_reachability(trees, depth)) ==
         io::field(out, "paths");
    detail = "depth reachability by direct search";
  } else if (cmd == "nce ideal-encode") {
    const auto pos = io::poset_from(io::field(in, "poset"));
    const auto [op, pred] = maxlab::poset_ideal_encoding(pos);
    ok = true;
    const Nat limit = Nat(1) << pos.size();
    for (Nat mask = 0; mask < limit && ok; ++mask) {
      const FiniteSet s = maxlab::finset_decode(mask);
      ok = (oracle::n_closed(op, s) && pred(s)) == oracle::is_ideal(pos, s);
    }
    detail = "closed satisfying sets are exactly the ideals";
  } else if (cmd == "construct adversary") {
    const auto strategies = io::strategies_from(in);
    const Nat stages = io::nat_field(in, "stages");
    const auto rerun = maxlab::adversary_run(strategies, stages, caps_from(in));
    const auto report = oracle::check_adversary_invariants(rerun);
    ok = report.ok && io::to_json(rerun.family) == io::field(out, "family");
    detail = report.ok ? "construction invariants and deterministic replay" : report.failure;
  } else if (cmd == "construct permit") {
    const Family fam = io::family_from(io::field(in, "family"));
    const auto w = io::schedule_from(in);
    const Nat stages = io::nat_field(in, "stages");
    const auto rerun = maxlab::permitting_run(fam, w, stages);
    const auto report = oracle::check_permitting_invariants(fam, w, rerun);
    ok = report.ok && io::to_json(rerun.subfamily) == io::field(out, "subfamily");
    detail = report.ok ? "permission laws and deterministic replay" : report.failure;
  } else if (cmd == "construct escape" || cmd == "construct forcing" ||
             cmd == "construct pi01g") {
    const Family fam = io::family_from(io::field(in, "family"));
    const auto sub = io::subfamily_from(io::field(out, "subfamily"));
    ok = sub.indices.empty() ||
         oracle::subfamily_has_property(fam, sub, maxlab::PropertyTag::f());
    detail = "full intersection property of the output";
  } else {
    throw SchemaError("no verification oracle for command '" + cmd + "'");
  }

  Json res{{"command", cmd}, {"ok", ok}, {"oracle", detail}};
  if (maximality_oracle) res["maximal"] = ok;
  return res;
}

Json verify_all(const Json& doc, unsigned jobs) {
  std::vector<Json> artifacts;
  if (doc.is_array()) {
    for (const auto& a : doc) artifacts.push_back(a);
  } else {
    artifacts.push_back(doc);
  }
  std::vector<Json> results(artifacts.size());
  if (jobs <= 1 || artifacts.size() <= 1) {
    for (std::size_t i = 0; i < artifacts.size(); ++i) results[i] = verify_one(artifacts[i]);
  } else {
    // Deterministic aggregation: workers own fixed index strides; results
    // land by position regardless of completion order.
    std::vector<std::thread> workers;
    std::vector<std::string> errors(artifacts.size());
    for (unsigned w = 0; w < jobs; ++w) {
      workers.emplace_back([&, w]() {
        for (std::size_t i = w; i < artifacts.size(); i += jobs) {
          try {
            results[i] = verify_one(artifacts[i]);
          } catch (const maxlab::Error& e) {
            errors[i] = e.what();
          }
        }
      });
    }
    for (auto& t : workers) t.join();
    for (std::size_t i = 0; i < errors.size(); ++i)
      if (!errors[i].empty()) throw SchemaError(errors[i]);
  }
  bool all_ok = true;
  Json arr = Json::array();
  for (auto& r : results) {
    if (!r.value("ok", false)) all_ok = false;
    arr.push_back(std::move(r));
  }
  if (doc.is_array()) return Json{{"ok", all_ok}, {"results", std::move(arr)}};
  return arr[0];
}

// ---------------------------------------------------------------------------
// Wiring
// ---------------------------------------------------------------------------

struct Leaf {
  CLI::App* cmd = nullptr;
  std::string in_path = "-";
  std::string out_path = "-";
  bool dump_schema = false;
  // flag values merged over the input document's fields
  std::vector<std::pair<std::string, std::shared_ptr<std::optional<Nat>>>> overrides;
};

int g_exit_code = 0;

void emit_error(int code, const std::string& name, const std::string& message) {
  std::cout << Json{{"error", name}, {"message", message}}.dump() << "\n";
  g_exit_code = code;
}

Leaf* make_leaf(CLI::App* group, const std::string& name, const std::string& title,
                const Json& schema, const std::function<Json(const Json&, Leaf&)>& handler,
                std::vector<std::unique_ptr<Leaf>>& leaves, const std::string& full_name) {
  auto leaf = std::make_unique<Leaf>();
  Leaf* raw = leaf.get();
  raw->cmd = group->add_subcommand(name, title);
  raw->cmd->add_option("--in", raw->in_path, "input JSON file, or - for stdin");
  raw->cmd->add_option("--out", raw->out_path, "output JSON file, or - for stdout");
  raw->cmd->add_flag("--schema", raw->dump_schema, "print the input schema and exit");
  raw->cmd->callback([raw, handler, schema, full_name]() {
    try {
      if (raw->dump_schema) {
        write_json(raw->out_path, Json{{"command", full_name}, {"input", schema}});
        return;
      }
      Json input = read_json(raw->in_path);
      for (const auto& [key, value] : raw->overrides)
        if (*value) input[key] = **value;
      Json output = handler(input, *raw);
      Json doc{{"command", full_name}, {"input", std::move(input)}, {"output", std::move(output)}};
      write_json(raw->out_path, doc);
    } catch (const SchemaError& e) {
      emit_error(2, e.name(), e.what());
    } catch (const maxlab::Error& e) {
      emit_error(1, e.name(), e.what());
    }
  });
  leaves.push_back(std::move(leaf));
  return raw;
}

// A flag that overrides one natural-valued field of the input document.
void add_override(Leaf* leaf, const std::string& flag, const std::string& key) {
  auto value = std::make_shared<std::optional<Nat>>();
  leaf->cmd->add_option_function<Nat>(
      flag, [value](Nat v) { *value = v; }, "overrides '" + key + "' in the input");
  leaf->overrides.emplace_back(key, std::move(value));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite-scale laboratory for maximal subfamilies, maximal subsets, "
               "and closure-operator extensions"};
  app.require_subcommand(1);
  std::vector<std::unique_ptr<Leaf>> leaves;

  const Json family_doc = Json{{"horizon", "nat"}, {"members", {{"nat"}}}};
  const Json property_doc = Json{{"kind", "f|dn|dbar"}, {"n", "nat (dn/dbar only)"}};
  const Json pred_doc =
      Json{{"type", "true|divisible|not-divisible|member-of|max-size|avoid"},
           {"universe", "nat"},
           {"by/allowed/n/banned", "per type"}};

  auto wrap = [](Json (*fn)(const Json&)) {
    return [fn](const Json& in, Leaf&) { return fn(in); };
  };

  // family
  auto* family = app.add_subcommand("family", "set families and intersection properties");
  make_leaf(family, "check", "check an intersection property",
            Json{{"family", family_doc}, {"subfamily", {{"indices", {"nat"}}}}, {"property", property_doc}},
            wrap(family_check), leaves, "family check");
  make_leaf(family, "greedy", "greedy maximal subfamily",
            Json{{"family", family_doc}, {"property", property_doc}, {"start", "nat?"}},
            wrap(family_greedy), leaves, "family greedy");
  add_override(make_leaf(family, "tilde", "staged transform feeding the F-property solver",
                         Json{{"family", family_doc}, {"n", "nat >= 2"}, {"stages", "nat"}},
                         wrap(family_tilde), leaves, "family tilde"),
               "--stages", "stages");
  add_override(make_leaf(family, "encode-range", "range-coding family of an injective prefix",
                         Json{{"f", {"nat"}}, {"members", "nat"}, {"horizon", "nat"}},
                         wrap(family_encode_range), leaves, "family encode-range"),
               "--horizon", "horizon");
  make_leaf(family, "decode-range", "read the coded range off a maximal subfamily",
            Json{{"family", family_doc}, {"subfamily", {{"indices", {"nat"}}}}, {"property", property_doc}},
            wrap(family_decode_range), leaves, "family decode-range");

  // poset
  auto* poset = app.add_subcommand("poset", "finite posets and the chain climb");
  const Json poset_doc = Json{{"size", "nat"}, {"leq", {{"nat", "nat"}}}};
  make_leaf(poset, "zl1", "chain climb to a maximal element",
            Json{{"poset", poset_doc}, {"start", "nat"}}, wrap(poset_zl1), leaves,
            "poset zl1");
  make_leaf(poset, "maximals", "all maximal elements", Json{{"poset", poset_doc}},
            wrap(poset_maximals), leaves, "poset maximals");
  make_leaf(poset, "assign", "least maximal element above each point",
            Json{{"poset", poset_doc}}, wrap(poset_assign), leaves, "poset assign");
  make_leaf(poset, "reversal", "decode a range through the gadget poset",
            Json{{"f", {"nat"}}, {"members", "nat"}, {"stages", "nat"}},
            wrap(poset_reversal), leaves, "poset reversal");

  // fcp
  auto* fcp = app.add_subcommand("fcp", "finite-character predicates");
  make_leaf(fcp, "max", "greedy maximal satisfying subset",
            Json{{"pred", pred_doc}, {"set", {"nat"}}}, wrap(fcp_max), leaves, "fcp max");
  make_leaf(fcp, "sigma1", "smallest-removal maximal subset",
            Json{{"pred", pred_doc}, {"set", {"nat"}}}, wrap(fcp_sigma1), leaves,
            "fcp sigma1");
  make_leaf(fcp, "sequential", "the sequential gadget",
            Json{{"f", {"nat"}}, {"count", "nat"}}, wrap(fcp_sequential), leaves,
            "fcp sequential");

  // closure
  auto* closure = app.add_subcommand("closure", "deterministic closure operators");
  const Json det_op_doc = Json{{"rules", {{{"from", {"nat"}}, {"to", "nat"}}}}};
  make_leaf(closure, "cl", "least closed superset", Json{{"op", det_op_doc}, {"set", {"nat"}}},
            wrap(closure_cl), leaves, "closure cl");
  make_leaf(closure, "closed", "closedness check", Json{{"op", det_op_doc}, {"set", {"nat"}}},
            wrap(closure_closed), leaves, "closure closed");
  make_leaf(closure, "ce-max", "greedy maximal closed extension",
            Json{{"op", det_op_doc}, {"pred", pred_doc}, {"ambient", {"nat"}}, {"seed", {"nat"}}},
            wrap(closure_ce_max), leaves, "closure ce-max");
  make_leaf(closure, "prime-gadget", "prime-power coding operator",
            Json{{"f", {"nat"}}, {"primes", "nat"}, {"exp_bound", "nat"}},
            wrap(closure_prime_gadget), leaves, "closure prime-gadget");
  make_leaf(closure, "semilattice", "ideal operator of a join-semilattice",
            Json{{"lattice", {{"size", "nat"}, {"leq", {{"nat", "nat"}}}, {"join", {{"nat"}}}, {"top", "nat"}}}},
            wrap(closure_semilattice), leaves, "closure semilattice");

  // nce
  auto* nce = app.add_subcommand("nce", "nondeterministic closure operators");
  const Json nop_doc = Json{{"rules", {{{"from", {"nat"}}, {"choices", {"nat"}}}}}};
  make_leaf(nce, "check", "closedness under choice rules",
            Json{{"op", nop_doc}, {"set", {"nat"}}}, wrap(nce_check), leaves, "nce check");
  make_leaf(nce, "max", "maximal closed satisfying extension",
            Json{{"op", nop_doc}, {"pred", pred_doc}, {"ambient", {"nat"}}, {"seed", {"nat"}}, {"mode", "exact|greedy"}},
            wrap(nce_max), leaves, "nce max");
  make_leaf(nce, "ideal-encode", "poset ideals as a choice-rule problem",
            Json{{"poset", poset_doc}}, wrap(nce_ideal_encode), leaves, "nce ideal-encode");
  make_leaf(nce, "tree-encode", "trees as a choice-rule problem",
            Json{{"depth", "nat"}, {"trees", {"nested child arrays or null"}}},
            wrap(nce_tree_encode), leaves, "nce tree-encode");
  make_leaf(nce, "decode-paths", "surviving tree indices of a maximal set",
            Json{{"depth", "nat"}, {"trees", {"nested child arrays or null"}}, {"set", "nat[]? (solved greedily when absent)"}},
            wrap(nce_decode_paths), leaves, "nce decode-paths");

  // construct
  auto* construct = app.add_subcommand("construct", "stage-based constructions");
  {
    const Json schema{{"strategies", {{{"[value, stage]"}}}},
                      {"stages", "nat"},
                      {"caps", {{"max_string_length", "nat?"}, {"max_items_per_step", "nat?"}}}};
    auto leaf = std::make_unique<Leaf>();
    Leaf* raw = leaf.get();
    raw->cmd = construct->add_subcommand("adversary", "the hyperimmunity adversary run");
    raw->cmd->add_option("--in", raw->in_path, "input JSON file, or - for stdin");
    raw->cmd->add_option("--out", raw->out_path, "output JSON file, or - for stdout");
    raw->cmd->add_flag("--schema", raw->dump_schema, "print the input schema and exit");
    auto transcript_path = std::make_shared<std::string>();
    raw->cmd->add_option("--transcript", *transcript_path,
                         "write the transcript as JSONL to this file instead of inline");
    auto stages_override = std::make_shared<std::optional<Nat>>();
    raw->cmd->add_option_function<Nat>(
        "--stages", [stages_override](Nat v) { *stages_override = v; },
        "overrides 'stages' in the input");
    raw->cmd->callback([raw, schema, transcript_path, stages_override]() {
      try {
        if (raw->dump_schema) {
          write_json(raw->out_path, Json{{"command", "construct adversary"}, {"input", schema}});
          return;
        }
        Json input = read_json(raw->in_path);
        if (*stages_override) input["stages"] = **stages_override;
        Json output = construct_adversary(input, *transcript_path);
        Json doc{{"command", "construct adversary"},
                 {"input", std::move(input)},
                 {"output", std::move(output)}};
        write_json(raw->out_path, doc);
      } catch (const SchemaError& e) {
        emit_error(2, e.name(), e.what());
      } catch (const maxlab::Error& e) {
        emit_error(1, e.name(), e.what());
      }
    });
    leaves.push_back(std::move(leaf));
  }
  add_override(make_leaf(construct, "permit", "the permitting construction",
                         Json{{"family", family_doc}, {"schedule", {{"nat"}}}, {"stages", "nat"}},
                         wrap(construct_permit), leaves, "construct permit"),
               "--stages", "stages");
  make_leaf(construct, "escape", "the witness-chasing subfamily",
            Json{{"family", family_doc}, {"fast", {"nat"}}, {"steps", "nat"}},
            wrap(construct_escape), leaves, "construct escape");
  make_leaf(construct, "forcing", "generic subfamily through forcing conditions",
            Json{{"family", family_doc}, {"steps", "nat"}}, wrap(construct_forcing), leaves,
            "construct forcing");
  make_leaf(construct, "pi01g", "generic subfamily through good sequences",
            Json{{"family", family_doc}, {"indices", {"nat"}}, {"steps", "nat"}},
            wrap(construct_pi01g), leaves, "construct pi01g");

  // verify
  auto* verify = app.add_subcommand("verify", "independent brute-force rechecks");
  {
    auto leaf = std::make_unique<Leaf>();
    Leaf* raw = leaf.get();
    raw->cmd = verify->add_subcommand("oracle", "recheck a produced artifact");
    raw->cmd->add_option("--in", raw->in_path, "artifact JSON file, or - for stdin");
    raw->cmd->add_option("--out", raw->out_path, "output JSON file, or - for stdout");
    auto jobs = std::make_shared<unsigned>(1);
    raw->cmd->add_option("--jobs", *jobs, "parallel workers for artifact arrays");
    raw->cmd->callback([raw, jobs]() {
      try {
        const Json doc = read_json(raw->in_path);
        const Json res = verify_all(doc, *jobs);
        write_json(raw->out_path, res);
        if (!res.value("ok", false)) {
          g_exit_code = 1;
        }
      } catch (const SchemaError& e) {
        emit_error(2, e.name(), e.what());
      } catch (const maxlab::Error& e) {
        emit_error(1, e.name(), e.what());
      }
    });
    leaves.push_back(std::move(leaf));
  }

  // gen: seeded random instances for experiments
  auto* gen = app.add_subcommand("gen", "seeded instance generators");
  {
    auto leaf = std::make_unique<Leaf>();
    Leaf* raw = leaf.get();
    raw->cmd = gen->add_subcommand("family", "random nontrivial family");
    raw->cmd->add_option("--out", raw->out_path, "output JSON file, or - for stdout");
    auto members = std::make_shared<unsigned>(6);
    auto horizon = std::make_shared<unsigned>(32);
    auto seed = std::make_shared<unsigned>(0);
    raw->cmd->add_option("--members", *members, "member count");
    raw->cmd->add_option("--horizon", *horizon, "shared horizon");
    raw->cmd->add_option("--seed", *seed, "generator seed");
    raw->cmd->callback([raw, members, horizon, seed]() {
      std::mt19937 rng(*seed);
      std::vector<FiniteSet> sets(*members);
      for (auto& s : sets)
        for (Nat x = 0; x < *horizon; ++x)
          if (rng() % 3 == 0) s.insert(x);
      bool nontrivial = false;
      for (const auto& s : sets)
        if (!s.empty()) nontrivial = true;
      if (!nontrivial) sets[0].insert(0);
      write_json(raw->out_path,
                 Json{{"family", maxlab::io::to_json(Family(std::move(sets), *horizon))}});
    });
    leaves.push_back(std::move(leaf));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cout << Json{{"error", "UsageError"}, {"message", e.what()}}.dump() << "\n";
    return 2;
  }
  return g_exit_code;
}
