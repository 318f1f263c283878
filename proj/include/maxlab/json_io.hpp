#pragma once

// JSON (de)serialization for every artifact format the CLI speaks.  Schema
// violations throw SchemaError so callers can distinguish malformed input
// (usage errors) from domain errors raised by the library.

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "maxlab/closure_det.hpp"
#include "maxlab/closure_nondet.hpp"
#include "maxlab/constructions.hpp"
#include "maxlab/encoding.hpp"
#include "maxlab/errors.hpp"
#include "maxlab/families.hpp"
#include "maxlab/finite_character.hpp"
#include "maxlab/zorn.hpp"

namespace maxlab::io {

using Json = nlohmann::ordered_json;

class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& what) : Error("SchemaError", what) {}
};

inline const Json& field(const Json& doc, const std::string& key) {
  if (!doc.is_object() || !doc.contains(key))
    throw SchemaError("missing field '" + key + "'");
  return doc.at(key);
}

inline Nat as_nat(const Json& v, const std::string& what) {
  if (v.is_number_unsigned()) return v.get<Nat>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
    return static_cast<Nat>(v.get<std::int64_t>());
  throw SchemaError(what + " must be a natural");
}

inline Nat nat_field(const Json& doc, const std::string& key) {
  return as_nat(field(doc, key), "field '" + key + "'");
}

inline std::vector<Nat> nat_list(const Json& v, const std::string& what) {
  if (!v.is_array()) throw SchemaError(what + " must be an array of naturals");
  std::vector<Nat> out;
  for (const auto& x : v) out.push_back(as_nat(x, what));
  return out;
}

// --- finite sets -----------------------------------------------------------

inline Json to_json(const FiniteSet& s) {
  Json arr = Json::array();
  for (Nat x : s) arr.push_back(x);
  return arr;
}

inline FiniteSet finite_set_from(const Json& v, const std::string& what = "set") {
  return FiniteSet(nat_list(v, what));
}

// --- families ----------------------------------------------------------------

inline Json to_json(const Family& fam) {
  Json members = Json::array();
  for (const auto& m : fam.members()) members.push_back(to_json(m.elements));
  return Json{{"horizon", fam.horizon()}, {"members", std::move(members)}};
}

inline Family family_from(const Json& doc) {
  const Nat horizon = nat_field(doc, "horizon");
  const Json& members = field(doc, "members");
  if (!members.is_array()) throw SchemaError("'members' must be an array");
  std::vector<FiniteSet> sets;
  for (const auto& m : members) sets.push_back(finite_set_from(m, "member"));
  try {
    return Family(std::move(sets), horizon);
  } catch (const BadInput& e) {
    throw SchemaError(e.what());
  }
}

inline Json to_json(const SubfamilyIndex& sub) {
  Json arr = Json::array();
  for (std::size_t i : sub.indices) arr.push_back(i);
  return Json{{"indices", std::move(arr)}};
}

inline SubfamilyIndex subfamily_from(const Json& doc) {
  SubfamilyIndex out;
  for (Nat v : nat_list(field(doc, "indices"), "'indices'"))
    out.indices.push_back(static_cast<std::size_t>(v));
  return out;
}

inline Json to_json(PropertyTag p) {
  switch (p.kind) {
    case PropertyTag::Kind::Dn:
      return Json{{"kind", "dn"}, {"n", p.n}};
    case PropertyTag::Kind::DbarN:
      return Json{{"kind", "dbar"}, {"n", p.n}};
    default:
      return Json{{"kind", "f"}};
  }
}

inline PropertyTag property_from(const Json& doc) {
  const Json& kind = field(doc, "kind");
  if (!kind.is_string()) throw SchemaError("property 'kind' must be a string");
  const std::string k = kind.get<std::string>();
  try {
    if (k == "f") return PropertyTag::f();
    if (k == "dn") return PropertyTag::dn(static_cast<unsigned>(nat_field(doc, "n")));
    if (k == "dbar") return PropertyTag::dbar(static_cast<unsigned>(nat_field(doc, "n")));
  } catch (const BadInput& e) {
    throw SchemaError(e.what());
  }
  throw SchemaError("property kind must be one of f, dn, dbar");
}

// --- posets and semilattices -------------------------------------------------

inline Json to_json(const FinPoset& pos) {
  Json pairs = Json::array();
  for (std::size_t a = 0; a < pos.size(); ++a)
    for (std::size_t b = 0; b < pos.size(); ++b)
      if (a != b && pos.leq(a, b)) pairs.push_back(Json::array({a, b}));
  return Json{{"size", pos.size()}, {"leq", std::move(pairs)}};
}

inline FinPoset poset_from(const Json& doc) {
  const Nat size = nat_field(doc, "size");
  const Json& leq = field(doc, "leq");
  if (!leq.is_array()) throw SchemaError("'leq' must be an array of pairs");
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto& p : leq) {
    const auto xs = nat_list(p, "leq pair");
    if (xs.size() != 2) throw SchemaError("leq pairs must have two entries");
    pairs.emplace_back(static_cast<std::size_t>(xs[0]), static_cast<std::size_t>(xs[1]));
  }
  try {
    return FinPoset(static_cast<std::size_t>(size), pairs);
  } catch (const Error& e) {
    throw SchemaError(e.what());
  }
}

inline JoinSemilattice semilattice_from(const Json& doc) {
  const Nat size = nat_field(doc, "size");
  const Json& leq = field(doc, "leq");
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto& p : leq) {
    const auto xs = nat_list(p, "leq pair");
    if (xs.size() != 2) throw SchemaError("leq pairs must have two entries");
    pairs.emplace_back(static_cast<std::size_t>(xs[0]), static_cast<std::size_t>(xs[1]));
  }
  const Json& join = field(doc, "join");
  if (!join.is_array()) throw SchemaError("'join' must be a table");
  std::vector<std::vector<std::size_t>> table;
  for (const auto& row : join) {
    std::vector<std::size_t> r;
    for (Nat v : nat_list(row, "join row")) r.push_back(static_cast<std::size_t>(v));
    table.push_back(std::move(r));
  }
  try {
    return JoinSemilattice(static_cast<std::size_t>(size), pairs, std::move(table),
                           static_cast<std::size_t>(nat_field(doc, "top")));
  } catch (const Error& e) {
    throw SchemaError(e.what());
  }
}

// --- closure operators ---------------------------------------------------------

inline Json to_json(const DetClosureOp& op) {
  Json rules = Json::array();
  for (const auto& r : op.rules)
    rules.push_back(Json{{"from", to_json(r.premise)}, {"to", r.conclusion}});
  return Json{{"rules", std::move(rules)}};
}

inline DetClosureOp det_op_from(const Json& doc) {
  DetClosureOp op;
  const Json& rules = field(doc, "rules");
  if (!rules.is_array()) throw SchemaError("'rules' must be an array");
  for (const auto& r : rules)
    op.rules.push_back({finite_set_from(field(r, "from"), "rule premise"),
                        nat_field(r, "to")});
  return op;
}

inline Json to_json(const NondetClosureOp& op) {
  Json rules = Json::array();
  for (const auto& r : op.rules)
    rules.push_back(Json{{"from", to_json(r.premise)}, {"choices", to_json(r.choices)}});
  return Json{{"rules", std::move(rules)}};
}

inline NondetClosureOp nondet_op_from(const Json& doc) {
  NondetClosureOp op;
  const Json& rules = field(doc, "rules");
  if (!rules.is_array()) throw SchemaError("'rules' must be an array");
  for (const auto& r : rules)
    op.rules.push_back({finite_set_from(field(r, "from"), "rule premise"),
                        finite_set_from(field(r, "choices"), "rule choices")});
  try {
    op.validate();
  } catch (const BadInput& e) {
    throw SchemaError(e.what());
  }
  return op;
}

// --- predicate mini-language ----------------------------------------------------

// {"type":"true"|"not-divisible"|"member-of"|"max-size"|"avoid", "universe":N, ...}
inline FCPredicate predicate_from(const Json& doc) {
  const Json& type = field(doc, "type");
  if (!type.is_string()) throw SchemaError("predicate 'type' must be a string");
  const std::string t = type.get<std::string>();
  const Nat universe = nat_field(doc, "universe");
  if (t == "true") return fc_true(universe);
  if (t == "not-divisible" || t == "divisible") {
    const Nat by = nat_field(doc, "by");
    if (by == 0) throw SchemaError("'by' must be positive");
    return t == "divisible" ? fc_divisible(by, universe) : fc_not_divisible(by, universe);
  }
  if (t == "member-of")
    return fc_member_of(finite_set_from(field(doc, "allowed"), "'allowed'"), universe);
  if (t == "max-size")
    return fc_max_size(static_cast<std::size_t>(nat_field(doc, "n")), universe);
  if (t == "avoid")
    return fc_avoid(finite_set_from(field(doc, "banned"), "'banned'"), universe);
  throw SchemaError("unknown predicate type '" + t + "'");
}

inline Json predicate_to_json(const Json& original) { return original; }

// --- trees ----------------------------------------------------------------------

inline TruncTree::Node tree_node_from(const Json& v) {
  if (!v.is_array()) throw SchemaError("tree nodes must be arrays of children");
  TruncTree::Node node;
  for (const auto& child : v) node.children.push_back(tree_node_from(child));
  return node;
}

inline std::vector<TruncTree> trees_from(const Json& doc) {
  const Json& arr = field(doc, "trees");
  if (!arr.is_array()) throw SchemaError("'trees' must be an array");
  std::vector<TruncTree> out;
  for (const auto& t : arr) {
    if (t.is_null()) {
      out.push_back(TruncTree::empty());
    } else {
      out.push_back(TruncTree{tree_node_from(t)});
    }
  }
  return out;
}

// --- constructions ---------------------------------------------------------------

inline std::vector<StrategyOracle> strategies_from(const Json& doc) {
  const Json& arr = field(doc, "strategies");
  if (!arr.is_array()) throw SchemaError("'strategies' must be an array");
  std::vector<StrategyOracle> out;
  for (const auto& s : arr) {
    if (!s.is_array()) throw SchemaError("each strategy must be an array of entries");
    StrategyOracle strat;
    for (const auto& entry : s) {
      const auto xs = nat_list(entry, "strategy entry");
      if (xs.size() != 2) throw SchemaError("strategy entries are [value, stage] pairs");
      strat.entries.push_back({xs[0], xs[1]});
    }
    out.push_back(std::move(strat));
  }
  return out;
}

inline StagedEnumeration schedule_from(const Json& doc) {
  StagedEnumeration out;
  if (!doc.contains("schedule")) return out;
  const Json& arr = doc.at("schedule");
  if (!arr.is_array()) throw SchemaError("'schedule' must be an array of arrays");
  for (const auto& stage : arr) out.schedule.push_back(nat_list(stage, "schedule stage"));
  return out;
}

inline const char* adv_event_name(AdvEventKind kind) {
  switch (kind) {
    case AdvEventKind::TargetDefined: return "target-defined";
    case AdvEventKind::TargetRedefined: return "target-redefined";
    case AdvEventKind::FollowersRetyped: return "followers-retyped";
    case AdvEventKind::FollowerBorn: return "follower-born";
    case AdvEventKind::Intersected: return "intersected";
    case AdvEventKind::AcceptableStage: return "acceptable-stage";
    case AdvEventKind::ComplementsFinalized: return "complements-finalized";
    case AdvEventKind::CapEngaged: return "cap-engaged";
  }
  return "unknown";
}

// One transcript record: {stage, substage, step, event, payload}.
inline Json to_json(const AdvEvent& ev) {
  Json payload = Json::object();
  switch (ev.kind) {
    case AdvEventKind::TargetDefined:
    case AdvEventKind::TargetRedefined:
      payload["e"] = ev.e;
      payload["value"] = ev.value;
      break;
    case AdvEventKind::FollowersRetyped:
      payload["e"] = ev.e;
      payload["count"] = ev.value;
      break;
    case AdvEventKind::FollowerBorn: {
      payload["e"] = ev.e;
      payload["n"] = ev.n;
      payload["value"] = ev.value;
      payload["type"] = ev.follower_type;
      Json sigma = Json::array();
      for (Nat v : ev.sigma) sigma.push_back(v);
      payload["sigma"] = std::move(sigma);
      break;
    }
    case AdvEventKind::Intersected:
      payload["a"] = ev.set_a;
      payload["b"] = ev.set_b;
      payload["witness"] = ev.witness;
      break;
    case AdvEventKind::AcceptableStage:
      payload["e"] = ev.e;
      payload["x"] = ev.value;
      break;
    case AdvEventKind::ComplementsFinalized:
      payload["bound"] = ev.value;
      break;
    case AdvEventKind::CapEngaged:
      break;
  }
  return Json{{"stage", ev.stage},
              {"substage", ev.substage},
              {"step", ev.step},
              {"event", adv_event_name(ev.kind)},
              {"payload", std::move(payload)}};
}

inline Json to_json(const PermitStage& st) {
  Json codes = Json::array();
  for (Nat c : st.codes) codes.push_back(c);
  Json out{{"stage", st.stage}, {"codes", std::move(codes)}};
  if (st.chosen_index) out["chosen"] = *st.chosen_index;
  if (!st.removed_codes.empty()) {
    Json removed = Json::array();
    for (Nat c : st.removed_codes) removed.push_back(c);
    out["removed"] = std::move(removed);
  }
  return out;
}

}  // namespace maxlab::io
