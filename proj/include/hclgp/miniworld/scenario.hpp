#pragma once

#include <map>
#include <string>
#include <vector>

#include "hclgp/core/model.hpp"
#include "hclgp/miniworld/world.hpp"

namespace hclgp::miniworld {

struct ScenarioDomain {
  Domain domain;
  std::string phase;  // "train" or "test"
  bool challenge = false;
  std::vector<std::string> apps;
  // A policy known to solve every task, with one binding per task.
  std::string reference_policy;
  std::vector<ParameterBinding> reference_bindings;

  friend bool operator==(const ScenarioDomain&, const ScenarioDomain&) = default;
};

// Records are grouped per app; each record carries "id" and "kind".
using RecordSet = std::map<std::string, std::vector<Value>>;

struct ScenarioPack {
  RecordSet world;
  // Seed name -> records added to (or replacing by id in) the base world.
  std::map<std::string, RecordSet> seeds;
  std::vector<ScenarioDomain> domains;

  // Throws Error on unknown seeds, malformed goal predicates, bad
  // references, or duplicate domain ids.
  void validate() const;

  // Throws Error for an unknown seed.
  WorldState initial_state(const std::string& seed) const;

  const ScenarioDomain* find(const std::string& domain_id) const;
  std::vector<Domain> phase(const std::string& name) const;
  std::vector<Domain> all_domains() const;

  static ScenarioPack load(const std::string& path);
  friend bool operator==(const ScenarioPack&, const ScenarioPack&) = default;
};

void to_json(Json& j, const ScenarioDomain& v);
void from_json(const Json& j, ScenarioDomain& v);
void to_json(Json& j, const ScenarioPack& v);
void from_json(const Json& j, ScenarioPack& v);

// Location of the bundled pack.
std::string default_scenario_path();

// Goal predicates:
//   {"kind": "exists" | "absent", "app": A, "where": {...}, "contains": {...}}
//   {"kind": "count", "app": A, "where": {...}, "count": N}
// A record matches when every `where` field is equal and every `contains`
// list field holds all the listed values.
bool evaluate_goal(const WorldState& state, const Value& predicate);
// Throws Error when the predicate is malformed.
void check_goal(const Value& predicate);

}  // namespace hclgp::miniworld
