#include "hclgp/miniworld/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "hclgp/lang/instantiate.hpp"

namespace hclgp::miniworld {

namespace {

RecordSet record_set_from_json(const Json& j) {
  RecordSet out;
  for (const auto& [app, records] : j.items()) {
    for (const auto& rec : records) out[app].push_back(from_json_value(rec));
  }
  return out;
}

Json record_set_to_json(const RecordSet& set) {
  Json out = Json::object();
  for (const auto& [app, records] : set) {
    Json arr = Json::array();
    for (const auto& rec : records) arr.push_back(to_json_value(rec));
    out[app] = arr;
  }
  return out;
}

void check_records(const RecordSet& set, const std::string& where) {
  for (const auto& [app, records] : set) {
    std::set<std::string> ids;
    for (const auto& rec : records) {
      const Value* id = rec.field("id");
      const Value* kind = rec.field("kind");
      if (!id || !id->is_string() || !kind || !kind->is_string()) {
        throw Error(where + ": record in '" + app + "' lacks string id/kind");
      }
      if (!ids.insert(id->as_string()).second) {
        throw Error(where + ": duplicate record id '" + id->as_string() +
                    "' in '" + app + "'");
      }
    }
  }
}

bool record_matches(const Value& rec, const Value* where, const Value* contains) {
  if (where) {
    for (const auto& [key, expected] : where->as_record()) {
      const Value* actual = rec.field(key);
      if (!actual || *actual != expected) return false;
    }
  }
  if (contains) {
    for (const auto& [key, expected] : contains->as_record()) {
      const Value* actual = rec.field(key);
      if (!actual || !actual->is_list()) return false;
      const auto& have = actual->as_list();
      const List wanted = expected.is_list() ? expected.as_list() : List{expected};
      for (const auto& w : wanted) {
        if (std::find(have.begin(), have.end(), w) == have.end()) return false;
      }
    }
  }
  return true;
}

}  // namespace

void check_goal(const Value& p) {
  if (!p.is_record()) throw Error("goal predicate must be an object");
  const Value* kind = p.field("kind");
  const Value* app = p.field("app");
  if (!kind || !kind->is_string()) throw Error("goal predicate needs a kind");
  if (!app || !app->is_string()) throw Error("goal predicate needs an app");
  const std::string& k = kind->as_string();
  if (k != "exists" && k != "absent" && k != "count") {
    throw Error("unknown goal predicate kind '" + k + "'");
  }
  for (const char* key : {"where", "contains"}) {
    const Value* v = p.field(key);
    if (v && !v->is_record()) {
      throw Error(std::string("goal predicate '") + key + "' must be an object");
    }
  }
  const Value* count = p.field("count");
  if (k == "count" && (!count || !count->is_number())) {
    throw Error("count predicate needs a numeric count");
  }
}

bool evaluate_goal(const WorldState& state, const Value& p) {
  check_goal(p);
  const std::string& kind = p.field("kind")->as_string();
  const Value* where = p.field("where");
  const Value* contains = p.field("contains");
  int n = 0;
  if (const auto* store = state.store(p.field("app")->as_string())) {
    for (const auto& [_, rec] : *store) {
      if (record_matches(rec, where, contains)) ++n;
    }
  }
  if (kind == "exists") return n > 0;
  if (kind == "absent") return n == 0;
  return n == static_cast<int>(p.field("count")->as_number());
}

void ScenarioPack::validate() const {
  check_records(world, "world");
  for (const auto& [name, set] : seeds) check_records(set, "seed " + name);
  std::set<std::string> ids;
  for (const auto& sd : domains) {
    const std::string where = "domain " + sd.domain.id;
    if (!ids.insert(sd.domain.id).second) throw Error("duplicate " + where);
    sd.domain.validate();
    if (sd.phase != "train" && sd.phase != "test") {
      throw Error(where + ": phase must be train or test");
    }
    for (const auto& task : sd.domain.tasks) {
      if (!seeds.count(task.initial_state_seed)) {
        throw Error(where + ": unknown seed '" + task.initial_state_seed + "'");
      }
      for (const auto& goal : task.goal_tests) check_goal(goal.predicate);
    }
    Policy ref = lang::make_policy(sd.reference_policy);
    if (sd.reference_bindings.size() != sd.domain.tasks.size()) {
      throw Error(where + ": one reference binding per task required");
    }
    for (const auto& b : sd.reference_bindings) {
      if (!sd.domain.find_task(b.task_id)) {
        throw Error(where + ": binding for unknown task '" + b.task_id + "'");
      }
      auto report = check_binding(ref.signature, b);
      if (!report.ok()) throw Error(where + ": " + report.describe());
    }
  }
}

WorldState ScenarioPack::initial_state(const std::string& seed) const {
  auto it = seeds.find(seed);
  if (it == seeds.end()) throw Error("unknown seed '" + seed + "'");
  WorldState state;
  auto load = [&](const RecordSet& set) {
    for (const auto& [app, records] : set) {
      for (const auto& rec : records) {
        state.stores[app][rec.field("id")->as_string()] = rec;
      }
    }
  };
  load(world);
  load(it->second);
  return state;
}

const ScenarioDomain* ScenarioPack::find(const std::string& domain_id) const {
  for (const auto& sd : domains) {
    if (sd.domain.id == domain_id) return &sd;
  }
  return nullptr;
}

std::vector<Domain> ScenarioPack::phase(const std::string& name) const {
  std::vector<Domain> out;
  for (const auto& sd : domains) {
    if (sd.phase == name) out.push_back(sd.domain);
  }
  return out;
}

std::vector<Domain> ScenarioPack::all_domains() const {
  std::vector<Domain> out;
  for (const auto& sd : domains) out.push_back(sd.domain);
  return out;
}

ScenarioPack ScenarioPack::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open scenario pack '" + path + "'");
  ScenarioPack pack;
  try {
    pack = Json::parse(in).get<ScenarioPack>();
  } catch (const Json::exception& e) {
    throw Error("malformed scenario pack '" + path + "': " + e.what());
  }
  pack.validate();
  return pack;
}

std::string default_scenario_path() {
  return std::string(HCLGP_DATA_DIR) + "/data/miniworld/scenarios.json";
}

void to_json(Json& j, const ScenarioDomain& v) {
  j = Json::object();
  j["id"] = v.domain.id;
  j["description"] = v.domain.description;
  j["phase"] = v.phase;
  j["challenge"] = v.challenge;
  j["apps"] = v.apps;
  j["tasks"] = v.domain.tasks;
  j["reference_policy"] = v.reference_policy;
  j["reference_bindings"] = v.reference_bindings;
}

void from_json(const Json& j, ScenarioDomain& v) {
  v.domain.id = j.at("id").get<std::string>();
  v.domain.description = j.value("description", "");
  v.domain.tasks = j.at("tasks").get<std::vector<TaskInstance>>();
  v.phase = j.at("phase").get<std::string>();
  v.challenge = j.value("challenge", false);
  v.apps = j.value("apps", std::vector<std::string>{});
  v.reference_policy = j.at("reference_policy").get<std::string>();
  v.reference_bindings =
      j.at("reference_bindings").get<std::vector<ParameterBinding>>();
}

void to_json(Json& j, const ScenarioPack& v) {
  j = Json::object();
  j["world"] = record_set_to_json(v.world);
  Json seeds = Json::object();
  for (const auto& [name, set] : v.seeds) seeds[name] = record_set_to_json(set);
  j["seeds"] = seeds;
  j["domains"] = v.domains;
}

void from_json(const Json& j, ScenarioPack& v) {
  v.world = record_set_from_json(j.at("world"));
  v.seeds.clear();
  for (const auto& [name, set] : j.at("seeds").items()) {
    v.seeds[name] = record_set_from_json(set);
  }
  v.domains = j.at("domains").get<std::vector<ScenarioDomain>>();
}

}  // namespace hclgp::miniworld
