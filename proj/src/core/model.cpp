#include "hclgp/core/model.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace hclgp {

namespace {

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) {
    return false;
  }
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += items[i];
  }
  return out;
}

}  // namespace

void MetaDomainDescriptor::validate() const {
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& doc : api_catalog) {
    if (!seen.insert({doc.app, doc.api}).second) {
      throw InvariantError("duplicate api " + doc.qualified_name());
    }
    if (doc.description.empty()) {
      throw InvariantError("api " + doc.qualified_name() +
                           " has an empty description");
    }
  }
}

void TaskInstance::validate() const {
  if (id.empty()) throw InvariantError("task id is empty");
  if (instruction.empty()) {
    throw InvariantError("task " + id + " has an empty instruction");
  }
  if (goal_tests.empty()) {
    throw InvariantError("task " + id + " has no goal tests");
  }
}

void Domain::validate() const {
  if (tasks.empty()) throw InvariantError("domain " + id + " has no tasks");
  std::set<std::string> ids;
  for (const auto& t : tasks) {
    t.validate();
    if (!ids.insert(t.id).second) {
      throw InvariantError("duplicate task id " + t.id + " in domain " + id);
    }
  }
}

const TaskInstance* Domain::find_task(const std::string& task_id) const {
  for (const auto& t : tasks) {
    if (t.id == task_id) return &t;
  }
  return nullptr;
}

std::string_view param_type_name(ParamType t) {
  switch (t) {
    case ParamType::kString: return "string";
    case ParamType::kNumber: return "number";
    case ParamType::kBoolean: return "boolean";
    case ParamType::kStringList: return "list";
  }
  return "?";
}

std::optional<ParamType> parse_param_type(std::string_view name) {
  if (name == "string") return ParamType::kString;
  if (name == "number") return ParamType::kNumber;
  if (name == "boolean") return ParamType::kBoolean;
  if (name == "list") return ParamType::kStringList;
  return std::nullopt;
}

bool literal_matches(ParamType t, const Value& v) {
  switch (t) {
    case ParamType::kString: return v.is_string();
    case ParamType::kNumber: return v.is_number();
    case ParamType::kBoolean: return v.is_bool();
    case ParamType::kStringList:
      return v.is_list() &&
             std::all_of(v.as_list().begin(), v.as_list().end(),
                         [](const Value& x) { return x.is_string(); });
  }
  return false;
}

void PolicySignature::validate() const {
  if (!is_identifier(name)) {
    throw InvariantError("invalid signature name '" + name + "'");
  }
  std::set<std::string> seen;
  for (const auto& p : params) {
    if (!is_identifier(p.name)) {
      throw InvariantError("invalid parameter name '" + p.name + "'");
    }
    if (!seen.insert(p.name).second) {
      throw InvariantError("duplicate parameter '" + p.name + "'");
    }
  }
}

std::string PolicySignature::to_string() const {
  std::string out = name + "(";
  for (size_t i = 0; i < params.size(); ++i) {
    if (i) out += ", ";
    out += params[i].name;
    out += ": ";
    out += param_type_name(params[i].type);
  }
  return out + ")";
}

PolicySignature PolicySignature::parse(std::string_view text) {
  text = trim(text);
  auto open = text.find('(');
  if (open == std::string_view::npos || text.back() != ')') {
    throw InvariantError("malformed signature '" + std::string(text) + "'");
  }
  PolicySignature sig;
  sig.name = std::string(trim(text.substr(0, open)));
  std::string_view inner = text.substr(open + 1, text.size() - open - 2);
  if (!trim(inner).empty()) {
    size_t start = 0;
    while (start <= inner.size()) {
      size_t comma = inner.find(',', start);
      std::string_view part = trim(inner.substr(
          start, comma == std::string_view::npos ? std::string_view::npos
                                                 : comma - start));
      auto colon = part.find(':');
      if (colon == std::string_view::npos) {
        throw InvariantError("parameter '" + std::string(part) +
                             "' lacks a type");
      }
      auto type = parse_param_type(trim(part.substr(colon + 1)));
      if (!type) {
        throw InvariantError("unknown parameter type in '" +
                             std::string(part) + "'");
      }
      sig.params.push_back({std::string(trim(part.substr(0, colon))), *type});
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
  }
  sig.validate();
  return sig;
}

std::vector<std::string> PolicySignature::param_names() const {
  std::vector<std::string> names;
  for (const auto& p : params) names.push_back(p.name);
  return names;
}

void ValidationOutcome::validate() const {
  if (passed && (!failed_tests.empty() || error)) {
    throw InvariantError("passed outcome for " + task_id +
                         " carries failures");
  }
}

void EngineConfig::validate() const {
  if (retrieval_k <= 0) throw InvariantError("retrieval_k must be positive");
  if (!(cluster_threshold > 0.0 && cluster_threshold <= 1.0)) {
    throw InvariantError("cluster_threshold must lie in (0, 1]");
  }
  if (debug_budget <= 0) throw InvariantError("debug_budget must be positive");
  if (generalization_trigger <= 0) {
    throw InvariantError("generalization_trigger must be positive");
  }
  if (!(price_per_m_input > 0.0 && price_per_m_output > 0.0)) {
    throw InvariantError("prices must be positive");
  }
}

std::string BindingReport::describe() const {
  std::ostringstream out;
  const char* sep = "";
  if (!missing.empty()) {
    out << "missing: " << join(missing);
    sep = "; ";
  }
  if (!extra.empty()) {
    out << sep << "extra: " << join(extra);
    sep = "; ";
  }
  if (!type_mismatch.empty()) out << sep << "type: " << join(type_mismatch);
  return out.str();
}

BindingReport check_binding(const PolicySignature& signature,
                            const ParameterBinding& binding) {
  BindingReport report;
  std::set<std::string> declared;
  for (const auto& p : signature.params) {
    declared.insert(p.name);
    auto it = binding.values.find(p.name);
    if (it == binding.values.end()) {
      report.missing.push_back(p.name);
    } else if (!literal_matches(p.type, it->second)) {
      report.type_mismatch.push_back(p.name);
    }
  }
  for (const auto& [name, _] : binding.values) {
    if (!declared.count(name)) report.extra.push_back(name);
  }
  return report;
}

// ---------------------------------------------------------------------------
// JSON

void to_json(Json& j, const ApiParam& v) {
  j = Json{{"name", v.name},
           {"type", v.type},
           {"required", v.required},
           {"description", v.description}};
}

void from_json(const Json& j, ApiParam& v) {
  v.name = j.at("name").get<std::string>();
  v.type = j.at("type").get<std::string>();
  v.required = j.value("required", true);
  v.description = j.value("description", std::string());
}

void to_json(Json& j, const ApiDoc& v) {
  j = Json{{"app", v.app},
           {"api", v.api},
           {"params", v.params},
           {"description", v.description}};
}

void from_json(const Json& j, ApiDoc& v) {
  v.app = j.at("app").get<std::string>();
  v.api = j.at("api").get<std::string>();
  v.params = j.at("params").get<std::vector<ApiParam>>();
  v.description = j.at("description").get<std::string>();
}

void to_json(Json& j, const MetaDomainDescriptor& v) {
  j = Json{{"name", v.name}, {"api_catalog", v.api_catalog}};
}

void from_json(const Json& j, MetaDomainDescriptor& v) {
  v.name = j.at("name").get<std::string>();
  v.api_catalog = j.at("api_catalog").get<std::vector<ApiDoc>>();
  v.validate();
}

void to_json(Json& j, const GoalTest& v) {
  j = Json{{"name", v.name}, {"predicate", to_json_value(v.predicate)}};
}

void from_json(const Json& j, GoalTest& v) {
  v.name = j.at("name").get<std::string>();
  v.predicate = from_json_value(j.at("predicate"));
}

void to_json(Json& j, const TaskInstance& v) {
  j = Json{{"id", v.id},
           {"instruction", v.instruction},
           {"initial_state_seed", v.initial_state_seed},
           {"goal_tests", v.goal_tests}};
}

void from_json(const Json& j, TaskInstance& v) {
  v.id = j.at("id").get<std::string>();
  v.instruction = j.at("instruction").get<std::string>();
  v.initial_state_seed = j.at("initial_state_seed").get<std::string>();
  v.goal_tests = j.at("goal_tests").get<std::vector<GoalTest>>();
  v.validate();
}

void to_json(Json& j, const Domain& v) {
  j = Json{{"id", v.id}, {"description", v.description}, {"tasks", v.tasks}};
}

void from_json(const Json& j, Domain& v) {
  v.id = j.at("id").get<std::string>();
  v.description = j.value("description", std::string());
  v.tasks = j.at("tasks").get<std::vector<TaskInstance>>();
  v.validate();
}

void to_json(Json& j, const PolicySignature& v) { j = v.to_string(); }

void from_json(const Json& j, PolicySignature& v) {
  v = PolicySignature::parse(j.get<std::string>());
}

void to_json(Json& j, const Policy& v) {
  j = Json{{"signature", v.signature},
           {"source", v.source},
           {"referenced_components", v.referenced_components}};
}

void from_json(const Json& j, Policy& v) {
  v.signature = j.at("signature").get<PolicySignature>();
  v.source = j.at("source").get<std::string>();
  v.referenced_components =
      j.at("referenced_components").get<std::vector<std::string>>();
}

void to_json(Json& j, const ParameterBinding& v) {
  Json values = Json::object();
  for (const auto& [k, val] : v.values) values[k] = to_json_value(val);
  j = Json{{"task_id", v.task_id}, {"values", values}};
}

void from_json(const Json& j, ParameterBinding& v) {
  v.task_id = j.at("task_id").get<std::string>();
  v.values.clear();
  const auto& values = j.at("values");
  for (auto it = values.begin(); it != values.end(); ++it) {
    v.values[it.key()] = from_json_value(it.value());
  }
}

void to_json(Json& j, const Plan& v) {
  j = Json{{"task_id", v.task_id},
           {"instantiated_source", v.instantiated_source}};
}

void from_json(const Json& j, Plan& v) {
  v.task_id = j.at("task_id").get<std::string>();
  v.instantiated_source = j.at("instantiated_source").get<std::string>();
}

void to_json(Json& j, const ApiCallRecord& v) {
  j = Json{{"app", v.app},
           {"api", v.api},
           {"args", to_json_value(Value(v.args))},
           {"response", to_json_value(v.response)}};
  if (v.error) {
    j["error"] = *v.error;
  } else {
    j["error"] = nullptr;
  }
}

void from_json(const Json& j, ApiCallRecord& v) {
  v.app = j.at("app").get<std::string>();
  v.api = j.at("api").get<std::string>();
  Value args = from_json_value(j.at("args"));
  v.args = args.is_record() ? args.as_record() : Record{};
  v.response = from_json_value(j.at("response"));
  if (j.contains("error") && !j.at("error").is_null()) {
    v.error = j.at("error").get<std::string>();
  } else {
    v.error.reset();
  }
}

void to_json(Json& j, const ValidationOutcome& v) {
  j = Json{{"task_id", v.task_id},
           {"passed", v.passed},
           {"failed_tests", v.failed_tests}};
  if (v.error) {
    j["error"] = *v.error;
  } else {
    j["error"] = nullptr;
  }
  j["trace"] = v.trace;
}

void from_json(const Json& j, ValidationOutcome& v) {
  v.task_id = j.at("task_id").get<std::string>();
  v.passed = j.at("passed").get<bool>();
  v.failed_tests = j.at("failed_tests").get<std::vector<std::string>>();
  if (!j.at("error").is_null()) {
    v.error = j.at("error").get<std::string>();
  } else {
    v.error.reset();
  }
  v.trace = j.at("trace").get<std::vector<ApiCallRecord>>();
  v.validate();
}

void to_json(Json& j, const EngineConfig& v) {
  j = Json{{"retrieval_k", v.retrieval_k},
           {"cluster_threshold", v.cluster_threshold},
           {"debug_budget", v.debug_budget},
           {"generalization_trigger", v.generalization_trigger},
           {"price_per_m_input", v.price_per_m_input},
           {"price_per_m_output", v.price_per_m_output}};
}

void from_json(const Json& j, EngineConfig& v) {
  EngineConfig d;
  v.retrieval_k = j.value("retrieval_k", d.retrieval_k);
  v.cluster_threshold = j.value("cluster_threshold", d.cluster_threshold);
  v.debug_budget = j.value("debug_budget", d.debug_budget);
  v.generalization_trigger =
      j.value("generalization_trigger", d.generalization_trigger);
  v.price_per_m_input = j.value("price_per_m_input", d.price_per_m_input);
  v.price_per_m_output = j.value("price_per_m_output", d.price_per_m_output);
  v.validate();
}

}  // namespace hclgp
