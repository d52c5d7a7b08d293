#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hclgp/core/error.hpp"
#include "hclgp/core/value.hpp"

namespace hclgp {

// ---------------------------------------------------------------------------
// Meta-domain description

struct ApiParam {
  std::string name;
  std::string type;  // string | number | boolean | list
  bool required = true;
  std::string description;

  friend bool operator==(const ApiParam&, const ApiParam&) = default;
};

struct ApiDoc {
  std::string app;
  std::string api;
  std::vector<ApiParam> params;
  std::string description;

  std::string qualified_name() const { return app + "::" + api; }
  friend bool operator==(const ApiDoc&, const ApiDoc&) = default;
};

struct MetaDomainDescriptor {
  std::string name;
  std::vector<ApiDoc> api_catalog;

  // Throws InvariantError on duplicate (app, api) pairs or empty descriptions.
  void validate() const;
  friend bool operator==(const MetaDomainDescriptor&,
                         const MetaDomainDescriptor&) = default;
};

// ---------------------------------------------------------------------------
// Domains and tasks

// A named predicate over the final world state. The predicate body is opaque
// to the engine; only the validator interprets it.
struct GoalTest {
  std::string name;
  Value predicate;

  friend bool operator==(const GoalTest&, const GoalTest&) = default;
};

struct TaskInstance {
  std::string id;
  std::string instruction;
  std::string initial_state_seed;
  std::vector<GoalTest> goal_tests;

  void validate() const;
  friend bool operator==(const TaskInstance&, const TaskInstance&) = default;
};

struct Domain {
  std::string id;
  std::string description;
  std::vector<TaskInstance> tasks;

  void validate() const;
  const TaskInstance* find_task(const std::string& task_id) const;
  friend bool operator==(const Domain&, const Domain&) = default;
};

// ---------------------------------------------------------------------------
// Policies, bindings, plans

enum class ParamType { kString, kNumber, kBoolean, kStringList };

std::string_view param_type_name(ParamType t);
std::optional<ParamType> parse_param_type(std::string_view name);
bool literal_matches(ParamType t, const Value& v);

struct PolicyParam {
  std::string name;
  ParamType type = ParamType::kString;

  friend bool operator==(const PolicyParam&, const PolicyParam&) = default;
};

struct PolicySignature {
  std::string name;
  std::vector<PolicyParam> params;

  void validate() const;
  // Canonical text form: `name(a: string, b: number)`.
  std::string to_string() const;
  static PolicySignature parse(std::string_view text);
  std::vector<std::string> param_names() const;
  friend bool operator==(const PolicySignature&,
                         const PolicySignature&) = default;
};

struct Policy {
  PolicySignature signature;
  std::string source;
  // Names of the components the source calls, sorted and unique.
  std::vector<std::string> referenced_components;

  friend bool operator==(const Policy&, const Policy&) = default;
};

struct ParameterBinding {
  std::string task_id;
  std::map<std::string, Value> values;

  friend bool operator==(const ParameterBinding&,
                         const ParameterBinding&) = default;
};

struct Plan {
  std::string task_id;
  std::string instantiated_source;

  friend bool operator==(const Plan&, const Plan&) = default;
};

// ---------------------------------------------------------------------------
// Validation

struct ApiCallRecord {
  std::string app;
  std::string api;
  Record args;
  Value response;
  std::optional<std::string> error;

  friend bool operator==(const ApiCallRecord&, const ApiCallRecord&) = default;
};

struct ValidationOutcome {
  std::string task_id;
  bool passed = false;
  std::vector<std::string> failed_tests;
  std::optional<std::string> error;
  std::vector<ApiCallRecord> trace;

  void validate() const;
  friend bool operator==(const ValidationOutcome&,
                         const ValidationOutcome&) = default;
};

// ---------------------------------------------------------------------------
// Configuration

struct EngineConfig {
  int retrieval_k = 20;
  double cluster_threshold = 0.85;
  int debug_budget = 3;
  int generalization_trigger = 20;
  double price_per_m_input = 3.0;
  double price_per_m_output = 15.0;

  void validate() const;
  friend bool operator==(const EngineConfig&, const EngineConfig&) = default;
};

// ---------------------------------------------------------------------------
// Binding check

struct BindingReport {
  std::vector<std::string> missing;
  std::vector<std::string> extra;
  std::vector<std::string> type_mismatch;

  bool ok() const {
    return missing.empty() && extra.empty() && type_mismatch.empty();
  }
  std::string describe() const;
};

BindingReport check_binding(const PolicySignature& signature,
                            const ParameterBinding& binding);

// ---------------------------------------------------------------------------
// Canonical serialization (JSON with stable field order)

void to_json(Json& j, const ApiParam& v);
void from_json(const Json& j, ApiParam& v);
void to_json(Json& j, const ApiDoc& v);
void from_json(const Json& j, ApiDoc& v);
void to_json(Json& j, const MetaDomainDescriptor& v);
void from_json(const Json& j, MetaDomainDescriptor& v);
void to_json(Json& j, const GoalTest& v);
void from_json(const Json& j, GoalTest& v);
void to_json(Json& j, const TaskInstance& v);
void from_json(const Json& j, TaskInstance& v);
void to_json(Json& j, const Domain& v);
void from_json(const Json& j, Domain& v);
void to_json(Json& j, const PolicySignature& v);
void from_json(const Json& j, PolicySignature& v);
void to_json(Json& j, const Policy& v);
void from_json(const Json& j, Policy& v);
void to_json(Json& j, const ParameterBinding& v);
void from_json(const Json& j, ParameterBinding& v);
void to_json(Json& j, const Plan& v);
void from_json(const Json& j, Plan& v);
void to_json(Json& j, const ApiCallRecord& v);
void from_json(const Json& j, ApiCallRecord& v);
void to_json(Json& j, const ValidationOutcome& v);
void from_json(const Json& j, ValidationOutcome& v);
void to_json(Json& j, const EngineConfig& v);
void from_json(const Json& j, EngineConfig& v);

// Single-line canonical encoding used by the line-oriented store files.
template <typename T>
std::string encode(const T& v) {
  Json j = v;
  return j.dump();
}

template <typename T>
T decode(const std::string& text) {
  return Json::parse(text).get<T>();
}

}  // namespace hclgp
