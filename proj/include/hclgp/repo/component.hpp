#pragma once

#include <map>
#include <string>
#include <vector>

#include "hclgp/core/model.hpp"

namespace hclgp::repo {

enum class Provenance { kSeedUnchanged, kSeedModified, kLearned };

std::string_view provenance_name(Provenance p);
Provenance parse_provenance(std::string_view name);
bool is_seed(Provenance p);

struct Component {
  std::string id;
  std::string name;
  PolicySignature signature;
  // One DSL function definition named `name`.
  std::string body;
  std::string description;
  std::string usage_info;
  Provenance provenance = Provenance::kLearned;
  std::vector<std::string> origin_domains;
  long created_at = 0;

  // Throws when the body does not parse as a single function whose header
  // matches `name` and `signature`.
  void validate() const;
  friend bool operator==(const Component&, const Component&) = default;
};

// Builds a component from its source; name and signature come from the
// function header.
Component make_component(const std::string& body, std::string description = "",
                         std::string usage_info = "");

enum class UsageMode { kDirect, kIndirect };

std::string_view usage_mode_name(UsageMode m);
UsageMode parse_usage_mode(std::string_view name);

struct UsageRecord {
  std::string component_id;
  std::string domain_id;
  UsageMode mode = UsageMode::kDirect;
  long iteration = 0;

  friend bool operator==(const UsageRecord&, const UsageRecord&) = default;
};

struct UsageStats {
  int available = 0;
  int total_used = 0;
  double utilization_pct = 0;
  double per_scenario_mean = 0;
  double reuse_rate = 0;
  double multi_use_pct = 0;

  friend bool operator==(const UsageStats&, const UsageStats&) = default;
};

// Usage statistics for each provenance class. `available` lists every
// component that could have been used; records naming other ids are an
// error. Both usage modes count.
std::map<Provenance, UsageStats> usage_stats(const std::vector<Component>& available,
                                             const std::vector<UsageRecord>& records,
                                             int scenario_count);

void to_json(Json& j, const Component& c);
void from_json(const Json& j, Component& c);
void to_json(Json& j, const UsageRecord& r);
void from_json(const Json& j, UsageRecord& r);
void to_json(Json& j, const UsageStats& s);
void from_json(const Json& j, UsageStats& s);

}  // namespace hclgp::repo
