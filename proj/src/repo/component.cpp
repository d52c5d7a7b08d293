#include "hclgp/repo/component.hpp"

#include <map>
#include <set>

#include "hclgp/lang/instantiate.hpp"
#include "hclgp/lang/parser.hpp"

namespace hclgp::repo {

std::string_view provenance_name(Provenance p) {
  switch (p) {
    case Provenance::kSeedUnchanged: return "seed-unchanged";
    case Provenance::kSeedModified: return "seed-modified";
    case Provenance::kLearned: return "learned";
  }
  return "learned";
}

Provenance parse_provenance(std::string_view name) {
  if (name == "seed-unchanged") return Provenance::kSeedUnchanged;
  if (name == "seed-modified") return Provenance::kSeedModified;
  if (name == "learned") return Provenance::kLearned;
  throw Error("unknown provenance '" + std::string(name) + "'");
}

bool is_seed(Provenance p) { return p != Provenance::kLearned; }

void Component::validate() const {
  auto ast = lang::parse(body);
  if (ast.root.name != name) {
    throw InvariantError("component '" + name + "' defines function '" + ast.root.name + "'");
  }
  auto header = lang::signature_of(ast.root);
  if (!(header == signature)) {
    throw InvariantError("component header " + header.to_string() + " does not match " +
                         signature.to_string());
  }
}

Component make_component(const std::string& body, std::string description,
                         std::string usage_info) {
  auto ast = lang::parse(body);
  Component c;
  c.name = ast.root.name;
  c.signature = lang::signature_of(ast.root);
  c.body = body;
  c.description = std::move(description);
  c.usage_info = std::move(usage_info);
  return c;
}

std::string_view usage_mode_name(UsageMode m) {
  return m == UsageMode::kDirect ? "direct" : "indirect";
}

UsageMode parse_usage_mode(std::string_view name) {
  if (name == "direct") return UsageMode::kDirect;
  if (name == "indirect") return UsageMode::kIndirect;
  throw Error("unknown usage mode '" + std::string(name) + "'");
}

std::map<Provenance, UsageStats> usage_stats(const std::vector<Component>& available,
                                             const std::vector<UsageRecord>& records,
                                             int scenario_count) {
  if (scenario_count <= 0) throw Error("usage_stats needs a positive scenario count");
  std::map<std::string, Provenance> provenance;
  std::map<Provenance, UsageStats> out;
  for (auto p : {Provenance::kSeedUnchanged, Provenance::kSeedModified, Provenance::kLearned}) {
    out[p] = {};
  }
  for (const auto& c : available) {
    if (!provenance.emplace(c.id, c.provenance).second) {
      throw Error("component '" + c.id + "' listed twice");
    }
    ++out[c.provenance].available;
  }

  // component -> distinct scenarios
  std::map<std::string, std::set<std::string>> scenarios;
  for (const auto& r : records) {
    if (!provenance.count(r.component_id)) {
      throw Error("usage record for unknown component '" + r.component_id + "'");
    }
    scenarios[r.component_id].insert(r.domain_id);
  }

  std::map<Provenance, int> pairs, multi;
  for (const auto& [id, domains] : scenarios) {
    auto p = provenance.at(id);
    ++out[p].total_used;
    pairs[p] += static_cast<int>(domains.size());
    if (domains.size() >= 2) ++multi[p];
  }
  for (auto& [p, s] : out) {
    if (s.available > 0) s.utilization_pct = 100.0 * s.total_used / s.available;
    s.per_scenario_mean = static_cast<double>(pairs[p]) / scenario_count;
    if (s.total_used > 0) {
      s.reuse_rate = static_cast<double>(pairs[p]) / s.total_used;
      s.multi_use_pct = 100.0 * multi[p] / s.total_used;
    }
  }
  return out;
}

void to_json(Json& j, const Component& c) {
  j = Json{{"id", c.id},
           {"name", c.name},
           {"signature", c.signature.to_string()},
           {"provenance", std::string(provenance_name(c.provenance))},
           {"origin_domains", c.origin_domains},
           {"created_at", c.created_at},
           {"description", c.description},
           {"usage_info", c.usage_info},
           {"body", c.body}};
}

void from_json(const Json& j, Component& c) {
  c.id = j.at("id").get<std::string>();
  c.name = j.at("name").get<std::string>();
  c.signature = PolicySignature::parse(j.at("signature").get<std::string>());
  c.provenance = parse_provenance(j.at("provenance").get<std::string>());
  c.origin_domains = j.value("origin_domains", std::vector<std::string>{});
  c.created_at = j.value("created_at", 0L);
  c.description = j.value("description", "");
  c.usage_info = j.value("usage_info", "");
  c.body = j.at("body").get<std::string>();
}

void to_json(Json& j, const UsageRecord& r) {
  j = Json{{"component", r.component_id},
           {"domain", r.domain_id},
           {"mode", std::string(usage_mode_name(r.mode))},
           {"iteration", r.iteration}};
}

void from_json(const Json& j, UsageRecord& r) {
  r.component_id = j.at("component").get<std::string>();
  r.domain_id = j.at("domain").get<std::string>();
  r.mode = parse_usage_mode(j.at("mode").get<std::string>());
  r.iteration = j.value("iteration", 0L);
}

void to_json(Json& j, const UsageStats& s) {
  j = Json{{"available", s.available},
           {"total_used", s.total_used},
           {"utilization_pct", s.utilization_pct},
           {"per_scenario_mean", s.per_scenario_mean},
           {"reuse_rate", s.reuse_rate},
           {"multi_use_pct", s.multi_use_pct}};
}

void from_json(const Json& j, UsageStats& s) {
  s.available = j.at("available").get<int>();
  s.total_used = j.at("total_used").get<int>();
  s.utilization_pct = j.at("utilization_pct").get<double>();
  s.per_scenario_mean = j.at("per_scenario_mean").get<double>();
  s.reuse_rate = j.at("reuse_rate").get<double>();
  s.multi_use_pct = j.at("multi_use_pct").get<double>();
}

}  // namespace hclgp::repo
