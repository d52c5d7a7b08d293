#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "hclgp/agents/agents.hpp"
#include "hclgp/generalize/generalize.hpp"
#include "hclgp/lang/validator.hpp"
#include "hclgp/llm/gateway.hpp"
#include "hclgp/miniworld/scenario.hpp"
#include "hclgp/repo/repository.hpp"

namespace hclgp::orchestrator {

enum class Mode { kGP, kHCLGP };

std::string_view mode_name(Mode m);
Mode parse_mode(std::string_view name);

struct DomainResult {
  std::string domain_id;
  bool solved = false;
  std::map<std::string, bool> task_passed;
  // Policy validations in the generation cycle (initial policy included).
  int iterations = 0;
  llm::Usage usage;
  std::string final_policy_id;  // hash of the final policy source, "" if none
  std::string final_policy;
  std::vector<std::string> components_learned;

  int revisions() const { return iterations > 0 ? iterations - 1 : 0; }
};

struct RunEvent {
  enum class Kind { kDebugIteration, kGeneralizationPass, kDomainSolved };

  long ordinal = 0;
  Kind kind = Kind::kDebugIteration;
  std::string domain_id;
  long iteration = 0;  // global counter after the event
  llm::Usage cumulative;

  friend bool operator==(const RunEvent&, const RunEvent&) = default;
};

std::string_view event_kind_name(RunEvent::Kind k);
RunEvent::Kind parse_event_kind(std::string_view name);

// Append-only event log with the global debugging-iteration counter.
class RunLog {
 public:
  // Token counts in events are relative to `origin`.
  explicit RunLog(llm::Usage origin = {}) : origin_(origin) {}
  void add(RunEvent::Kind kind, const std::string& domain, const llm::Usage& cumulative);
  long iterations() const { return iterations_; }
  const std::vector<RunEvent>& events() const { return events_; }

 private:
  llm::Usage origin_;
  std::vector<RunEvent> events_;
  long iterations_ = 0;
};

struct SuiteReport {
  Mode mode = Mode::kHCLGP;
  EngineConfig config;
  std::vector<std::string> domain_ids;
  std::vector<DomainResult> results;
  std::vector<RunEvent> events;
  std::vector<generalize::GeneralizationReport> generalizations;
  llm::Usage total_usage;
  long total_iterations = 0;
  // Component usage over this suite, HCL-GP mode only.
  std::map<repo::Provenance, repo::UsageStats> component_usage;
};

struct Engine {
  EngineConfig config;
  std::shared_ptr<llm::Gateway> gateway;
  std::shared_ptr<const lang::Validator> validator;
  // Every domain that may appear in the policy archive.
  std::vector<Domain> catalog;
  std::shared_ptr<repo::Repository> repo;
  std::shared_ptr<agents::Agents> agents;
  // Called after every accepted decomposition and generalization pass.
  std::function<void(const std::string&)> after_change;

  const Domain* find_domain(const std::string& id) const;
  generalize::DomainLookup lookup() const;
};

// Engine over a miniworld scenario pack. The repository's embedder is used
// for api and component retrieval.
Engine make_miniworld_engine(const EngineConfig& config,
                             std::shared_ptr<const miniworld::ScenarioPack> pack,
                             std::shared_ptr<llm::Gateway> gateway,
                             std::shared_ptr<repo::Repository> repo,
                             agents::TemplateSet templates);

DomainResult solve_domain(Engine& engine, const Domain& domain, Mode mode, RunLog& log);

SuiteReport run_suite(Engine& engine, const std::vector<Domain>& domains, Mode mode);

struct SeedReport {
  SuiteReport suite;
  std::vector<generalize::GeneralizationReport> consolidation;
  std::size_t validated_components = 0;
};

// Runs the training domains in HCL-GP mode from empty stores, then two full
// generalization passes. engine.repo->seed_snapshot() is the seed.
SeedReport seed_repository(Engine& engine, const std::vector<Domain>& training);

struct AuditEntry {
  std::string domain_id;
  bool passed = false;
  std::string detail;
};

// Re-validates every archived policy with its stored bindings.
std::vector<AuditEntry> audit_archive(const Engine& engine);

void to_json(Json& j, const DomainResult& r);
void from_json(const Json& j, DomainResult& r);
void to_json(Json& j, const RunEvent& e);
void from_json(const Json& j, RunEvent& e);
void to_json(Json& j, const SuiteReport& r);
void from_json(const Json& j, SuiteReport& r);

}  // namespace hclgp::orchestrator
