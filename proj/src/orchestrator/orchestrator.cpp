#include "hclgp/orchestrator/orchestrator.hpp"

#include <algorithm>

#include "hclgp/lang/parser.hpp"
#include "hclgp/miniworld/validator.hpp"
#include "hclgp/miniworld/world.hpp"
#include "hclgp/retrieval/embedding.hpp"

namespace hclgp::orchestrator {

std::string_view mode_name(Mode m) { return m == Mode::kGP ? "gp" : "hclgp"; }

Mode parse_mode(std::string_view name) {
  if (name == "gp") return Mode::kGP;
  if (name == "hclgp") return Mode::kHCLGP;
  throw Error("unknown mode '" + std::string(name) + "' (expected gp or hclgp)");
}

std::string_view event_kind_name(RunEvent::Kind k) {
  switch (k) {
    case RunEvent::Kind::kDebugIteration: return "debug-iteration";
    case RunEvent::Kind::kGeneralizationPass: return "generalization-pass";
    case RunEvent::Kind::kDomainSolved: return "domain-solved";
  }
  return "debug-iteration";
}

RunEvent::Kind parse_event_kind(std::string_view name) {
  if (name == "debug-iteration") return RunEvent::Kind::kDebugIteration;
  if (name == "generalization-pass") return RunEvent::Kind::kGeneralizationPass;
  if (name == "domain-solved") return RunEvent::Kind::kDomainSolved;
  throw Error("unknown event kind '" + std::string(name) + "'");
}

void RunLog::add(RunEvent::Kind kind, const std::string& domain, const llm::Usage& cumulative) {
  if (kind == RunEvent::Kind::kDebugIteration) ++iterations_;
  llm::Usage rel{cumulative.input_tokens - origin_.input_tokens,
                 cumulative.output_tokens - origin_.output_tokens};
  events_.push_back({static_cast<long>(events_.size()) + 1, kind, domain, iterations_, rel});
}

const Domain* Engine::find_domain(const std::string& id) const {
  for (const auto& d : catalog) {
    if (d.id == id) return &d;
  }
  return nullptr;
}

generalize::DomainLookup Engine::lookup() const {
  return [this](const std::string& id) { return find_domain(id); };
}

Engine make_miniworld_engine(const EngineConfig& config,
                             std::shared_ptr<const miniworld::ScenarioPack> pack,
                             std::shared_ptr<llm::Gateway> gateway,
                             std::shared_ptr<repo::Repository> repo,
                             agents::TemplateSet templates) {
  config.validate();
  Engine e;
  e.config = config;
  e.gateway = gateway;
  e.validator = std::make_shared<miniworld::MiniWorld>(pack);
  e.catalog = pack->all_domains();
  e.repo = repo;
  e.agents = std::make_shared<agents::Agents>(*gateway, std::move(templates), repo->embedder_ptr(),
                                              miniworld::api_docs(), config.retrieval_k);
  return e;
}

namespace {

llm::Usage operator-(const llm::Usage& a, const llm::Usage& b) {
  return {a.input_tokens - b.input_tokens, a.output_tokens - b.output_tokens};
}

lang::ComponentResolver no_components() {
  return [](const std::string&) -> std::shared_ptr<const lang::FunctionDef> { return nullptr; };
}

// New components first, then whatever the domain already sees.
lang::ComponentResolver overlay(const std::vector<repo::Component>& fresh,
                                lang::ComponentResolver base) {
  std::map<std::string, std::shared_ptr<const lang::FunctionDef>> table;
  for (const auto& c : fresh) {
    table[c.name] = std::make_shared<const lang::FunctionDef>(lang::parse(c.body).root);
  }
  return [table = std::move(table), base = std::move(base)](const std::string& name)
             -> std::shared_ptr<const lang::FunctionDef> {
    auto it = table.find(name);
    return it != table.end() ? it->second : base(name);
  };
}

std::string failure_summary(const std::vector<ValidationOutcome>& outcomes) {
  std::string out;
  for (const auto& o : outcomes) {
    if (o.passed) continue;
    out += "task " + o.task_id + ": " + (o.error ? *o.error : "goal tests failed");
    for (const auto& t : o.failed_tests) out += " [" + t + "]";
    if (!o.trace.empty()) out += "; last call " + agents::format_call(o.trace.back());
    out += "\n";
  }
  return out;
}

}  // namespace

DomainResult solve_domain(Engine& engine, const Domain& domain, Mode mode, RunLog& log) {
  auto& agent = *engine.agents;
  auto& repo = *engine.repo;
  const auto& validator = *engine.validator;
  const llm::Usage start = engine.gateway->ledger().totals();
  auto now = [&] { return engine.gateway->ledger().totals(); };

  DomainResult result;
  result.domain_id = domain.id;
  for (const auto& t : domain.tasks) result.task_passed[t.id] = false;

  agents::AbstractionResult abstraction;
  try {
    abstraction = agent.abstract_domain(domain);
  } catch (const Error&) {
    result.usage = now() - start;
    return result;
  }

  agents::ComponentContext ctx;
  if (mode == Mode::kHCLGP) ctx = agents::component_context(repo, agent.search_components(abstraction, repo));
  auto resolver = [&] {
    return mode == Mode::kHCLGP ? repo.resolver(domain.id) : no_components();
  };

  std::optional<Policy> policy;
  std::vector<ValidationOutcome> outcomes;
  std::string feedback;
  for (int revision = 0; revision <= engine.config.debug_budget; ++revision) {
    std::optional<Policy> candidate;
    try {
      if (!policy) {
        candidate = agent.generate_policy(domain, abstraction, ctx, feedback);
      } else {
        candidate = agent.debug_policy(domain, abstraction, *policy, outcomes, revision, ctx);
      }
    } catch (const Error& e) {
      feedback = std::string("previous reply rejected: ") + e.what();
    }
    if (candidate) {
      policy = candidate;
      outcomes = lang::validate_policy(*policy, abstraction.bindings, domain, validator, resolver());
    }
    ++result.iterations;
    log.add(RunEvent::Kind::kDebugIteration, domain.id, now());
    if (candidate && lang::all_passed(outcomes)) break;
  }

  for (const auto& o : outcomes) result.task_passed[o.task_id] = o.passed;
  result.solved = policy && lang::all_passed(outcomes);
  if (policy) {
    result.final_policy = policy->source;
    result.final_policy_id = retrieval::hash_hex(policy->source);
  }

  if (result.solved && mode == Mode::kHCLGP) {
    Policy final_policy = *policy;
    std::vector<repo::Component> learned;
    std::string fb;
    for (int attempt = 1; attempt <= engine.config.debug_budget + 1; ++attempt) {
      agents::Decomposition d;
      try {
        d = agent.decompose_policy(domain, *policy, ctx, fb, attempt);
      } catch (const Error& e) {
        fb = std::string("previous reply rejected: ") + e.what();
        continue;
      }
      if (d.components.empty() && d.updated.source == policy->source) break;
      auto check = lang::validate_policy(d.updated, abstraction.bindings, domain, validator,
                                         overlay(d.components, repo.resolver(domain.id)));
      if (lang::all_passed(check)) {
        final_policy = d.updated;
        learned = d.components;
        break;
      }
      fb = "the updated policy failed validation:\n" + failure_summary(check);
    }
    for (auto& c : learned) {
      c.origin_domains = {domain.id};
      result.components_learned.push_back(repo.add_learned(c));
    }
    repo.archive({domain.id, final_policy, abstraction.bindings});
    repo.record_usage(final_policy, domain.id, log.iterations());
    result.final_policy = final_policy.source;
    result.final_policy_id = retrieval::hash_hex(final_policy.source);
    if (!learned.empty() && engine.after_change) engine.after_change("decomposition " + domain.id);
  }
  if (result.solved) log.add(RunEvent::Kind::kDomainSolved, domain.id, now());
  result.usage = now() - start;
  return result;
}

SuiteReport run_suite(Engine& engine, const std::vector<Domain>& domains, Mode mode) {
  SuiteReport report;
  report.mode = mode;
  report.config = engine.config;
  const llm::Usage start = engine.gateway->ledger().totals();
  RunLog log(start);
  long passes = 0;
  for (const auto& domain : domains) {
    report.domain_ids.push_back(domain.id);
    report.results.push_back(solve_domain(engine, domain, mode, log));
    if (mode != Mode::kHCLGP) continue;
    while (log.iterations() / engine.config.generalization_trigger > passes) {
      ++passes;
      report.generalizations.push_back(generalize::run_generalization(
          *engine.repo, *engine.agents, *engine.validator, engine.lookup(), engine.config));
      log.add(RunEvent::Kind::kGeneralizationPass, domain.id, engine.gateway->ledger().totals());
      if (engine.after_change) engine.after_change("generalization");
    }
  }
  report.events = log.events();
  report.total_iterations = log.iterations();
  report.total_usage = engine.gateway->ledger().totals() - start;
  if (mode == Mode::kHCLGP && !domains.empty()) {
    report.component_usage = engine.repo->stats(static_cast<int>(domains.size()));
  }
  return report;
}

SeedReport seed_repository(Engine& engine, const std::vector<Domain>& training) {
  SeedReport out;
  out.suite = run_suite(engine, training, Mode::kHCLGP);
  for (int pass = 0; pass < 2; ++pass) {
    out.consolidation.push_back(generalize::run_generalization(
        *engine.repo, *engine.agents, *engine.validator, engine.lookup(), engine.config));
    if (engine.after_change) engine.after_change("seed consolidation");
  }
  out.validated_components = engine.repo->live_count();
  return out;
}

std::vector<AuditEntry> audit_archive(const Engine& engine) {
  std::vector<AuditEntry> out;
  for (const auto& entry : engine.repo->archive_entries()) {
    AuditEntry a;
    a.domain_id = entry.domain_id;
    const Domain* domain = engine.find_domain(entry.domain_id);
    if (!domain) {
      a.detail = "unknown domain";
    } else {
      auto outcomes = lang::validate_policy(entry.policy, entry.bindings, *domain,
                                            *engine.validator,
                                            engine.repo->resolver(entry.domain_id));
      a.passed = lang::all_passed(outcomes);
      a.detail = failure_summary(outcomes);
    }
    out.push_back(a);
  }
  return out;
}

namespace {

Json usage_json(const llm::Usage& u) {
  return Json{{"input_tokens", u.input_tokens}, {"output_tokens", u.output_tokens}};
}

llm::Usage usage_from(const Json& j) {
  return {j.at("input_tokens").get<std::int64_t>(), j.at("output_tokens").get<std::int64_t>()};
}

}  // namespace

void to_json(Json& j, const DomainResult& r) {
  Json tasks = Json::object();
  for (const auto& [t, ok] : r.task_passed) tasks[t] = ok;
  j = Json{{"domain", r.domain_id},
           {"status", r.solved ? "solved" : "failed"},
           {"tasks", tasks},
           {"iterations", r.iterations},
           {"usage", usage_json(r.usage)},
           {"final_policy_id", r.final_policy_id},
           {"components_learned", r.components_learned},
           {"final_policy", r.final_policy}};
}

void from_json(const Json& j, DomainResult& r) {
  r.domain_id = j.at("domain").get<std::string>();
  r.solved = j.at("status").get<std::string>() == "solved";
  r.task_passed.clear();
  for (auto it = j.at("tasks").begin(); it != j.at("tasks").end(); ++it) {
    r.task_passed[it.key()] = it.value().get<bool>();
  }
  r.iterations = j.at("iterations").get<int>();
  r.usage = usage_from(j.at("usage"));
  r.final_policy_id = j.at("final_policy_id").get<std::string>();
  r.components_learned = j.at("components_learned").get<std::vector<std::string>>();
  r.final_policy = j.value("final_policy", "");
}

void to_json(Json& j, const RunEvent& e) {
  j = Json{{"ordinal", e.ordinal},
           {"kind", std::string(event_kind_name(e.kind))},
           {"domain", e.domain_id},
           {"iteration", e.iteration},
           {"input_tokens", e.cumulative.input_tokens},
           {"output_tokens", e.cumulative.output_tokens}};
}

void from_json(const Json& j, RunEvent& e) {
  e.ordinal = j.at("ordinal").get<long>();
  e.kind = parse_event_kind(j.at("kind").get<std::string>());
  e.domain_id = j.at("domain").get<std::string>();
  e.iteration = j.at("iteration").get<long>();
  e.cumulative = {j.at("input_tokens").get<std::int64_t>(),
                  j.at("output_tokens").get<std::int64_t>()};
}

void to_json(Json& j, const SuiteReport& r) {
  Json usage_table = Json::object();
  for (const auto& [p, s] : r.component_usage) usage_table[std::string(repo::provenance_name(p))] = s;
  j = Json{{"mode", std::string(mode_name(r.mode))},
           {"config", r.config},
           {"domains", r.domain_ids},
           {"total_iterations", r.total_iterations},
           {"total_usage", usage_json(r.total_usage)},
           {"results", r.results},
           {"generalizations", r.generalizations},
           {"component_usage", usage_table},
           {"events", r.events}};
}

void from_json(const Json& j, SuiteReport& r) {
  r.mode = parse_mode(j.at("mode").get<std::string>());
  r.config = j.at("config").get<EngineConfig>();
  r.domain_ids = j.at("domains").get<std::vector<std::string>>();
  r.total_iterations = j.at("total_iterations").get<long>();
  r.total_usage = usage_from(j.at("total_usage"));
  r.results = j.at("results").get<std::vector<DomainResult>>();
  r.generalizations = j.at("generalizations").get<std::vector<generalize::GeneralizationReport>>();
  r.events = j.at("events").get<std::vector<RunEvent>>();
  r.component_usage.clear();
  for (auto it = j.at("component_usage").begin(); it != j.at("component_usage").end(); ++it) {
    r.component_usage[repo::parse_provenance(it.key())] = it.value().get<repo::UsageStats>();
  }
}

}  // namespace hclgp::orchestrator
