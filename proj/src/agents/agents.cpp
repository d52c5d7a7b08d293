#include "hclgp/agents/agents.hpp"

#include <algorithm>
#include <sstream>

#include "hclgp/lang/instantiate.hpp"
#include "hclgp/lang/parser.hpp"

namespace hclgp::agents {

namespace {

using Kind = AgentError::Kind;

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> nonempty_lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

std::string join(const std::vector<std::string>& items, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

std::string or_none(const std::string& s) { return s.empty() ? "(none)" : s; }

std::string bindings_text(const std::vector<ParameterBinding>& bindings) {
  std::vector<std::string> lines;
  for (const auto& b : bindings) lines.push_back(Json(b).dump());
  return join(lines, "\n");
}

std::string numbered(const std::vector<std::string>& steps) {
  std::vector<std::string> lines;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    lines.push_back(std::to_string(i + 1) + ". " + steps[i]);
  }
  return join(lines, "\n");
}

Policy policy_from_block(const std::string& source, const std::string& what) {
  try {
    return lang::make_policy(source);
  } catch (const lang::ParseError& e) {
    throw AgentError(Kind::kParse, what + " does not parse: " + e.what());
  } catch (const InvariantError& e) {
    throw AgentError(Kind::kParse, what + " is invalid: " + e.what());
  }
}

// Source slices of each function in a block of definitions.
std::vector<std::string> function_sources(const std::string& block, const std::string& what) {
  std::vector<lang::FunctionDef> fns;
  if (block.find_first_not_of(" \t\r\n") == std::string::npos) return {};
  try {
    fns = lang::parse_functions(block);
  } catch (const lang::ParseError& e) {
    throw AgentError(Kind::kParse, what + " do not parse: " + e.what());
  }
  std::vector<std::string> out;
  for (const auto& fn : fns) out.push_back(block.substr(fn.span.offset, fn.span.length));
  return out;
}

std::map<std::string, std::string> usage_notes(const ReplyEnvelope& env) {
  std::map<std::string, std::string> notes;
  auto block = env.find("usage-notes");
  if (!block) return notes;
  for (const auto& line : nonempty_lines(block->content)) {
    auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    notes[trim(line.substr(0, colon))] = trim(line.substr(colon + 1));
  }
  return notes;
}

std::vector<repo::Component> components_from(const ReplyEnvelope& env, const std::string& block) {
  auto notes = usage_notes(env);
  std::vector<repo::Component> out;
  std::set<std::string> names;
  for (const auto& src : function_sources(block, "components")) {
    auto c = repo::make_component(src);
    if (!names.insert(c.name).second) {
      throw AgentError(Kind::kParse, "component '" + c.name + "' defined twice");
    }
    auto it = notes.find(c.name);
    if (it != notes.end()) {
      c.description = it->second;
      c.usage_info = it->second;
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace

void AbstractionResult::validate(const Domain& domain) const {
  try {
    signature.validate();
  } catch (const Error& e) {
    throw AgentError(Kind::kParse, std::string("signature: ") + e.what());
  }
  std::map<std::string, int> seen;
  for (const auto& b : bindings) {
    if (!domain.find_task(b.task_id)) {
      throw AgentError(Kind::kBindingMismatch, "bindings: unknown task '" + b.task_id + "'");
    }
    if (++seen[b.task_id] > 1) {
      throw AgentError(Kind::kBindingMismatch, "bindings: task '" + b.task_id + "' bound twice");
    }
    auto report = check_binding(signature, b);
    if (!report.ok()) {
      throw AgentError(Kind::kBindingMismatch,
                       "bindings: task '" + b.task_id + "': " + report.describe());
    }
  }
  for (const auto& t : domain.tasks) {
    if (!seen.count(t.id)) {
      throw AgentError(Kind::kBindingMismatch, "bindings: task '" + t.id + "' has no binding");
    }
  }
}

std::string AbstractionResult::steps_text() const { return join(high_level_steps, "\n"); }

ComponentContext component_context(const repo::Repository& repo,
                                   const std::vector<std::string>& ids) {
  ComponentContext ctx;
  ctx.summaries = repo.summaries_for_prompt(ids);
  for (const auto& id : ids) {
    if (repo.status(id) == repo::ComponentStatus::kLive) ctx.names.insert(repo.get(id)->name);
  }
  return ctx;
}

std::string format_api_doc(const ApiDoc& doc) {
  std::vector<std::string> params;
  for (const auto& p : doc.params) {
    params.push_back(p.name + ": " + p.type + (p.required ? "" : "?"));
  }
  return doc.qualified_name() + "(" + join(params, ", ") + "): " + doc.description;
}

std::string format_call(const ApiCallRecord& record) {
  std::vector<std::string> args;
  for (const auto& [k, v] : record.args) args.push_back(k + ": " + to_literal(v));
  std::string out = record.app + "::" + record.api + "(" + join(args, ", ") + ") -> ";
  if (record.error) return out + "error: " + *record.error;
  return out + to_literal(record.response);
}

Agents::Agents(llm::Gateway& gateway, TemplateSet templates,
               std::shared_ptr<retrieval::EmbeddingProvider> embedder,
               std::vector<ApiDoc> api_catalog, int retrieval_k)
    : gateway_(gateway),
      templates_(std::move(templates)),
      embedder_(std::move(embedder)),
      api_catalog_(std::move(api_catalog)),
      k_(retrieval_k) {
  if (k_ < 1) throw Error("retrieval k must be >= 1");
  retrieval::index_api_docs(api_index_, *embedder_, api_catalog_);
}

std::vector<ApiDoc> Agents::relevant_api_docs(const AbstractionResult& abstraction) const {
  std::vector<ApiDoc> out;
  if (abstraction.high_level_steps.empty() || api_index_.size() == 0) return out;
  auto hits = api_index_.search(embedder_->embed(abstraction.steps_text()),
                                static_cast<std::size_t>(k_), retrieval::EntryKind::kApiDoc);
  for (const auto& h : hits) {
    for (const auto& doc : api_catalog_) {
      if (doc.qualified_name() == h.id) out.push_back(doc);
    }
  }
  return out;
}

std::string Agents::abstraction_prompt(const Domain& domain) const {
  std::vector<std::string> tasks;
  for (const auto& t : domain.tasks) tasks.push_back("- " + t.id + ": " + t.instruction);
  std::set<std::string> apps;
  for (const auto& d : api_catalog_) apps.insert(d.app);
  return templates_.render("abstraction",
                           {{"domain_id", domain.id},
                            {"domain_description", or_none(domain.description)},
                            {"tasks", join(tasks, "\n")},
                            {"apps", join({apps.begin(), apps.end()}, ", ")}});
}

namespace {

std::map<std::string, std::string> policy_context(const Domain& domain,
                                                  const AbstractionResult& abstraction,
                                                  const ComponentContext& components,
                                                  const std::vector<ApiDoc>& docs) {
  std::vector<std::string> doc_lines;
  for (const auto& d : docs) doc_lines.push_back("- " + format_api_doc(d));
  return {{"domain_id", domain.id},
          {"domain_description", or_none(domain.description)},
          {"steps", numbered(abstraction.high_level_steps)},
          {"signature", abstraction.signature.to_string()},
          {"bindings", bindings_text(abstraction.bindings)},
          {"components", or_none(join(components.summaries, "\n\n"))},
          {"api_docs", or_none(join(doc_lines, "\n"))}};
}

}  // namespace

std::string Agents::generation_prompt(const Domain& domain, const AbstractionResult& abstraction,
                                      const ComponentContext& components,
                                      const std::string& feedback) const {
  auto values = policy_context(domain, abstraction, components, relevant_api_docs(abstraction));
  values["feedback"] = or_none(feedback);
  return templates_.render("generate", values);
}

std::string Agents::debug_prompt(const Domain& domain, const AbstractionResult& abstraction,
                                 const Policy& policy,
                                 const std::vector<ValidationOutcome>& outcomes, int revision,
                                 const ComponentContext& components) const {
  auto values = policy_context(domain, abstraction, components, relevant_api_docs(abstraction));
  std::vector<std::string> failures;
  for (const auto& o : outcomes) {
    if (o.passed) continue;
    std::string text = "task " + o.task_id + "\n  error: " + (o.error ? *o.error : "(none)") +
                       "\n  failed tests: " + or_none(join(o.failed_tests, ", "));
    std::size_t start = o.trace.size() > kTraceTail ? o.trace.size() - kTraceTail : 0;
    text += "\n  trace";
    if (start > 0) text += " (last " + std::to_string(kTraceTail) + " of " +
                           std::to_string(o.trace.size()) + " calls)";
    text += ":";
    if (o.trace.empty()) text += " (no calls)";
    for (std::size_t i = start; i < o.trace.size(); ++i) {
      text += "\n    " + format_call(o.trace[i]);
    }
    failures.push_back(text);
  }
  values["revision"] = std::to_string(revision);
  values["policy"] = policy.source;
  values["failures"] = join(failures, "\n");
  return templates_.render("debug", values);
}

std::string Agents::decomposition_prompt(const Domain& domain, const Policy& policy,
                                         const ComponentContext& existing,
                                         const std::string& feedback, int attempt) const {
  return templates_.render("decompose",
                           {{"domain_id", domain.id},
                            {"attempt", std::to_string(attempt)},
                            {"policy", policy.source},
                            {"components", or_none(join(existing.summaries, "\n\n"))},
                            {"feedback", or_none(feedback)}});
}

std::string Agents::generalization_prompt(const std::string& cluster_id,
                                          const std::vector<repo::Component>& members,
                                          const std::vector<repo::ArchivedPolicy>& policies,
                                          const std::string& feedback, int attempt) const {
  std::vector<std::string> member_text;
  for (const auto& c : members) {
    member_text.push_back("id: " + c.id + "\nname: " + c.name +
                          "\nsignature: " + c.signature.to_string() +
                          "\nprovenance: " + std::string(repo::provenance_name(c.provenance)) +
                          "\nbody:\n" + c.body);
  }
  std::vector<std::string> policy_text;
  for (const auto& p : policies) {
    policy_text.push_back("domain: " + p.domain_id + "\n" + p.policy.source);
  }
  return templates_.render("generalize", {{"cluster_id", cluster_id},
                                          {"attempt", std::to_string(attempt)},
                                          {"members", join(member_text, "\n\n")},
                                          {"policies", or_none(join(policy_text, "\n\n"))},
                                          {"feedback", or_none(feedback)}});
}

std::string Agents::complete(const std::string& agent, const std::string& domain,
                             const std::string& prompt) {
  llm::CompletionRequest req;
  req.messages = {{"user", prompt}};
  req.metadata = {{"agent", agent}, {"domain", domain}};
  return gateway_.complete(req).text;
}

void Agents::log(const std::string& entry) {
  std::lock_guard lock(log_mu_);
  call_log_.push_back(entry);
}

std::vector<std::string> Agents::call_log() const {
  std::lock_guard lock(log_mu_);
  return call_log_;
}

void Agents::clear_call_log() {
  std::lock_guard lock(log_mu_);
  call_log_.clear();
}

AbstractionResult Agents::parse_abstraction(const std::string& reply, const Domain& domain) {
  auto env = ReplyEnvelope::parse(reply);
  AbstractionResult r;
  for (const auto& line : nonempty_lines(env.require("steps").content)) {
    auto s = line;
    auto dot = s.find(". ");
    if (dot != std::string::npos && dot > 0 &&
        std::all_of(s.begin(), s.begin() + static_cast<long>(dot), ::isdigit)) {
      s = s.substr(dot + 2);
    } else if (s.rfind("- ", 0) == 0) {
      s = s.substr(2);
    }
    r.high_level_steps.push_back(s);
  }
  if (r.high_level_steps.empty()) throw AgentError(Kind::kParse, "steps block is empty");
  try {
    r.signature = PolicySignature::parse(trim(env.require("signature").content));
  } catch (const AgentError&) {
    throw;
  } catch (const Error& e) {
    throw AgentError(Kind::kParse, std::string("signature block: ") + e.what());
  }
  const auto& bindings = env.require("bindings");
  try {
    r.bindings = Json::parse(bindings.content).get<std::vector<ParameterBinding>>();
  } catch (const Json::exception& e) {
    throw AgentError(Kind::kParse, std::string("bindings block: ") + e.what());
  }
  r.validate(domain);
  return r;
}

AbstractionResult Agents::abstract_domain(const Domain& domain) {
  if (domain.tasks.empty()) throw AgentError(Kind::kPrecondition, "domain has no tasks");
  log("abstract_domain " + domain.id);
  return parse_abstraction(complete("abstraction", domain.id, abstraction_prompt(domain)), domain);
}

std::vector<std::string> Agents::search_components(const AbstractionResult& abstraction,
                                                   const repo::Repository& repo) {
  log("search_components");
  std::vector<std::string> ids;
  if (abstraction.high_level_steps.empty() || repo.live_count() == 0) return ids;
  for (const auto& h :
       repo.search(embedder_->embed(abstraction.steps_text()), static_cast<std::size_t>(k_))) {
    ids.push_back(h.id);
  }
  return ids;
}

Policy Agents::parse_policy_reply(const std::string& reply, const PolicySignature& expected,
                                  const std::set<std::string>& known_components) {
  auto env = ReplyEnvelope::parse(reply);
  Policy p = policy_from_block(env.require("policy").content, "policy");
  if (!(p.signature == expected)) {
    throw AgentError(Kind::kSignatureMismatch, "policy signature " + p.signature.to_string() +
                                                   " differs from " + expected.to_string());
  }
  for (const auto& name : p.referenced_components) {
    if (!known_components.count(name)) {
      throw AgentError(Kind::kUnknownComponent, "policy calls unknown component '" + name + "'");
    }
  }
  return p;
}

Policy Agents::generate_policy(const Domain& domain, const AbstractionResult& abstraction,
                               const ComponentContext& components, const std::string& feedback) {
  log("generate_policy " + domain.id);
  auto prompt = generation_prompt(domain, abstraction, components, feedback);
  return parse_policy_reply(complete("policy-generator", domain.id, prompt),
                            abstraction.signature, components.names);
}

Policy Agents::debug_policy(const Domain& domain, const AbstractionResult& abstraction,
                            const Policy& policy, const std::vector<ValidationOutcome>& outcomes,
                            int revision, const ComponentContext& components) {
  if (std::all_of(outcomes.begin(), outcomes.end(),
                  [](const ValidationOutcome& o) { return o.passed; })) {
    throw AgentError(Kind::kPrecondition, "debug_policy needs at least one failed task");
  }
  log("debug_policy " + domain.id);
  auto prompt = debug_prompt(domain, abstraction, policy, outcomes, revision, components);
  return parse_policy_reply(complete("policy-generator", domain.id, prompt),
                            abstraction.signature, components.names);
}

Decomposition Agents::parse_decomposition(const std::string& reply, const Policy& original,
                                          const std::set<std::string>& known_components) {
  auto env = ReplyEnvelope::parse(reply);
  Decomposition d;
  d.components = components_from(env, env.require("components").content);
  d.updated = policy_from_block(env.require("policy").content, "updated policy");
  if (!(d.updated.signature == original.signature)) {
    throw AgentError(Kind::kSignatureMismatch,
                     "updated policy signature " + d.updated.signature.to_string() +
                         " drifted from " + original.signature.to_string());
  }
  std::set<std::string> callable = known_components;
  for (const auto& c : d.components) callable.insert(c.name);
  for (const auto& name : d.updated.referenced_components) {
    if (!callable.count(name)) {
      throw AgentError(Kind::kUnknownComponent,
                       "updated policy calls unknown component '" + name + "'");
    }
  }
  return d;
}

Decomposition Agents::decompose_policy(const Domain& domain, const Policy& policy,
                                       const ComponentContext& existing,
                                       const std::string& feedback, int attempt) {
  log("decompose_policy " + domain.id);
  auto prompt = decomposition_prompt(domain, policy, existing, feedback, attempt);
  return parse_decomposition(complete("decomposition", domain.id, prompt), policy,
                             existing.names);
}

GeneralizationProposal Agents::parse_generalization(
    const std::string& reply, const std::string& cluster_id,
    const std::vector<repo::Component>& members,
    const std::vector<repo::ArchivedPolicy>& policies) {
  auto env = ReplyEnvelope::parse(reply);
  GeneralizationProposal p;
  p.cluster_id = cluster_id;
  p.components = components_from(env, env.require("components").content);

  std::map<std::string, const repo::Component*> by_id;
  for (const auto& m : members) by_id[m.id] = &m;
  std::set<std::string> replaced_names;
  for (const auto& id : nonempty_lines(env.require("replaces").content)) {
    auto it = by_id.find(id);
    if (it == by_id.end()) {
      throw AgentError(Kind::kNotAMember, "replaced id '" + id + "' is not in the cluster");
    }
    if (std::find(p.replaced_ids.begin(), p.replaced_ids.end(), id) == p.replaced_ids.end()) {
      p.replaced_ids.push_back(id);
      replaced_names.insert(it->second->name);
    }
  }
  for (const auto& c : p.components) replaced_names.erase(c.name);

  for (const auto& block : env.all("policy")) {
    const std::string& domain = block.argument;
    auto it = std::find_if(policies.begin(), policies.end(),
                           [&](const repo::ArchivedPolicy& a) { return a.domain_id == domain; });
    if (it == policies.end()) {
      throw AgentError(Kind::kParse, "policy block for unaffected domain '" + domain + "'");
    }
    Policy updated = policy_from_block(block.content, "policy for " + domain);
    if (!(updated.signature == it->policy.signature)) {
      throw AgentError(Kind::kSignatureMismatch, "policy for " + domain + " changed signature to " +
                                                     updated.signature.to_string());
    }
    for (const auto& name : updated.referenced_components) {
      if (replaced_names.count(name)) {
        throw AgentError(Kind::kUnknownComponent,
                         "policy for " + domain + " still calls replaced component '" + name + "'");
      }
    }
    p.updated_policies[domain] = std::move(updated);
  }
  return p;
}

GeneralizationProposal Agents::generalize_dedup(const std::string& cluster_id,
                                                const std::vector<repo::Component>& members,
                                                const std::vector<repo::ArchivedPolicy>& policies,
                                                const std::string& feedback, int attempt) {
  if (members.empty()) throw AgentError(Kind::kPrecondition, "empty cluster");
  log("generalize_dedup " + cluster_id);
  auto prompt = generalization_prompt(cluster_id, members, policies, feedback, attempt);
  return parse_generalization(complete("generalize-dedup", "", prompt), cluster_id, members,
                              policies);
}

}  // namespace hclgp::agents
