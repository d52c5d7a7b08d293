#include "hclgp/generalize/generalize.hpp"

#include <algorithm>
#include <set>

#include "hclgp/lang/ast.hpp"
#include "hclgp/lang/parser.hpp"
#include "hclgp/retrieval/kernels.hpp"

namespace hclgp::generalize {

std::vector<Cluster> greedy_cluster(const std::vector<ClusterInput>& items, double tau) {
  std::vector<Cluster> clusters;
  if (items.empty()) return clusters;
  const std::size_t n = items.size();
  const std::size_t d = items[0].vector.dim();
  std::vector<double> rows;
  rows.reserve(n * d);
  for (const auto& item : items) {
    if (item.vector.dim() != d) throw Error("cluster input '" + item.id + "' has wrong dimension");
    rows.insert(rows.end(), item.vector.values().begin(), item.vector.values().end());
  }
  auto sim = retrieval::pairwise_similarity(rows.data(), n, d);

  std::vector<std::size_t> seeds;
  for (std::size_t i = 0; i < n; ++i) {
    bool placed = false;
    for (std::size_t c = 0; c < seeds.size(); ++c) {
      if (sim[seeds[c] * n + i] >= tau) {
        clusters[c].member_ids.push_back(items[i].id);
        placed = true;
        break;
      }
    }
    if (!placed) {
      seeds.push_back(i);
      clusters.push_back({items[i].id, {items[i].id}, items[i].vector});
    }
  }
  return clusters;
}

std::vector<ClusterInput> embed_components(const std::vector<repo::Component>& components,
                                           retrieval::EmbeddingProvider& embedder) {
  std::vector<repo::Component> sorted = components;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const repo::Component& a, const repo::Component& b) {
                     return a.created_at < b.created_at;
                   });
  std::vector<ClusterInput> out;
  for (const auto& c : sorted) out.push_back({c.id, embedder.embed(c.body)});
  return out;
}

namespace {

// Component ids reachable from a policy of `domain`, following bodies.
std::set<std::string> reachable(const repo::Repository& repo, const std::string& domain,
                                const Policy& policy) {
  std::set<std::string> seen;
  std::vector<std::string> todo = policy.referenced_components;
  std::set<std::string> visited_names;
  while (!todo.empty()) {
    auto name = todo.back();
    todo.pop_back();
    if (!visited_names.insert(name).second) continue;
    auto id = repo.resolve_id(domain, name);
    if (!id) continue;
    seen.insert(*id);
    auto c = repo.get(*id);
    for (const auto& inner : lang::component_calls(lang::parse(c->body).root)) todo.push_back(inner);
  }
  return seen;
}

std::string describe_failures(const std::string& domain,
                              const std::vector<ValidationOutcome>& outcomes) {
  std::string out;
  for (const auto& o : outcomes) {
    if (o.passed) continue;
    out += "domain " + domain + ", task " + o.task_id + ": ";
    out += o.error ? *o.error : "goal tests failed";
    if (!o.failed_tests.empty()) {
      out += " (failed:";
      for (const auto& t : o.failed_tests) out += " " + t;
      out += ")";
    }
    if (!o.trace.empty()) out += "; last call " + agents::format_call(o.trace.back());
    out += "\n";
  }
  return out;
}

}  // namespace

std::vector<std::string> affected_domains(const repo::Repository& repo,
                                          const std::vector<std::string>& ids) {
  std::set<std::string> wanted(ids.begin(), ids.end());
  std::vector<std::string> out;
  for (const auto& entry : repo.archive_entries()) {
    for (const auto& id : reachable(repo, entry.domain_id, entry.policy)) {
      if (wanted.count(id)) {
        out.push_back(entry.domain_id);
        break;
      }
    }
  }
  return out;
}

ClusterOutcome generalize_cluster(const Cluster& cluster, repo::Repository& repo,
                                  agents::Agents& agent, const lang::Validator& validator,
                                  const DomainLookup& domains, int budget) {
  ClusterOutcome outcome;
  outcome.cluster_id = cluster.id();
  outcome.members = cluster.member_ids;
  outcome.processed = true;

  std::vector<repo::Component> members;
  for (const auto& id : cluster.member_ids) {
    auto c = repo.get(id);
    if (!c) throw Error("cluster member '" + id + "' is not in the repository");
    members.push_back(*c);
  }
  outcome.affected_domains = affected_domains(repo, cluster.member_ids);
  std::vector<repo::ArchivedPolicy> policies;
  for (const auto& d : outcome.affected_domains) policies.push_back(*repo.archived(d));

  std::string feedback;
  for (int attempt = 1; attempt <= budget + 1; ++attempt) {
    outcome.attempts = attempt;
    agents::GeneralizationProposal proposal;
    try {
      proposal = agent.generalize_dedup(outcome.cluster_id, members, policies, feedback, attempt);
    } catch (const agents::AgentError& e) {
      feedback = std::string("reply rejected: ") + e.what();
      continue;
    }

    // Learned members that are not replaced move to the validated store.
    std::set<std::string> replaced(proposal.replaced_ids.begin(), proposal.replaced_ids.end());
    std::vector<repo::Component> incoming = proposal.components;
    for (const auto& m : members) {
      if (!replaced.count(m.id) && repo.status(m.id) == repo::ComponentStatus::kLearned) {
        incoming.push_back(m);
      }
    }
    std::vector<repo::ArchivedPolicy> updated;
    for (const auto& p : policies) {
      auto it = proposal.updated_policies.find(p.domain_id);
      if (it != proposal.updated_policies.end()) updated.push_back({p.domain_id, it->second, p.bindings});
    }

    repo::Repository candidate = repo;
    std::vector<std::string> live_ids;
    try {
      live_ids = candidate.promote(incoming, proposal.replaced_ids, updated);
    } catch (const Error& e) {
      feedback = std::string("proposal cannot be applied: ") + e.what();
      continue;
    }

    // Surviving components must not call a name this proposal removed.
    std::set<std::string> removed;
    for (const auto& m : members) {
      if (replaced.count(m.id)) removed.insert(m.name);
    }
    std::string problems;
    for (const auto& c : candidate.validated()) {
      for (const auto& name : lang::component_calls(lang::parse(c.body).root)) {
        if (removed.count(name) && !candidate.resolve_id("", name)) {
          problems += "component " + c.name + " calls '" + name + "', which no longer exists\n";
        }
      }
    }
    for (const auto& p : policies) {
      const Domain* domain = domains(p.domain_id);
      if (!domain) throw Error("unknown domain '" + p.domain_id + "' in the policy archive");
      auto entry = *candidate.archived(p.domain_id);
      auto results = lang::validate_policy(entry.policy, entry.bindings, *domain, validator,
                                           candidate.resolver(p.domain_id));
      problems += describe_failures(p.domain_id, results);
    }
    if (!problems.empty()) {
      feedback = "validation failed:\n" + problems;
      continue;
    }

    repo = std::move(candidate);
    outcome.accepted = true;
    outcome.replaced = proposal.replaced_ids;
    outcome.live_ids = live_ids;
    outcome.failure.clear();
    return outcome;
  }
  outcome.failure = feedback;
  return outcome;
}

GeneralizationReport run_generalization(repo::Repository& repo, agents::Agents& agent,
                                        const lang::Validator& validator,
                                        const DomainLookup& domains, const EngineConfig& config) {
  GeneralizationReport report;
  auto components = repo.learned();
  auto live = repo.validated();
  components.insert(components.end(), live.begin(), live.end());
  auto clusters = greedy_cluster(embed_components(components, repo.embedder()),
                                 config.cluster_threshold);
  report.clusters = static_cast<int>(clusters.size());

  for (const auto& cluster : clusters) {
    bool has_learned = std::any_of(cluster.member_ids.begin(), cluster.member_ids.end(),
                                   [&](const std::string& id) {
                                     return repo.status(id) == repo::ComponentStatus::kLearned;
                                   });
    if (!has_learned && cluster.member_ids.size() < 2) {
      ClusterOutcome skipped;
      skipped.cluster_id = cluster.id();
      skipped.members = cluster.member_ids;
      report.outcomes.push_back(skipped);
      ++report.skipped;
      continue;
    }
    auto outcome = generalize_cluster(cluster, repo, agent, validator, domains, config.debug_budget);
    ++report.processed;
    report.attempts += outcome.attempts;
    if (outcome.accepted) {
      ++report.accepted;
      report.merged += static_cast<int>(outcome.replaced.size());
    } else {
      ++report.rejected;
    }
    report.outcomes.push_back(std::move(outcome));
  }
  return report;
}

void to_json(Json& j, const ClusterOutcome& o) {
  j = Json{{"cluster", o.cluster_id},
           {"members", o.members},
           {"processed", o.processed},
           {"accepted", o.accepted},
           {"attempts", o.attempts},
           {"replaced", o.replaced},
           {"live_ids", o.live_ids},
           {"affected_domains", o.affected_domains},
           {"failure", o.failure}};
}

void to_json(Json& j, const GeneralizationReport& r) {
  j = Json{{"clusters", r.clusters},   {"processed", r.processed}, {"skipped", r.skipped},
           {"accepted", r.accepted},   {"rejected", r.rejected},   {"merged", r.merged},
           {"attempts", r.attempts},   {"outcomes", r.outcomes}};
}

void from_json(const Json& j, ClusterOutcome& o) {
  o.cluster_id = j.at("cluster").get<std::string>();
  o.members = j.at("members").get<std::vector<std::string>>();
  o.processed = j.at("processed").get<bool>();
  o.accepted = j.at("accepted").get<bool>();
  o.attempts = j.at("attempts").get<int>();
  o.replaced = j.at("replaced").get<std::vector<std::string>>();
  o.live_ids = j.at("live_ids").get<std::vector<std::string>>();
  o.affected_domains = j.at("affected_domains").get<std::vector<std::string>>();
  o.failure = j.at("failure").get<std::string>();
}

void from_json(const Json& j, GeneralizationReport& r) {
  r.clusters = j.at("clusters").get<int>();
  r.processed = j.at("processed").get<int>();
  r.skipped = j.at("skipped").get<int>();
  r.accepted = j.at("accepted").get<int>();
  r.rejected = j.at("rejected").get<int>();
  r.merged = j.at("merged").get<int>();
  r.attempts = j.at("attempts").get<int>();
  r.outcomes = j.at("outcomes").get<std::vector<ClusterOutcome>>();
}

}  // namespace hclgp::generalize
