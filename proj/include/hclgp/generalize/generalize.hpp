#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hclgp/agents/agents.hpp"
#include "hclgp/lang/validator.hpp"
#include "hclgp/repo/repository.hpp"
#include "hclgp/retrieval/embedding.hpp"

namespace hclgp::generalize {

struct ClusterInput {
  std::string id;
  retrieval::UnitVector vector;
};

struct Cluster {
  std::string seed_id;
  std::vector<std::string> member_ids;  // seed first, then scan order
  retrieval::UnitVector seed_vector;

  std::string id() const { return "cluster-" + seed_id; }
  friend bool operator==(const Cluster&, const Cluster&) = default;
};

// Scans items in order; each joins the first cluster whose seed has cosine
// >= tau with it, else founds a new cluster.
std::vector<Cluster> greedy_cluster(const std::vector<ClusterInput>& items, double tau);

// Clustering input for components: the embedded body, in created-at order.
std::vector<ClusterInput> embed_components(const std::vector<repo::Component>& components,
                                           retrieval::EmbeddingProvider& embedder);

using DomainLookup = std::function<const Domain*(const std::string&)>;

struct ClusterOutcome {
  std::string cluster_id;
  std::vector<std::string> members;
  bool processed = false;  // false: skipped, nothing to consolidate
  bool accepted = false;
  int attempts = 0;
  std::vector<std::string> replaced;
  std::vector<std::string> live_ids;  // promoted or created
  std::vector<std::string> affected_domains;
  std::string failure;
};

struct GeneralizationReport {
  int clusters = 0;
  int processed = 0;
  int skipped = 0;
  int accepted = 0;
  int rejected = 0;
  int merged = 0;  // components replaced
  int attempts = 0;
  std::vector<ClusterOutcome> outcomes;
};

void to_json(Json& j, const ClusterOutcome& o);
void to_json(Json& j, const GeneralizationReport& r);
void from_json(const Json& j, ClusterOutcome& o);
void from_json(const Json& j, GeneralizationReport& r);

// Domains whose archived policy reaches any of `ids`, directly or through
// component bodies.
std::vector<std::string> affected_domains(const repo::Repository& repo,
                                          const std::vector<std::string>& ids);

// Runs the agent on the cluster, re-validating every affected policy with
// its original bindings on all tasks of its domain. The proposal is applied
// to a copy and swapped in only when everything passes; after `budget`
// failed retries the repository is left untouched.
ClusterOutcome generalize_cluster(const Cluster& cluster, repo::Repository& repo,
                                  agents::Agents& agent, const lang::Validator& validator,
                                  const DomainLookup& domains, int budget);

// Clusters the union of learned and live components and processes each
// cluster that holds a learned component or more than one member.
GeneralizationReport run_generalization(repo::Repository& repo, agents::Agents& agent,
                                        const lang::Validator& validator,
                                        const DomainLookup& domains, const EngineConfig& config);

}  // namespace hclgp::generalize
