#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "hclgp/agents/templates.hpp"
#include "hclgp/core/model.hpp"
#include "hclgp/llm/gateway.hpp"
#include "hclgp/repo/repository.hpp"
#include "hclgp/retrieval/index.hpp"

namespace hclgp::agents {

struct AbstractionResult {
  std::vector<std::string> high_level_steps;
  PolicySignature signature;
  std::vector<ParameterBinding> bindings;

  // Throws AgentError unless every task of the domain has exactly one
  // binding and each binding fits the signature.
  void validate(const Domain& domain) const;
  std::string steps_text() const;
  friend bool operator==(const AbstractionResult&, const AbstractionResult&) = default;
};

// What the policy generator may see of the component library.
struct ComponentContext {
  std::vector<std::string> summaries;
  std::set<std::string> names;
};

ComponentContext component_context(const repo::Repository& repo,
                                   const std::vector<std::string>& ids);

struct Decomposition {
  std::vector<repo::Component> components;  // without ids
  Policy updated;
};

struct GeneralizationProposal {
  std::string cluster_id;
  std::vector<repo::Component> components;  // without ids
  std::map<std::string, Policy> updated_policies;
  std::vector<std::string> replaced_ids;

  bool keep_as_is() const { return components.empty() && replaced_ids.empty(); }
};

// "app::api(a: string, b: number?): description"
std::string format_api_doc(const ApiDoc& doc);
// "app::api(k: v, ...) -> response" or "... -> error: message"
std::string format_call(const ApiCallRecord& record);

class Agents {
 public:
  static constexpr std::size_t kTraceTail = 20;

  Agents(llm::Gateway& gateway, TemplateSet templates,
         std::shared_ptr<retrieval::EmbeddingProvider> embedder,
         std::vector<ApiDoc> api_catalog, int retrieval_k);

  // Prompt construction; no backend involved.
  std::string abstraction_prompt(const Domain& domain) const;
  std::string generation_prompt(const Domain& domain, const AbstractionResult& abstraction,
                                const ComponentContext& components,
                                const std::string& feedback) const;
  std::string debug_prompt(const Domain& domain, const AbstractionResult& abstraction,
                           const Policy& policy, const std::vector<ValidationOutcome>& outcomes,
                           int revision, const ComponentContext& components) const;
  std::string decomposition_prompt(const Domain& domain, const Policy& policy,
                                   const ComponentContext& existing, const std::string& feedback,
                                   int attempt) const;
  std::string generalization_prompt(const std::string& cluster_id,
                                    const std::vector<repo::Component>& members,
                                    const std::vector<repo::ArchivedPolicy>& policies,
                                    const std::string& feedback, int attempt) const;

  AbstractionResult abstract_domain(const Domain& domain);
  // Top-k live components for the abstraction's steps.
  std::vector<std::string> search_components(const AbstractionResult& abstraction,
                                             const repo::Repository& repo);
  Policy generate_policy(const Domain& domain, const AbstractionResult& abstraction,
                         const ComponentContext& components, const std::string& feedback = "");
  // Requires at least one failed outcome.
  Policy debug_policy(const Domain& domain, const AbstractionResult& abstraction,
                      const Policy& policy, const std::vector<ValidationOutcome>& outcomes,
                      int revision, const ComponentContext& components);
  Decomposition decompose_policy(const Domain& domain, const Policy& policy,
                                 const ComponentContext& existing,
                                 const std::string& feedback = "", int attempt = 1);
  GeneralizationProposal generalize_dedup(const std::string& cluster_id,
                                          const std::vector<repo::Component>& members,
                                          const std::vector<repo::ArchivedPolicy>& policies,
                                          const std::string& feedback = "", int attempt = 1);

  static AbstractionResult parse_abstraction(const std::string& reply, const Domain& domain);
  static Policy parse_policy_reply(const std::string& reply, const PolicySignature& expected,
                                   const std::set<std::string>& known_components);
  static Decomposition parse_decomposition(const std::string& reply, const Policy& original,
                                           const std::set<std::string>& known_components);
  static GeneralizationProposal parse_generalization(
      const std::string& reply, const std::string& cluster_id,
      const std::vector<repo::Component>& members,
      const std::vector<repo::ArchivedPolicy>& policies);

  // Top-k api docs for the abstraction's steps, best first.
  std::vector<ApiDoc> relevant_api_docs(const AbstractionResult& abstraction) const;

  // One entry per agent operation invoked, e.g. "generate_policy pay_many".
  std::vector<std::string> call_log() const;
  void clear_call_log();

 private:
  std::string complete(const std::string& agent, const std::string& domain,
                       const std::string& prompt);
  void log(const std::string& entry);

  llm::Gateway& gateway_;
  TemplateSet templates_;
  std::shared_ptr<retrieval::EmbeddingProvider> embedder_;
  std::vector<ApiDoc> api_catalog_;
  retrieval::VectorIndex api_index_;
  int k_;
  mutable std::mutex log_mu_;
  std::vector<std::string> call_log_;
};

}  // namespace hclgp::agents
