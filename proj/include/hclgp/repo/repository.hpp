#pragma once

#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "hclgp/lang/interpreter.hpp"
#include "hclgp/repo/component.hpp"
#include "hclgp/retrieval/embedding.hpp"
#include "hclgp/retrieval/index.hpp"

namespace hclgp::repo {

// kLearned: in the learned store, awaiting generalization.
// kLive: in the validated store, searchable.
// kTombstoned: replaced; kept for audit only.
enum class ComponentStatus { kLearned, kLive, kTombstoned };

std::string_view status_name(ComponentStatus s);
ComponentStatus parse_status(std::string_view name);

// The policy currently standing for a domain, with the bindings it was
// validated against.
struct ArchivedPolicy {
  std::string domain_id;
  Policy policy;
  std::vector<ParameterBinding> bindings;

  friend bool operator==(const ArchivedPolicy&, const ArchivedPolicy&) = default;
};

void to_json(Json& j, const ArchivedPolicy& p);
void from_json(const Json& j, ArchivedPolicy& p);

// Learned and validated component stores, the policy archive and the usage
// log. Single writer, many readers.
class Repository {
 public:
  explicit Repository(std::shared_ptr<retrieval::EmbeddingProvider> embedder);
  Repository(const Repository& other);
  Repository& operator=(const Repository& other);

  // Appends to the learned store; assigns id and created-at. Duplicate names
  // are allowed here.
  std::string add_learned(Component c);

  // Puts `incoming` live and tombstones `replacing`, then swaps in the
  // updated archive entries. An incoming component carrying the id of a
  // learned component is moved; one without id is new and gets
  // seed-modified provenance when it replaces any seed component. Throws on
  // a name collision with a live component that is not being replaced, or
  // on unknown ids; nothing changes in that case. Returns the live ids.
  std::vector<std::string> promote(std::vector<Component> incoming,
                                   const std::vector<std::string>& replacing,
                                   const std::vector<ArchivedPolicy>& updated = {});

  std::optional<Component> get(const std::string& id) const;
  std::optional<ComponentStatus> status(const std::string& id) const;
  // Each view is in created-at order.
  std::vector<Component> learned() const;
  std::vector<Component> validated() const;
  std::vector<Component> tombstoned() const;
  std::vector<Component> all() const;

  // Name lookup as seen by a policy of `domain_id`: that domain's own learned
  // components first, then live validated ones. The resolver is a snapshot.
  lang::ComponentResolver resolver(const std::string& domain_id) const;
  // Component id a name resolves to for the domain.
  std::optional<std::string> resolve_id(const std::string& domain_id,
                                        const std::string& name) const;

  // Nearest live validated components.
  std::vector<retrieval::SearchHit> search(const retrieval::UnitVector& query,
                                           std::size_t k) const;
  // "name / signature / usage" blocks in the given order; bodies never
  // appear and non-live ids are skipped.
  std::vector<std::string> summaries_for_prompt(const std::vector<std::string>& ids) const;

  void archive(ArchivedPolicy entry);
  std::optional<ArchivedPolicy> archived(const std::string& domain_id) const;
  std::vector<ArchivedPolicy> archive_entries() const;

  // Logs direct calls of the policy and the calls one level inside those
  // components, once per (component, domain, mode).
  void record_usage(const Policy& policy, const std::string& domain_id, long iteration);
  std::vector<UsageRecord> usage() const;
  // Available: live, learned, and tombstoned components that were used.
  std::map<Provenance, UsageStats> stats(int scenario_count) const;

  // Copy with only the live validated components, all marked seed-unchanged,
  // and an empty archive and usage log.
  Repository seed_snapshot() const;

  // Hash of the full persisted form, index included.
  std::string state_hash() const;

  // Writes components.jsonl and the index.jsonl sidecar under `dir`.
  void save(const std::string& dir) const;
  // Rebuilds the index when the sidecar is missing or stale.
  static Repository load(const std::string& dir,
                         std::shared_ptr<retrieval::EmbeddingProvider> embedder);

  std::size_t live_count() const;
  std::size_t learned_count() const;
  retrieval::VectorIndex index() const;
  retrieval::EmbeddingProvider& embedder() const { return *embedder_; }
  std::shared_ptr<retrieval::EmbeddingProvider> embedder_ptr() const { return embedder_; }

 private:
  struct Slot {
    Component component;
    ComponentStatus status;
    std::shared_ptr<const lang::FunctionDef> fn;
  };

  std::string next_id_locked();
  void index_locked(const Component& c);
  std::vector<Component> view_locked(std::optional<ComponentStatus> status) const;
  std::optional<std::string> resolve_locked(const std::string& domain_id,
                                            const std::string& name) const;
  std::string components_text_locked() const;
  std::string index_text_locked() const;

  std::shared_ptr<retrieval::EmbeddingProvider> embedder_;
  mutable std::shared_mutex mu_;
  std::map<std::string, Slot> slots_;
  std::map<std::string, ArchivedPolicy> archive_;
  std::vector<UsageRecord> usage_;
  retrieval::VectorIndex index_;
  long next_ordinal_ = 1;
};

}  // namespace hclgp::repo
