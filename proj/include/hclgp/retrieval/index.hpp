#pragma once

#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "hclgp/core/model.hpp"
#include "hclgp/retrieval/embedding.hpp"

namespace hclgp::retrieval {

enum class EntryKind { kComponent, kApiDoc };
std::string_view entry_kind_name(EntryKind kind);
EntryKind parse_entry_kind(std::string_view name);

struct IndexEntry {
  std::string id;
  EntryKind kind = EntryKind::kComponent;
  UnitVector vector;
  // The embedded text and its FNV-1a hash.
  std::string text;
  std::string text_hash;

  friend bool operator==(const IndexEntry&, const IndexEntry&) = default;
};

struct SearchHit {
  std::string id;
  double score = 0;

  friend bool operator==(const SearchHit&, const SearchHit&) = default;
};

// Exact cosine index. Searches may run concurrently; add/remove take an
// exclusive lock.
class VectorIndex {
 public:
  VectorIndex() = default;
  VectorIndex(const VectorIndex& other);
  VectorIndex& operator=(const VectorIndex& other);

  // Throws Error on duplicate id or dimension mismatch.
  void add(IndexEntry entry);
  bool remove(const std::string& id);
  bool contains(const std::string& id) const;
  std::size_t size() const;
  std::size_t dim() const;
  std::vector<IndexEntry> entries() const;
  std::optional<IndexEntry> find(const std::string& id) const;

  // min(k, |candidates|) hits by descending score, ties by ascending id.
  // Throws Error if k < 1 or the query dimension differs.
  std::vector<SearchHit> search(const UnitVector& query, std::size_t k,
                                std::optional<EntryKind> kind = std::nullopt) const;
  // Same result through the serial reference kernel.
  std::vector<SearchHit> search_serial(const UnitVector& query, std::size_t k,
                                       std::optional<EntryKind> kind = std::nullopt) const;

 private:
  std::vector<SearchHit> search_impl(const UnitVector& query, std::size_t k,
                                     std::optional<EntryKind> kind, bool parallel) const;

  mutable std::shared_mutex mu_;
  std::vector<IndexEntry> entries_;
  std::vector<double> matrix_;  // row-major copy of the vectors
  std::size_t dim_ = 0;
};

// Orders hits by descending score then ascending id, keeping the first k.
void rank_hits(std::vector<SearchHit>& hits, std::size_t k);

std::string api_doc_text(const ApiDoc& doc);

struct ComponentCard {
  std::string id;
  PolicySignature signature;
  std::string description;
};
std::string component_text(const ComponentCard& card);

// One entry per item; throws Error on a duplicate id.
void index_api_docs(VectorIndex& index, EmbeddingProvider& provider,
                    const std::vector<ApiDoc>& docs);
void index_components(VectorIndex& index, EmbeddingProvider& provider,
                      const std::vector<ComponentCard>& cards);

void to_json(Json& j, const IndexEntry& e);
void from_json(const Json& j, IndexEntry& e);

}  // namespace hclgp::retrieval
