#include "hclgp/retrieval/index.hpp"

#include <algorithm>
#include <mutex>

#include "hclgp/retrieval/kernels.hpp"

namespace hclgp::retrieval {

std::string_view entry_kind_name(EntryKind kind) {
  return kind == EntryKind::kComponent ? "component" : "api-doc";
}

EntryKind parse_entry_kind(std::string_view name) {
  if (name == "component") return EntryKind::kComponent;
  if (name == "api-doc") return EntryKind::kApiDoc;
  throw Error("unknown index entry kind '" + std::string(name) + "'");
}

VectorIndex::VectorIndex(const VectorIndex& other) {
  std::shared_lock lock(other.mu_);
  entries_ = other.entries_;
  matrix_ = other.matrix_;
  dim_ = other.dim_;
}

VectorIndex& VectorIndex::operator=(const VectorIndex& other) {
  if (this == &other) return *this;
  VectorIndex copy(other);
  std::unique_lock lock(mu_);
  entries_ = std::move(copy.entries_);
  matrix_ = std::move(copy.matrix_);
  dim_ = copy.dim_;
  return *this;
}

void VectorIndex::add(IndexEntry entry) {
  std::unique_lock lock(mu_);
  if (entry.vector.dim() == 0) throw Error("index entry '" + entry.id + "' has no vector");
  if (!entries_.empty() && entry.vector.dim() != dim_) {
    throw Error("dimension mismatch for '" + entry.id + "': " +
                std::to_string(entry.vector.dim()) + " vs " + std::to_string(dim_));
  }
  for (const auto& e : entries_) {
    if (e.id == entry.id) throw Error("duplicate index id '" + entry.id + "'");
  }
  dim_ = entry.vector.dim();
  matrix_.insert(matrix_.end(), entry.vector.values().begin(), entry.vector.values().end());
  entries_.push_back(std::move(entry));
}

bool VectorIndex::remove(const std::string& id) {
  std::unique_lock lock(mu_);
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].id != id) continue;
    entries_.erase(entries_.begin() + static_cast<long>(i));
    matrix_.erase(matrix_.begin() + static_cast<long>(i * dim_),
                  matrix_.begin() + static_cast<long>((i + 1) * dim_));
    return true;
  }
  return false;
}

bool VectorIndex::contains(const std::string& id) const {
  std::shared_lock lock(mu_);
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const IndexEntry& e) { return e.id == id; });
}

std::size_t VectorIndex::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

std::size_t VectorIndex::dim() const {
  std::shared_lock lock(mu_);
  return dim_;
}

std::vector<IndexEntry> VectorIndex::entries() const {
  std::shared_lock lock(mu_);
  return entries_;
}

std::optional<IndexEntry> VectorIndex::find(const std::string& id) const {
  std::shared_lock lock(mu_);
  for (const auto& e : entries_) {
    if (e.id == id) return e;
  }
  return std::nullopt;
}

void rank_hits(std::vector<SearchHit>& hits, std::size_t k) {
  auto better = [](const SearchHit& a, const SearchHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  };
  k = std::min(k, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<long>(k), hits.end(), better);
  hits.resize(k);
}

std::vector<SearchHit> VectorIndex::search_impl(const UnitVector& query, std::size_t k,
                                                std::optional<EntryKind> kind,
                                                bool parallel) const {
  if (k < 1) throw Error("search needs k >= 1");
  std::shared_lock lock(mu_);
  if (entries_.empty()) return {};
  if (query.dim() != dim_) {
    throw Error("dimension mismatch: query " + std::to_string(query.dim()) +
                " vs index " + std::to_string(dim_));
  }
  std::vector<double> scores(entries_.size());
  if (parallel) {
    cosine_scan(matrix_.data(), entries_.size(), dim_, query.data(), scores.data());
  } else {
    cosine_scan_serial(matrix_.data(), entries_.size(), dim_, query.data(), scores.data());
  }
  std::vector<SearchHit> hits;
  hits.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (kind && entries_[i].kind != *kind) continue;
    hits.push_back({entries_[i].id, scores[i]});
  }
  rank_hits(hits, k);
  return hits;
}

std::vector<SearchHit> VectorIndex::search(const UnitVector& query, std::size_t k,
                                           std::optional<EntryKind> kind) const {
  return search_impl(query, k, kind, true);
}

std::vector<SearchHit> VectorIndex::search_serial(const UnitVector& query, std::size_t k,
                                                  std::optional<EntryKind> kind) const {
  return search_impl(query, k, kind, false);
}

std::string api_doc_text(const ApiDoc& doc) {
  return doc.qualified_name() + ": " + doc.description;
}

std::string component_text(const ComponentCard& card) {
  return card.signature.to_string() + ": " + card.description;
}

namespace {

void add_text(VectorIndex& index, EmbeddingProvider& provider, const std::string& id,
              EntryKind kind, const std::string& text) {
  if (index.contains(id)) throw Error("duplicate index id '" + id + "'");
  index.add({id, kind, provider.embed(text), text, hash_hex(text)});
}

}  // namespace

void index_api_docs(VectorIndex& index, EmbeddingProvider& provider,
                    const std::vector<ApiDoc>& docs) {
  for (const auto& doc : docs) {
    add_text(index, provider, doc.qualified_name(), EntryKind::kApiDoc, api_doc_text(doc));
  }
}

void index_components(VectorIndex& index, EmbeddingProvider& provider,
                      const std::vector<ComponentCard>& cards) {
  for (const auto& card : cards) {
    add_text(index, provider, card.id, EntryKind::kComponent, component_text(card));
  }
}

void to_json(Json& j, const IndexEntry& e) {
  j = Json{{"id", e.id},
           {"kind", std::string(entry_kind_name(e.kind))},
           {"text_hash", e.text_hash},
           {"text", e.text},
           {"vector", e.vector.values()}};
}

void from_json(const Json& j, IndexEntry& e) {
  e.id = j.at("id").get<std::string>();
  e.kind = parse_entry_kind(j.at("kind").get<std::string>());
  e.text_hash = j.at("text_hash").get<std::string>();
  e.text = j.value("text", "");
  e.vector = UnitVector::from_normalized(j.at("vector").get<std::vector<double>>());
}

}  // namespace hclgp::retrieval
