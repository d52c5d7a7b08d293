#include "hclgp/repo/repository.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include "hclgp/lang/instantiate.hpp"
#include "hclgp/lang/parser.hpp"

namespace hclgp::repo {

namespace fs = std::filesystem;

std::string_view status_name(ComponentStatus s) {
  switch (s) {
    case ComponentStatus::kLearned: return "learned";
    case ComponentStatus::kLive: return "live";
    case ComponentStatus::kTombstoned: return "tombstoned";
  }
  return "learned";
}

ComponentStatus parse_status(std::string_view name) {
  if (name == "learned") return ComponentStatus::kLearned;
  if (name == "live") return ComponentStatus::kLive;
  if (name == "tombstoned") return ComponentStatus::kTombstoned;
  throw Error("unknown component status '" + std::string(name) + "'");
}

void to_json(Json& j, const ArchivedPolicy& p) {
  j = Json{{"domain", p.domain_id}, {"policy", p.policy}, {"bindings", p.bindings}};
}

void from_json(const Json& j, ArchivedPolicy& p) {
  p.domain_id = j.at("domain").get<std::string>();
  p.policy = j.at("policy").get<Policy>();
  p.bindings = j.at("bindings").get<std::vector<ParameterBinding>>();
}

namespace {

std::shared_ptr<const lang::FunctionDef> parse_body(const Component& c) {
  c.validate();
  return std::make_shared<const lang::FunctionDef>(lang::parse(c.body).root);
}

retrieval::ComponentCard card_of(const Component& c) {
  return {c.id, c.signature, c.description};
}

}  // namespace

Repository::Repository(std::shared_ptr<retrieval::EmbeddingProvider> embedder)
    : embedder_(std::move(embedder)) {
  if (!embedder_) throw Error("repository needs an embedding provider");
}

Repository::Repository(const Repository& other) {
  std::shared_lock lock(other.mu_);
  embedder_ = other.embedder_;
  slots_ = other.slots_;
  archive_ = other.archive_;
  usage_ = other.usage_;
  index_ = other.index_;
  next_ordinal_ = other.next_ordinal_;
}

Repository& Repository::operator=(const Repository& other) {
  if (this == &other) return *this;
  Repository copy(other);
  std::unique_lock lock(mu_);
  embedder_ = copy.embedder_;
  slots_ = std::move(copy.slots_);
  archive_ = std::move(copy.archive_);
  usage_ = std::move(copy.usage_);
  index_ = copy.index_;
  next_ordinal_ = copy.next_ordinal_;
  return *this;
}

std::string Repository::next_id_locked() {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "c%04ld", next_ordinal_);
  return buf;
}

void Repository::index_locked(const Component& c) {
  retrieval::index_components(index_, *embedder_, {card_of(c)});
}

std::string Repository::add_learned(Component c) {
  auto fn = parse_body(c);
  std::unique_lock lock(mu_);
  c.id = next_id_locked();
  c.created_at = next_ordinal_++;
  c.provenance = Provenance::kLearned;
  std::string id = c.id;
  slots_[id] = {std::move(c), ComponentStatus::kLearned, std::move(fn)};
  return id;
}

std::vector<std::string> Repository::promote(std::vector<Component> incoming,
                                             const std::vector<std::string>& replacing,
                                             const std::vector<ArchivedPolicy>& updated) {
  std::unique_lock lock(mu_);

  // Check everything before touching any state.
  std::set<std::string> replaced(replacing.begin(), replacing.end());
  bool replaces_seed = false;
  std::vector<std::string> inherited_domains;
  for (const auto& id : replaced) {
    auto it = slots_.find(id);
    if (it == slots_.end() || it->second.status == ComponentStatus::kTombstoned) {
      throw Error("cannot replace '" + id + "': not a learned or live component");
    }
    replaces_seed = replaces_seed || is_seed(it->second.component.provenance);
    for (const auto& d : it->second.component.origin_domains) {
      if (std::find(inherited_domains.begin(), inherited_domains.end(), d) ==
          inherited_domains.end()) {
        inherited_domains.push_back(d);
      }
    }
  }

  std::vector<std::shared_ptr<const lang::FunctionDef>> fns;
  std::set<std::string> moved;
  for (const auto& c : incoming) {
    fns.push_back(parse_body(c));
    if (c.id.empty()) continue;
    auto it = slots_.find(c.id);
    if (it == slots_.end() || it->second.status != ComponentStatus::kLearned) {
      throw Error("cannot promote '" + c.id + "': not in the learned store");
    }
    if (replaced.count(c.id)) throw Error("'" + c.id + "' is both promoted and replaced");
    moved.insert(c.id);
  }

  std::map<std::string, std::string> live_names;
  for (const auto& [id, slot] : slots_) {
    if (slot.status == ComponentStatus::kLive && !replaced.count(id)) {
      live_names[slot.component.name] = id;
    }
  }
  for (const auto& c : incoming) {
    auto [it, fresh] = live_names.emplace(c.name, c.id.empty() ? "(new)" : c.id);
    if (!fresh) {
      throw Error("name collision: '" + c.name + "' is already live as " + it->second);
    }
  }
  for (const auto& p : updated) lang::check_policy(p.policy);

  // Commit.
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < incoming.size(); ++i) {
    Component c = std::move(incoming[i]);
    if (c.id.empty()) {
      c.id = next_id_locked();
      c.created_at = next_ordinal_++;
      c.provenance = replaces_seed ? Provenance::kSeedModified : Provenance::kLearned;
      if (c.origin_domains.empty()) c.origin_domains = inherited_domains;
    } else {
      const auto& old = slots_.at(c.id).component;
      c.created_at = old.created_at;
      c.provenance = old.provenance;
      if (c.origin_domains.empty()) c.origin_domains = old.origin_domains;
    }
    ids.push_back(c.id);
    index_locked(c);
    std::string id = c.id;
    slots_[id] = {std::move(c), ComponentStatus::kLive, fns[i]};
  }
  for (const auto& id : replaced) {
    index_.remove(id);
    slots_.at(id).status = ComponentStatus::kTombstoned;
  }
  for (const auto& p : updated) archive_[p.domain_id] = p;
  return ids;
}

std::optional<Component> Repository::get(const std::string& id) const {
  std::shared_lock lock(mu_);
  auto it = slots_.find(id);
  if (it == slots_.end()) return std::nullopt;
  return it->second.component;
}

std::optional<ComponentStatus> Repository::status(const std::string& id) const {
  std::shared_lock lock(mu_);
  auto it = slots_.find(id);
  if (it == slots_.end()) return std::nullopt;
  return it->second.status;
}

std::vector<Component> Repository::view_locked(std::optional<ComponentStatus> status) const {
  std::vector<Component> out;
  for (const auto& [id, slot] : slots_) {
    if (!status || slot.status == *status) out.push_back(slot.component);
  }
  std::sort(out.begin(), out.end(), [](const Component& a, const Component& b) {
    return a.created_at < b.created_at;
  });
  return out;
}

std::vector<Component> Repository::learned() const {
  std::shared_lock lock(mu_);
  return view_locked(ComponentStatus::kLearned);
}

std::vector<Component> Repository::validated() const {
  std::shared_lock lock(mu_);
  return view_locked(ComponentStatus::kLive);
}

std::vector<Component> Repository::tombstoned() const {
  std::shared_lock lock(mu_);
  return view_locked(ComponentStatus::kTombstoned);
}

std::vector<Component> Repository::all() const {
  std::shared_lock lock(mu_);
  return view_locked(std::nullopt);
}

std::size_t Repository::live_count() const { return validated().size(); }
std::size_t Repository::learned_count() const { return learned().size(); }

retrieval::VectorIndex Repository::index() const {
  std::shared_lock lock(mu_);
  return index_;
}

std::optional<std::string> Repository::resolve_locked(const std::string& domain_id,
                                                      const std::string& name) const {
  const Slot* best = nullptr;
  for (const auto& [id, slot] : slots_) {
    if (slot.status != ComponentStatus::kLearned || slot.component.name != name) continue;
    const auto& origins = slot.component.origin_domains;
    if (std::find(origins.begin(), origins.end(), domain_id) == origins.end()) continue;
    if (!best || slot.component.created_at > best->component.created_at) best = &slot;
  }
  if (best) return best->component.id;
  for (const auto& [id, slot] : slots_) {
    if (slot.status == ComponentStatus::kLive && slot.component.name == name) return id;
  }
  return std::nullopt;
}

std::optional<std::string> Repository::resolve_id(const std::string& domain_id,
                                                  const std::string& name) const {
  std::shared_lock lock(mu_);
  return resolve_locked(domain_id, name);
}

lang::ComponentResolver Repository::resolver(const std::string& domain_id) const {
  std::shared_lock lock(mu_);
  std::map<std::string, std::shared_ptr<const lang::FunctionDef>> table;
  for (const auto& [id, slot] : slots_) {
    if (slot.status == ComponentStatus::kTombstoned) continue;
    const auto& name = slot.component.name;
    if (table.count(name)) continue;
    auto resolved = resolve_locked(domain_id, name);
    if (resolved) table[name] = slots_.at(*resolved).fn;
  }
  return [table = std::move(table)](const std::string& name)
             -> std::shared_ptr<const lang::FunctionDef> {
    auto it = table.find(name);
    return it == table.end() ? nullptr : it->second;
  };
}

std::vector<retrieval::SearchHit> Repository::search(const retrieval::UnitVector& query,
                                                     std::size_t k) const {
  std::shared_lock lock(mu_);
  return index_.search(query, k, retrieval::EntryKind::kComponent);
}

std::vector<std::string> Repository::summaries_for_prompt(
    const std::vector<std::string>& ids) const {
  std::shared_lock lock(mu_);
  std::vector<std::string> out;
  for (const auto& id : ids) {
    auto it = slots_.find(id);
    if (it == slots_.end() || it->second.status != ComponentStatus::kLive) continue;
    const auto& c = it->second.component;
    std::string block = "name: " + c.name + "\nsignature: " + c.signature.to_string();
    if (!c.usage_info.empty()) block += "\nusage: " + c.usage_info;
    out.push_back(std::move(block));
  }
  return out;
}

void Repository::archive(ArchivedPolicy entry) {
  lang::check_policy(entry.policy);
  std::unique_lock lock(mu_);
  std::string domain = entry.domain_id;
  archive_[domain] = std::move(entry);
}

std::optional<ArchivedPolicy> Repository::archived(const std::string& domain_id) const {
  std::shared_lock lock(mu_);
  auto it = archive_.find(domain_id);
  if (it == archive_.end()) return std::nullopt;
  return it->second;
}

std::vector<ArchivedPolicy> Repository::archive_entries() const {
  std::shared_lock lock(mu_);
  std::vector<ArchivedPolicy> out;
  for (const auto& [d, p] : archive_) out.push_back(p);
  return out;
}

void Repository::record_usage(const Policy& policy, const std::string& domain_id,
                              long iteration) {
  std::unique_lock lock(mu_);
  auto add = [&](const std::string& id, UsageMode mode) {
    for (const auto& r : usage_) {
      if (r.component_id == id && r.domain_id == domain_id && r.mode == mode) return;
    }
    usage_.push_back({id, domain_id, mode, iteration});
  };
  for (const auto& name : policy.referenced_components) {
    auto id = resolve_locked(domain_id, name);
    if (!id) continue;
    add(*id, UsageMode::kDirect);
    for (const auto& inner : lang::component_calls(*slots_.at(*id).fn)) {
      if (auto inner_id = resolve_locked(domain_id, inner)) add(*inner_id, UsageMode::kIndirect);
    }
  }
}

std::vector<UsageRecord> Repository::usage() const {
  std::shared_lock lock(mu_);
  return usage_;
}

std::map<Provenance, UsageStats> Repository::stats(int scenario_count) const {
  std::shared_lock lock(mu_);
  std::set<std::string> used;
  for (const auto& r : usage_) used.insert(r.component_id);
  std::vector<Component> available;
  for (const auto& [id, slot] : slots_) {
    if (slot.status != ComponentStatus::kTombstoned || used.count(id)) {
      available.push_back(slot.component);
    }
  }
  return usage_stats(available, usage_, scenario_count);
}

Repository Repository::seed_snapshot() const {
  std::shared_lock lock(mu_);
  Repository out(embedder_);
  for (const auto& [id, slot] : slots_) {
    if (slot.status != ComponentStatus::kLive) continue;
    Slot copy = slot;
    copy.component.provenance = Provenance::kSeedUnchanged;
    out.slots_[id] = std::move(copy);
  }
  out.index_ = index_;
  out.next_ordinal_ = next_ordinal_;
  return out;
}

std::string Repository::components_text_locked() const {
  std::ostringstream os;
  os << Json{{"record", "meta"}, {"next_ordinal", next_ordinal_}, {"embedder", embedder_->name()}}
            .dump()
     << '\n';
  for (const auto& c : view_locked(std::nullopt)) {
    Json line = {{"record", "component"},
                 {"status", std::string(status_name(slots_.at(c.id).status))},
                 {"component", c}};
    os << line.dump() << '\n';
  }
  for (const auto& [d, p] : archive_) {
    os << Json{{"record", "policy"}, {"entry", p}}.dump() << '\n';
  }
  for (const auto& r : usage_) {
    os << Json{{"record", "usage"}, {"entry", r}}.dump() << '\n';
  }
  return os.str();
}

std::string Repository::index_text_locked() const {
  std::ostringstream os;
  for (const auto& e : index_.entries()) os << Json(e).dump() << '\n';
  return os.str();
}

std::string Repository::state_hash() const {
  std::shared_lock lock(mu_);
  return retrieval::hash_hex(components_text_locked() + "\n" + index_text_locked());
}

void Repository::save(const std::string& dir) const {
  std::shared_lock lock(mu_);
  std::error_code ec;
  fs::create_directories(dir, ec);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream out(fs::path(dir) / name, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + (fs::path(dir) / name).string());
    out << text;
  };
  write("components.jsonl", components_text_locked());
  write("index.jsonl", index_text_locked());
}

Repository Repository::load(const std::string& dir,
                            std::shared_ptr<retrieval::EmbeddingProvider> embedder) {
  Repository repo(std::move(embedder));
  std::ifstream in(fs::path(dir) / "components.jsonl");
  if (!in) throw Error("no repository at " + dir);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      Json j = Json::parse(line);
      auto kind = j.at("record").get<std::string>();
      if (kind == "meta") {
        repo.next_ordinal_ = j.at("next_ordinal").get<long>();
      } else if (kind == "component") {
        auto c = j.at("component").get<Component>();
        auto fn = parse_body(c);
        std::string id = c.id;
        repo.slots_[id] = {std::move(c), parse_status(j.at("status").get<std::string>()),
                           std::move(fn)};
      } else if (kind == "policy") {
        auto p = j.at("entry").get<ArchivedPolicy>();
        repo.archive_[p.domain_id] = p;
      } else if (kind == "usage") {
        repo.usage_.push_back(j.at("entry").get<UsageRecord>());
      } else {
        throw Error("unknown record '" + kind + "'");
      }
    } catch (const Json::exception& e) {
      throw Error(dir + "/components.jsonl:" + std::to_string(line_no) + ": " + e.what());
    }
  }

  // Sidecar: accept it only if it covers exactly the live components with
  // matching text hashes.
  std::vector<retrieval::IndexEntry> entries;
  std::ifstream side(fs::path(dir) / "index.jsonl");
  while (side && std::getline(side, line)) {
    if (!line.empty()) entries.push_back(Json::parse(line).get<retrieval::IndexEntry>());
  }
  auto live = repo.view_locked(ComponentStatus::kLive);
  bool fresh = entries.size() == live.size();
  for (const auto& e : entries) {
    auto it = repo.slots_.find(e.id);
    fresh = fresh && it != repo.slots_.end() && it->second.status == ComponentStatus::kLive &&
            e.text_hash == retrieval::hash_hex(retrieval::component_text(card_of(it->second.component)));
  }
  if (fresh) {
    for (auto& e : entries) repo.index_.add(std::move(e));
  } else {
    for (const auto& c : live) repo.index_locked(c);
  }
  return repo;
}

}  // namespace hclgp::repo
