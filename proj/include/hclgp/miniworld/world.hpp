#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hclgp/core/model.hpp"

namespace hclgp::miniworld {

// Database-style world state: one record store per app plus the session
// table. Records carry their own "id" and "kind" fields.
struct WorldState {
  std::map<std::string, std::map<std::string, Value>> stores;
  std::map<std::string, std::string> sessions;  // app -> logged-in account
  std::map<std::string, int> counters;          // app -> last issued id number

  const std::map<std::string, Value>* store(const std::string& app) const;
  friend bool operator==(const WorldState&, const WorldState&) = default;
};

Json to_json(const WorldState& state);

struct ApplyResult {
  WorldState state;
  Value response;
  std::optional<std::string> error;

  bool ok() const { return !error.has_value(); }
};

// Pure transition function. On error the returned state equals the input.
ApplyResult apply_api(const WorldState& state, const std::string& app,
                      const std::string& api, const Record& args);

// Every api of every app, grouped by app in a fixed order.
const std::vector<ApiDoc>& api_docs();
const ApiDoc* find_api_doc(const std::string& app, const std::string& api);
MetaDomainDescriptor descriptor();

// Apps whose apis are callable without a session.
bool is_public_app(const std::string& app);

}  // namespace hclgp::miniworld
