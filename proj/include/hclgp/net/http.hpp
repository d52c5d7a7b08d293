#pragma once

#include <optional>
#include <string>

namespace hclgp::net {

struct HttpReply {
  int status = 0;
  std::string body;
  // Set when no HTTP response was received at all.
  std::optional<std::string> transport_error;
};

// POSTs a JSON body to base_url + path with an optional bearer token.
HttpReply post_json(const std::string& base_url, const std::string& path,
                    const std::string& bearer, const std::string& body,
                    int timeout_seconds);

}  // namespace hclgp::net
