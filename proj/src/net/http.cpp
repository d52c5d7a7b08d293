#include "hclgp/net/http.hpp"

#include "httplib.h"

namespace hclgp::net {

HttpReply post_json(const std::string& base_url, const std::string& path,
                    const std::string& bearer, const std::string& body,
                    int timeout_seconds) {
  httplib::Client client(base_url);
  client.set_read_timeout(timeout_seconds, 0);
  client.set_connection_timeout(timeout_seconds, 0);
  httplib::Headers headers;
  if (!bearer.empty()) headers.emplace("Authorization", "Bearer " + bearer);
  auto res = client.Post(path, headers, body, "application/json");
  HttpReply reply;
  if (!res) {
    reply.transport_error = httplib::to_string(res.error());
    return reply;
  }
  reply.status = res->status;
  reply.body = res->body;
  return reply;
}

}  // namespace hclgp::net
