#include "hclgp/llm/backends.hpp"

#include <cstdlib>
#include <fstream>

#include "hclgp/llm/scripted.hpp"
#include "hclgp/net/http.hpp"

namespace hclgp::llm {

HttpBackend::HttpBackend(std::string base_url, std::string model,
                         std::string api_key, int timeout_seconds)
    : base_url_(std::move(base_url)),
      model_(std::move(model)),
      api_key_(std::move(api_key)),
      timeout_seconds_(timeout_seconds) {
  while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

Json HttpBackend::request_body(const CompletionRequest& request) const {
  Json messages = Json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", m.role}, {"content", m.content}});
  }
  return Json{{"model", request.model.empty() ? model_ : request.model},
              {"messages", messages},
              {"max_tokens", request.max_output_tokens},
              {"temperature", 0}};
}

CompletionResponse HttpBackend::parse_reply(const std::string& body) {
  try {
    Json j = Json::parse(body);
    CompletionResponse r;
    r.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
    const auto& usage = j.at("usage");
    r.usage.input_tokens = usage.at("prompt_tokens").get<std::int64_t>();
    r.usage.output_tokens = usage.at("completion_tokens").get<std::int64_t>();
    if (r.usage.input_tokens < 0 || r.usage.output_tokens < 0) {
      throw MalformedReplyError("negative token usage in reply");
    }
    return r;
  } catch (const Json::exception& e) {
    throw MalformedReplyError(std::string("malformed completion reply: ") + e.what());
  }
}

CompletionResponse HttpBackend::complete(const CompletionRequest& request) {
  net::HttpReply res = net::post_json(base_url_, "/v1/chat/completions", api_key_,
                                      request_body(request).dump(), timeout_seconds_);
  if (res.transport_error) {
    throw TransportError("request to " + base_url_ + " failed: " + *res.transport_error);
  }
  if (res.status == 429) throw RateLimitError("rate limited (HTTP 429)");
  if (res.status >= 500) {
    throw TransportError("server error HTTP " + std::to_string(res.status));
  }
  if (res.status != 200) {
    throw TransportError("HTTP " + std::to_string(res.status) + ": " + res.body);
  }
  return parse_reply(res.body);
}

BackendConfig BackendConfig::from_json(const Json& j) {
  BackendConfig c;
  c.kind = j.value("backend", c.kind);
  c.rules_path = j.value("rules", c.rules_path);
  c.base_url = j.value("base_url", c.base_url);
  c.model = j.value("model", c.model);
  c.timeout_seconds = j.value("timeout_seconds", c.timeout_seconds);
  c.retry.max_attempts = j.value("max_attempts", c.retry.max_attempts);
  c.retry.initial_backoff =
      std::chrono::milliseconds(j.value("initial_backoff_ms", c.retry.initial_backoff.count()));
  c.retry.max_backoff =
      std::chrono::milliseconds(j.value("max_backoff_ms", c.retry.max_backoff.count()));
  return c;
}

BackendConfig BackendConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open backend config '" + path + "'");
  return from_json(Json::parse(in));
}

void BackendConfig::apply_environment() {
  auto env = [](const char* name, std::string& target) {
    if (const char* v = std::getenv(name); v && *v) target = v;
  };
  env("HCLGP_BACKEND", kind);
  env("HCLGP_RULES", rules_path);
  env("HCLGP_BASE_URL", base_url);
  env("HCLGP_MODEL", model);
  env("HCLGP_API_KEY", api_key);
}

std::shared_ptr<Backend> make_backend(const BackendConfig& config) {
  if (config.kind == "mock") {
    std::string path = config.rules_path.empty() ? default_rules_path() : config.rules_path;
    return std::make_shared<ScriptedBackend>(ScriptedBackend::load_rules(path));
  }
  if (config.kind == "http") {
    return std::make_shared<HttpBackend>(config.base_url, config.model,
                                         config.api_key, config.timeout_seconds);
  }
  throw Error("unknown backend '" + config.kind + "'");
}

std::string default_rules_path() {
  return std::string(HCLGP_DATA_DIR) + "/data/mock/rules.json";
}

}  // namespace hclgp::llm
