#pragma once

#include <memory>
#include <string>

#include "hclgp/llm/gateway.hpp"

namespace hclgp::llm {

// OpenAI-compatible chat-completions endpoint.
class HttpBackend : public Backend {
 public:
  HttpBackend(std::string base_url, std::string model, std::string api_key,
              int timeout_seconds = 120);

  CompletionResponse complete(const CompletionRequest& request) override;
  std::string name() const override { return "http:" + model_; }

  // Exposed for tests: request body and reply parsing without a network.
  Json request_body(const CompletionRequest& request) const;
  static CompletionResponse parse_reply(const std::string& body);

 private:
  std::string base_url_;
  std::string model_;
  std::string api_key_;
  int timeout_seconds_;
};

// Backend selection. File keys mirror the fields; the environment variables
// HCLGP_BACKEND, HCLGP_RULES, HCLGP_BASE_URL, HCLGP_MODEL and HCLGP_API_KEY
// override the file.
struct BackendConfig {
  std::string kind = "mock";  // mock | http
  std::string rules_path;
  std::string base_url = "https://api.openai.com";
  std::string model = "gpt-4o-mini";
  std::string api_key;
  int timeout_seconds = 120;
  RetryPolicy retry;

  static BackendConfig from_json(const Json& j);
  static BackendConfig load(const std::string& path);
  void apply_environment();
};

std::shared_ptr<Backend> make_backend(const BackendConfig& config);

std::string default_rules_path();

}  // namespace hclgp::llm
