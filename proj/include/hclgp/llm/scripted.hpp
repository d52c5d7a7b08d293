#pragma once

#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "hclgp/llm/gateway.hpp"

namespace hclgp::llm {

struct ScriptedRule {
  // Every string must occur in the prompt text.
  std::vector<std::string> match;
  // `{{key}}` is replaced by the request metadata value for `key`.
  std::string reply;
  std::optional<std::int64_t> input_tokens;
  std::optional<std::int64_t> output_tokens;
  // The first N hits raise a rate-limit error billed at the rule's usage.
  int fail_first = 0;
};

// Deterministic test double: the first rule (in declaration order) whose
// match strings all occur in the prompt supplies the reply. Without explicit
// counts, usage is ceil(chars / 4) for prompt and reply.
class ScriptedBackend : public Backend {
 public:
  explicit ScriptedBackend(std::vector<ScriptedRule> rules);

  // Rules file: {"rules": [{"match": "X" | ["X", "Y"], "reply": "...",
  //   "input_tokens": n, "output_tokens": n, "fail_first": n}, ...]}
  static std::vector<ScriptedRule> load_rules(const std::string& path);
  static std::vector<ScriptedRule> parse_rules(const Json& j);

  CompletionResponse complete(const CompletionRequest& request) override;
  std::string name() const override { return "scripted"; }

  const std::vector<ScriptedRule>& rules() const { return rules_; }

 private:
  std::vector<ScriptedRule> rules_;
  std::mutex mu_;
  std::vector<int> failures_left_;
};

std::int64_t estimate_tokens(const std::string& text);

// Replaces `{{key}}` with values from `vars`; unknown keys are left intact.
std::string render_reply(const std::string& reply,
                         const std::map<std::string, std::string>& vars);

}  // namespace hclgp::llm
