#include "hclgp/llm/scripted.hpp"

#include <fstream>

namespace hclgp::llm {

std::int64_t estimate_tokens(const std::string& text) {
  return static_cast<std::int64_t>((text.size() + 3) / 4);
}

std::string render_reply(const std::string& reply,
                         const std::map<std::string, std::string>& vars) {
  std::string out;
  size_t pos = 0;
  while (pos < reply.size()) {
    size_t open = reply.find("{{", pos);
    if (open == std::string::npos) break;
    size_t close = reply.find("}}", open + 2);
    if (close == std::string::npos) break;
    out.append(reply, pos, open - pos);
    std::string key = reply.substr(open + 2, close - open - 2);
    auto it = vars.find(key);
    if (it != vars.end()) {
      out += it->second;
    } else {
      out.append(reply, open, close + 2 - open);
    }
    pos = close + 2;
  }
  out.append(reply, pos, std::string::npos);
  return out;
}

ScriptedBackend::ScriptedBackend(std::vector<ScriptedRule> rules)
    : rules_(std::move(rules)) {
  for (const auto& r : rules_) failures_left_.push_back(r.fail_first);
}

std::vector<ScriptedRule> ScriptedBackend::parse_rules(const Json& j) {
  std::vector<ScriptedRule> rules;
  for (const auto& item : j.at("rules")) {
    ScriptedRule r;
    const auto& m = item.at("match");
    if (m.is_string()) {
      r.match.push_back(m.get<std::string>());
    } else {
      r.match = m.get<std::vector<std::string>>();
    }
    if (r.match.empty()) throw Error("scripted rule with an empty match list");
    const auto& reply = item.at("reply");
    if (reply.is_array()) {
      // Multi-line replies may be written as arrays of lines.
      for (const auto& line : reply) r.reply += line.get<std::string>() + "\n";
    } else {
      r.reply = reply.get<std::string>();
    }
    if (item.contains("input_tokens")) r.input_tokens = item["input_tokens"].get<std::int64_t>();
    if (item.contains("output_tokens")) r.output_tokens = item["output_tokens"].get<std::int64_t>();
    r.fail_first = item.value("fail_first", 0);
    rules.push_back(std::move(r));
  }
  return rules;
}

std::vector<ScriptedRule> ScriptedBackend::load_rules(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open rules file '" + path + "'");
  try {
    return parse_rules(Json::parse(in));
  } catch (const Json::exception& e) {
    throw Error("malformed rules file '" + path + "': " + e.what());
  }
}

CompletionResponse ScriptedBackend::complete(const CompletionRequest& request) {
  const std::string prompt = request.prompt_text();
  for (size_t i = 0; i < rules_.size(); ++i) {
    const auto& rule = rules_[i];
    bool hit = true;
    for (const auto& m : rule.match) {
      if (prompt.find(m) == std::string::npos) {
        hit = false;
        break;
      }
    }
    if (!hit) continue;
    CompletionResponse response;
    response.text = render_reply(rule.reply, request.metadata);
    response.usage.input_tokens = rule.input_tokens.value_or(estimate_tokens(prompt));
    response.usage.output_tokens =
        rule.output_tokens.value_or(estimate_tokens(response.text));
    {
      std::lock_guard<std::mutex> lock(mu_);
      if (failures_left_[i] > 0) {
        --failures_left_[i];
        throw RateLimitError("scripted rate limit", response.usage);
      }
    }
    return response;
  }
  throw TransportError("no scripted reply");
}

}  // namespace hclgp::llm
