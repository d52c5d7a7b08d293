#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hclgp/core/error.hpp"

namespace hclgp::agents {

// Prompt templates, one text file per agent, with `{{name}}` slots.
class TemplateSet {
 public:
  static constexpr const char* kNames[] = {"abstraction", "generate", "debug", "decompose",
                                           "generalize"};

  // Reads <dir>/<name>.txt for every name; throws when one is missing.
  static TemplateSet load(const std::string& dir);
  static TemplateSet from_map(std::map<std::string, std::string> texts);

  const std::string& text(const std::string& name) const;

  // Fills every slot; throws on a slot without a value. Values without a
  // slot are ignored so templates may drop sections.
  std::string render(const std::string& name,
                     const std::map<std::string, std::string>& values) const;

 private:
  std::map<std::string, std::string> texts_;
};

std::string default_template_dir();

// Names of the `{{slot}}` placeholders in order of first appearance.
std::vector<std::string> template_slots(const std::string& text);

struct FencedBlock {
  std::string tag;
  std::string argument;  // rest of the opening fence line
  std::string content;
};

// The fenced blocks of a reply, in order.
class ReplyEnvelope {
 public:
  static ReplyEnvelope parse(const std::string& raw);

  const std::string& raw() const { return raw_; }
  const std::vector<FencedBlock>& blocks() const { return blocks_; }

  // First block with the tag; nullopt when absent.
  std::optional<FencedBlock> find(const std::string& tag) const;
  std::vector<FencedBlock> all(const std::string& tag) const;
  // Throws AgentError naming the tag when absent.
  const FencedBlock& require(const std::string& tag) const;

 private:
  std::string raw_;
  std::vector<FencedBlock> blocks_;
};

class AgentError : public Error {
 public:
  enum class Kind {
    kParse,
    kSignatureMismatch,
    kBindingMismatch,
    kUnknownComponent,
    kNotAMember,
    kPrecondition,
  };

  AgentError(Kind kind, const std::string& message) : Error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

}  // namespace hclgp::agents
