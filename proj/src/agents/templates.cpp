#include "hclgp/agents/templates.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace hclgp::agents {

TemplateSet TemplateSet::load(const std::string& dir) {
  std::map<std::string, std::string> texts;
  for (const char* name : kNames) {
    std::string path = dir + "/" + name + ".txt";
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("missing prompt template " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    texts[name] = ss.str();
  }
  return from_map(std::move(texts));
}

TemplateSet TemplateSet::from_map(std::map<std::string, std::string> texts) {
  TemplateSet set;
  set.texts_ = std::move(texts);
  return set;
}

const std::string& TemplateSet::text(const std::string& name) const {
  auto it = texts_.find(name);
  if (it == texts_.end()) throw Error("no template named '" + name + "'");
  return it->second;
}

std::vector<std::string> template_slots(const std::string& text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while ((pos = text.find("{{", pos)) != std::string::npos) {
    auto end = text.find("}}", pos + 2);
    if (end == std::string::npos) break;
    std::string name = text.substr(pos + 2, end - pos - 2);
    if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
    pos = end + 2;
  }
  return out;
}

std::string TemplateSet::render(const std::string& name,
                                const std::map<std::string, std::string>& values) const {
  const std::string& tmpl = text(name);
  std::string out;
  std::size_t pos = 0;
  while (true) {
    auto open = tmpl.find("{{", pos);
    if (open == std::string::npos) break;
    auto close = tmpl.find("}}", open + 2);
    if (close == std::string::npos) break;
    std::string slot = tmpl.substr(open + 2, close - open - 2);
    auto it = values.find(slot);
    if (it == values.end()) {
      throw Error("template '" + name + "' has no value for {{" + slot + "}}");
    }
    out.append(tmpl, pos, open - pos);
    out += it->second;
    pos = close + 2;
  }
  out.append(tmpl, pos, std::string::npos);
  return out;
}

std::string default_template_dir() { return std::string(HCLGP_DATA_DIR) + "/data/templates"; }

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

ReplyEnvelope ReplyEnvelope::parse(const std::string& raw) {
  ReplyEnvelope env;
  env.raw_ = raw;
  std::istringstream in(raw);
  std::string line;
  std::optional<FencedBlock> open;
  std::vector<std::string> lines;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (!open) {
      if (t.rfind("```", 0) != 0 || t.size() == 3) continue;
      std::string header = trim(t.substr(3));
      auto space = header.find(' ');
      FencedBlock b;
      b.tag = header.substr(0, space);
      if (space != std::string::npos) b.argument = trim(header.substr(space + 1));
      open = b;
      lines.clear();
    } else if (t == "```") {
      std::string content;
      for (std::size_t i = 0; i < lines.size(); ++i) {
        if (i) content += '\n';
        content += lines[i];
      }
      open->content = content;
      env.blocks_.push_back(*open);
      open.reset();
    } else {
      lines.push_back(line);
    }
  }
  if (open) {
    throw AgentError(AgentError::Kind::kParse, "unterminated ```" + open->tag + " block");
  }
  return env;
}

std::optional<FencedBlock> ReplyEnvelope::find(const std::string& tag) const {
  for (const auto& b : blocks_) {
    if (b.tag == tag) return b;
  }
  return std::nullopt;
}

std::vector<FencedBlock> ReplyEnvelope::all(const std::string& tag) const {
  std::vector<FencedBlock> out;
  for (const auto& b : blocks_) {
    if (b.tag == tag) out.push_back(b);
  }
  return out;
}

const FencedBlock& ReplyEnvelope::require(const std::string& tag) const {
  for (const auto& b : blocks_) {
    if (b.tag == tag) return b;
  }
  throw AgentError(AgentError::Kind::kParse, "reply is missing the ```" + tag + " block");
}

}  // namespace hclgp::agents
