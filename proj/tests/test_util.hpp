#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>

#include <unistd.h>

#include "hclgp/lang/interpreter.hpp"
#include "hclgp/lang/parser.hpp"

namespace hclgp::testing {

inline std::string data_path(const std::string& relative) {
  return std::string(HCLGP_DATA_DIR) + "/" + relative;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("hclgp-" + tag + "-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  std::string str() const { return path_.string(); }
  std::filesystem::path path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Executor that answers every call with an echo of its arguments, failing
// on apis named "fail" or "missing".
class EchoExecutor : public lang::ApiExecutor {
 public:
  lang::ApiResult call(const std::string& app, const std::string& api,
                       const Record& args) override {
    if (api == "fail") return lang::ApiResult::fail("forced failure");
    if (api == "missing") return lang::ApiResult::fail("unknown api " + app + "::" + api);
    if (api == "items") {
      return lang::ApiResult::ok(Value(List{Value("a"), Value("b"), Value("c")}));
    }
    return lang::ApiResult::ok(make_record({{"app", Value(app)},
                                            {"api", Value(api)},
                                            {"args", Value(args)}}));
  }
};

// Resolver over a fixed set of component sources.
inline lang::ComponentResolver resolver_from(
    const std::map<std::string, std::string>& sources) {
  auto defs = std::make_shared<std::map<std::string, std::shared_ptr<const lang::FunctionDef>>>();
  for (const auto& [name, src] : sources) {
    (*defs)[name] = std::make_shared<lang::FunctionDef>(lang::parse(src).root);
  }
  return [defs](const std::string& name) -> std::shared_ptr<const lang::FunctionDef> {
    auto it = defs->find(name);
    return it == defs->end() ? nullptr : it->second;
  };
}

}  // namespace hclgp::testing
