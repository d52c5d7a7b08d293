#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hclgp/core/model.hpp"
#include "hclgp/lang/ast.hpp"

namespace hclgp::lang {

struct ApiResult {
  Value response;
  std::optional<std::string> error;

  static ApiResult ok(Value v) { return {std::move(v), std::nullopt}; }
  static ApiResult fail(std::string message) {
    return {Value(), std::move(message)};
  }
};

// The only channel through which a plan touches the world.
class ApiExecutor {
 public:
  virtual ~ApiExecutor() = default;
  virtual ApiResult call(const std::string& app, const std::string& api,
                         const Record& args) = 0;
};

// Maps a component name to its parsed definition; nullptr when unknown.
using ComponentResolver =
    std::function<std::shared_ptr<const FunctionDef>(const std::string&)>;

struct ExecutionTrace {
  enum class Status { kCompleted, kRuntimeError };

  std::vector<ApiCallRecord> records;
  Status status = Status::kCompleted;
  std::string error_message;
  // Index of the top-level statement of the plan in which the error occurred.
  int error_statement = -1;

  bool completed() const { return status == Status::kCompleted; }
  friend bool operator==(const ExecutionTrace&,
                         const ExecutionTrace&) = default;
};

// Executes a parameter-free plan. Component calls inline the component body
// with its own parameter scope. Component-call cycles reachable from the plan
// are rejected before any api call is made.
ExecutionTrace execute(const Plan& plan, ApiExecutor& executor,
                       const ComponentResolver& resolver);

ExecutionTrace execute(const PolicyAst& plan, ApiExecutor& executor,
                       const ComponentResolver& resolver);

// Finds a component-call cycle reachable from `root`; returns the cycle as a
// name path (first == last) or nullopt.
std::optional<std::vector<std::string>> find_component_cycle(
    const FunctionDef& root, const ComponentResolver& resolver);

}  // namespace hclgp::lang
