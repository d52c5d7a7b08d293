#include "hclgp/lang/interpreter.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "hclgp/lang/parser.hpp"

namespace hclgp::lang {

namespace {

struct RuntimeError {
  std::string message;
};

// Unwinds a function body on `return`.
struct ReturnSignal {
  Value value;
};

class Frame {
 public:
  void push() { scopes_.emplace_back(); }
  void pop() { scopes_.pop_back(); }
  void define(const std::string& name, Value v) {
    scopes_.back()[name] = std::move(v);
  }
  const Value& lookup(const std::string& name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto found = it->find(name);
      if (found != it->end()) return found->second;
    }
    throw RuntimeError{"undefined variable '" + name + "'"};
  }

 private:
  std::vector<std::map<std::string, Value>> scopes_;
};

class Interpreter {
 public:
  Interpreter(ApiExecutor& executor, const ComponentResolver& resolver,
              std::vector<ApiCallRecord>& records)
      : executor_(executor), resolver_(resolver), records_(records) {}

  Value call_function(const FunctionDef& fn, const std::vector<Value>& args) {
    if (args.size() != fn.params.size()) {
      throw RuntimeError{"component '" + fn.name + "' expects " +
                         std::to_string(fn.params.size()) + " arguments, got " +
                         std::to_string(args.size())};
    }
    Frame frame;
    frame.push();
    for (size_t i = 0; i < args.size(); ++i) {
      const auto& p = fn.params[i];
      if (p.type && !literal_matches(*p.type, args[i])) {
        throw RuntimeError{"argument '" + p.name + "' of '" + fn.name +
                           "' must be " +
                           std::string(param_type_name(*p.type))};
      }
      frame.define(p.name, args[i]);
    }
    try {
      run_block(fn.body, frame);
    } catch (ReturnSignal& r) {
      return std::move(r.value);
    }
    return Value();
  }

  void run_statement(const Stmt& stmt, Frame& frame) {
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, LetStmt>) {
            frame.define(s.name, eval(*s.value, frame));
          } else if constexpr (std::is_same_v<T, CallStmt>) {
            eval(*s.call, frame);
          } else if constexpr (std::is_same_v<T, IfStmt>) {
            Value cond = eval(*s.condition, frame);
            if (!cond.is_bool()) {
              throw RuntimeError{"if condition must be boolean, got " +
                                 std::string(kind_name(cond.kind()))};
            }
            run_block(cond.as_bool() ? s.then_block : s.else_block, frame);
          } else if constexpr (std::is_same_v<T, ForStmt>) {
            Value iterable = eval(*s.iterable, frame);
            if (!iterable.is_list()) {
              throw RuntimeError{"cannot iterate over " +
                                 std::string(kind_name(iterable.kind()))};
            }
            for (const auto& item : iterable.as_list()) {
              frame.push();
              frame.define(s.var, item);
              try {
                run_block(s.body, frame);
              } catch (...) {
                frame.pop();
                throw;
              }
              frame.pop();
            }
          } else {
            throw ReturnSignal{s.value ? eval(*s.value, frame) : Value()};
          }
        },
        stmt.node);
  }

  void run_block(const Block& block, Frame& frame) {
    frame.push();
    try {
      for (const auto& stmt : block) run_statement(*stmt, frame);
    } catch (...) {
      frame.pop();
      throw;
    }
    frame.pop();
  }

 private:
  static double number(const Value& v, std::string_view what) {
    if (!v.is_number()) {
      throw RuntimeError{std::string(what) + " expects numbers, got " +
                         std::string(kind_name(v.kind()))};
    }
    return v.as_number();
  }

  Value binary(BinaryOp op, const Value& a, const Value& b) {
    switch (op) {
      case BinaryOp::kAdd:
        if (a.is_string() && b.is_string()) {
          return Value(a.as_string() + b.as_string());
        }
        return Value(number(a, "'+'") + number(b, "'+'"));
      case BinaryOp::kSub:
        return Value(number(a, "'-'") - number(b, "'-'"));
      case BinaryOp::kMul:
        return Value(number(a, "'*'") * number(b, "'*'"));
      case BinaryOp::kEq:
      case BinaryOp::kNe: {
        if (a.kind() != b.kind()) {
          throw RuntimeError{"cannot compare " +
                             std::string(kind_name(a.kind())) + " with " +
                             std::string(kind_name(b.kind()))};
        }
        bool eq = a == b;
        return Value(op == BinaryOp::kEq ? eq : !eq);
      }
      default: break;
    }
    int cmp = 0;
    if (a.is_number() && b.is_number()) {
      cmp = a.as_number() < b.as_number() ? -1
            : a.as_number() > b.as_number() ? 1
                                            : 0;
    } else if (a.is_string() && b.is_string()) {
      cmp = a.as_string().compare(b.as_string());
    } else {
      throw RuntimeError{"cannot order " + std::string(kind_name(a.kind())) +
                         " and " + std::string(kind_name(b.kind()))};
    }
    switch (op) {
      case BinaryOp::kLt: return Value(cmp < 0);
      case BinaryOp::kLe: return Value(cmp <= 0);
      case BinaryOp::kGt: return Value(cmp > 0);
      default: return Value(cmp >= 0);
    }
  }

  Value eval(const Expr& e, Frame& frame) {
    return std::visit(
        [&](const auto& n) -> Value {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, LiteralExpr>) {
            return n.value;
          } else if constexpr (std::is_same_v<T, VarExpr>) {
            return frame.lookup(n.name);
          } else if constexpr (std::is_same_v<T, ListExpr>) {
            List items;
            for (const auto& item : n.items) items.push_back(eval(*item, frame));
            return Value(std::move(items));
          } else if constexpr (std::is_same_v<T, NegateExpr>) {
            return Value(-number(eval(*n.operand, frame), "'-'"));
          } else if constexpr (std::is_same_v<T, BinaryExpr>) {
            Value lhs = eval(*n.lhs, frame);
            Value rhs = eval(*n.rhs, frame);
            return binary(n.op, lhs, rhs);
          } else if constexpr (std::is_same_v<T, FieldExpr>) {
            Value object = eval(*n.object, frame);
            if (!object.is_record()) {
              throw RuntimeError{"cannot read field '" + n.field + "' of " +
                                 std::string(kind_name(object.kind()))};
            }
            const Value* field = object.field(n.field);
            if (!field) throw RuntimeError{"missing field '" + n.field + "'"};
            return *field;
          } else if constexpr (std::is_same_v<T, IndexExpr>) {
            Value object = eval(*n.object, frame);
            Value index = eval(*n.index, frame);
            if (!object.is_list()) {
              throw RuntimeError{"cannot index " +
                                 std::string(kind_name(object.kind()))};
            }
            double i = number(index, "index");
            const auto& list = object.as_list();
            if (i < 0 || i != std::floor(i) ||
                i >= static_cast<double>(list.size())) {
              throw RuntimeError{"index " + format_number(i) +
                                 " out of range for list of size " +
                                 std::to_string(list.size())};
            }
            return list[static_cast<size_t>(i)];
          } else if constexpr (std::is_same_v<T, ApiCallExpr>) {
            return api_call(n, frame);
          } else {
            return component_call(n, frame);
          }
        },
        e.node);
  }

  Value api_call(const ApiCallExpr& call, Frame& frame) {
    Value app = eval(*call.app, frame);
    Value api = eval(*call.api, frame);
    if (!app.is_string() || !api.is_string()) {
      throw RuntimeError{"api target must be a pair of strings"};
    }
    Record args;
    for (const auto& [name, expr] : call.args) {
      args.emplace_back(name, eval(*expr, frame));
    }
    args = Value(std::move(args)).as_record();  // sort keys
    ApiResult result = executor_.call(app.as_string(), api.as_string(), args);
    ApiCallRecord record{app.as_string(), api.as_string(), args,
                         result.response, result.error};
    records_.push_back(std::move(record));
    if (result.error) {
      throw RuntimeError{app.as_string() + "::" + api.as_string() + ": " +
                         *result.error};
    }
    return result.response;
  }

  Value component_call(const ComponentCallExpr& call, Frame& frame) {
    auto fn = resolver_ ? resolver_(call.name) : nullptr;
    if (!fn) throw RuntimeError{"unknown component '" + call.name + "'"};
    std::vector<Value> args;
    for (const auto& arg : call.args) args.push_back(eval(*arg, frame));
    return call_function(*fn, args);
  }

  ApiExecutor& executor_;
  const ComponentResolver& resolver_;
  std::vector<ApiCallRecord>& records_;
};

bool dfs_cycle(const FunctionDef& fn, const ComponentResolver& resolver,
               std::vector<std::string>& path, std::set<std::string>& done) {
  for (const auto& name : component_calls(fn)) {
    auto on_path = std::find(path.begin(), path.end(), name);
    if (on_path != path.end()) {
      path.erase(path.begin(), on_path);
      path.push_back(name);
      return true;
    }
    if (done.count(name)) continue;
    auto callee = resolver ? resolver(name) : nullptr;
    if (!callee) continue;  // reported at call time
    path.push_back(name);
    if (dfs_cycle(*callee, resolver, path, done)) return true;
    path.pop_back();
    done.insert(name);
  }
  return false;
}

}  // namespace

std::optional<std::vector<std::string>> find_component_cycle(
    const FunctionDef& root, const ComponentResolver& resolver) {
  std::vector<std::string> path;
  std::set<std::string> done;
  if (dfs_cycle(root, resolver, path, done)) return path;
  return std::nullopt;
}

ExecutionTrace execute(const PolicyAst& plan, ApiExecutor& executor,
                       const ComponentResolver& resolver) {
  ExecutionTrace trace;
  if (auto cycle = find_component_cycle(plan.root, resolver)) {
    std::string path;
    for (const auto& name : *cycle) {
      if (!path.empty()) path += " -> ";
      path += name;
    }
    trace.status = ExecutionTrace::Status::kRuntimeError;
    trace.error_message = "component recursion: " + path;
    trace.error_statement = 0;
    return trace;
  }
  if (!plan.root.params.empty()) {
    trace.status = ExecutionTrace::Status::kRuntimeError;
    trace.error_message =
        "plan has unbound parameter '" + plan.root.params.front().name + "'";
    trace.error_statement = 0;
    return trace;
  }

  Interpreter interp(executor, resolver, trace.records);
  Frame frame;
  frame.push();
  int index = 0;
  try {
    for (; index < static_cast<int>(plan.root.body.size()); ++index) {
      interp.run_statement(*plan.root.body[index], frame);
    }
  } catch (const ReturnSignal&) {
  } catch (const RuntimeError& err) {
    trace.status = ExecutionTrace::Status::kRuntimeError;
    trace.error_message = err.message;
    trace.error_statement = index;
  }
  return trace;
}

ExecutionTrace execute(const Plan& plan, ApiExecutor& executor,
                       const ComponentResolver& resolver) {
  PolicyAst ast;
  try {
    ast = parse(plan.instantiated_source);
  } catch (const ParseError& err) {
    ExecutionTrace trace;
    trace.status = ExecutionTrace::Status::kRuntimeError;
    trace.error_message = std::string("plan does not parse: ") + err.what();
    trace.error_statement = 0;
    return trace;
  }
  return execute(ast, executor, resolver);
}

}  // namespace hclgp::lang
