#include "hclgp/lang/ast.hpp"

#include <set>

namespace hclgp::lang {

std::string_view binary_op_text(BinaryOp op) {
  switch (op) {
    case BinaryOp::kAdd: return "+";
    case BinaryOp::kSub: return "-";
    case BinaryOp::kMul: return "*";
    case BinaryOp::kEq: return "==";
    case BinaryOp::kNe: return "!=";
    case BinaryOp::kLt: return "<";
    case BinaryOp::kLe: return "<=";
    case BinaryOp::kGt: return ">";
    case BinaryOp::kGe: return ">=";
  }
  return "?";
}

namespace {

bool same_ptr(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  return same_structure(*a, *b);
}

bool same_stmt(const Stmt& a, const Stmt& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, LetStmt>) {
          return x.name == y.name && same_ptr(x.value, y.value);
        } else if constexpr (std::is_same_v<T, CallStmt>) {
          return same_ptr(x.call, y.call);
        } else if constexpr (std::is_same_v<T, IfStmt>) {
          return same_ptr(x.condition, y.condition) &&
                 same_structure(x.then_block, y.then_block) &&
                 same_structure(x.else_block, y.else_block);
        } else if constexpr (std::is_same_v<T, ForStmt>) {
          return x.var == y.var && same_ptr(x.iterable, y.iterable) &&
                 same_structure(x.body, y.body);
        } else {
          return same_ptr(x.value, y.value);
        }
      },
      a.node);
}

void visit_expr(const Expr& e, const auto& fn);

void visit_block(const Block& block, const auto& fn) {
  for (const auto& stmt : block) {
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, LetStmt>) {
            visit_expr(*s.value, fn);
          } else if constexpr (std::is_same_v<T, CallStmt>) {
            visit_expr(*s.call, fn);
          } else if constexpr (std::is_same_v<T, IfStmt>) {
            visit_expr(*s.condition, fn);
            visit_block(s.then_block, fn);
            visit_block(s.else_block, fn);
          } else if constexpr (std::is_same_v<T, ForStmt>) {
            visit_expr(*s.iterable, fn);
            visit_block(s.body, fn);
          } else {
            if (s.value) visit_expr(*s.value, fn);
          }
        },
        stmt->node);
  }
}

void visit_expr(const Expr& e, const auto& fn) {
  fn(e);
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ListExpr>) {
          for (const auto& item : n.items) visit_expr(*item, fn);
        } else if constexpr (std::is_same_v<T, NegateExpr>) {
          visit_expr(*n.operand, fn);
        } else if constexpr (std::is_same_v<T, BinaryExpr>) {
          visit_expr(*n.lhs, fn);
          visit_expr(*n.rhs, fn);
        } else if constexpr (std::is_same_v<T, FieldExpr>) {
          visit_expr(*n.object, fn);
        } else if constexpr (std::is_same_v<T, IndexExpr>) {
          visit_expr(*n.object, fn);
          visit_expr(*n.index, fn);
        } else if constexpr (std::is_same_v<T, ApiCallExpr>) {
          visit_expr(*n.app, fn);
          visit_expr(*n.api, fn);
          for (const auto& [_, arg] : n.args) visit_expr(*arg, fn);
        } else if constexpr (std::is_same_v<T, ComponentCallExpr>) {
          for (const auto& arg : n.args) visit_expr(*arg, fn);
        }
      },
      e.node);
}

}  // namespace

bool same_structure(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, LiteralExpr>) {
          return x.value == y.value;
        } else if constexpr (std::is_same_v<T, VarExpr>) {
          return x.name == y.name;
        } else if constexpr (std::is_same_v<T, ListExpr>) {
          if (x.items.size() != y.items.size()) return false;
          for (size_t i = 0; i < x.items.size(); ++i) {
            if (!same_ptr(x.items[i], y.items[i])) return false;
          }
          return true;
        } else if constexpr (std::is_same_v<T, NegateExpr>) {
          return same_ptr(x.operand, y.operand);
        } else if constexpr (std::is_same_v<T, BinaryExpr>) {
          return x.op == y.op && same_ptr(x.lhs, y.lhs) &&
                 same_ptr(x.rhs, y.rhs);
        } else if constexpr (std::is_same_v<T, FieldExpr>) {
          return x.field == y.field && same_ptr(x.object, y.object);
        } else if constexpr (std::is_same_v<T, IndexExpr>) {
          return same_ptr(x.object, y.object) && same_ptr(x.index, y.index);
        } else if constexpr (std::is_same_v<T, ApiCallExpr>) {
          if (!same_ptr(x.app, y.app) || !same_ptr(x.api, y.api)) return false;
          if (x.args.size() != y.args.size()) return false;
          for (size_t i = 0; i < x.args.size(); ++i) {
            if (x.args[i].first != y.args[i].first ||
                !same_ptr(x.args[i].second, y.args[i].second)) {
              return false;
            }
          }
          return true;
        } else {
          if (x.name != y.name || x.args.size() != y.args.size()) return false;
          for (size_t i = 0; i < x.args.size(); ++i) {
            if (!same_ptr(x.args[i], y.args[i])) return false;
          }
          return true;
        }
      },
      a.node);
}

bool same_structure(const Block& a, const Block& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (!same_stmt(*a[i], *b[i])) return false;
  }
  return true;
}

bool same_structure(const FunctionDef& a, const FunctionDef& b) {
  if (a.name != b.name || a.params.size() != b.params.size()) return false;
  for (size_t i = 0; i < a.params.size(); ++i) {
    if (a.params[i].name != b.params[i].name ||
        a.params[i].type != b.params[i].type) {
      return false;
    }
  }
  return same_structure(a.body, b.body);
}

bool same_structure(const PolicyAst& a, const PolicyAst& b) {
  return same_structure(a.root, b.root);
}

void for_each_expr(const Block& block,
                   const std::function<void(const Expr&)>& fn) {
  visit_block(block, fn);
}

CallCounts count_calls(const FunctionDef& fn) {
  CallCounts counts;
  visit_block(fn.body, [&](const Expr& e) {
    if (std::holds_alternative<ApiCallExpr>(e.node)) ++counts.api_calls;
    if (std::holds_alternative<ComponentCallExpr>(e.node)) {
      ++counts.component_calls;
    }
  });
  return counts;
}

std::vector<std::string> component_calls(const FunctionDef& fn) {
  std::set<std::string> names;
  visit_block(fn.body, [&](const Expr& e) {
    if (const auto* call = std::get_if<ComponentCallExpr>(&e.node)) {
      names.insert(call->name);
    }
  });
  return {names.begin(), names.end()};
}

}  // namespace hclgp::lang
