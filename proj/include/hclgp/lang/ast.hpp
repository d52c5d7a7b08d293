#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hclgp/core/model.hpp"
#include "hclgp/core/value.hpp"

namespace hclgp::lang {

struct SourceSpan {
  size_t offset = 0;
  size_t length = 0;
  int line = 1;
  int column = 1;
};

struct Expr;
struct Stmt;
using ExprPtr = std::shared_ptr<const Expr>;
using StmtPtr = std::shared_ptr<const Stmt>;
using Block = std::vector<StmtPtr>;

enum class BinaryOp { kAdd, kSub, kMul, kEq, kNe, kLt, kLe, kGt, kGe };
std::string_view binary_op_text(BinaryOp op);

struct LiteralExpr {
  Value value;
};
struct VarExpr {
  std::string name;
};
struct ListExpr {
  std::vector<ExprPtr> items;
};
struct NegateExpr {
  ExprPtr operand;
};
struct BinaryExpr {
  BinaryOp op;
  ExprPtr lhs;
  ExprPtr rhs;
};
struct FieldExpr {
  ExprPtr object;
  std::string field;
};
struct IndexExpr {
  ExprPtr object;
  ExprPtr index;
};
// `app::name(k: v, ...)` or the dynamic form `api(app_expr, name_expr, ...)`.
struct ApiCallExpr {
  ExprPtr app;
  ExprPtr api;
  std::vector<std::pair<std::string, ExprPtr>> args;
};
struct ComponentCallExpr {
  std::string name;
  std::vector<ExprPtr> args;
};

struct Expr {
  std::variant<LiteralExpr, VarExpr, ListExpr, NegateExpr, BinaryExpr,
               FieldExpr, IndexExpr, ApiCallExpr, ComponentCallExpr>
      node;
  SourceSpan span;
};

struct LetStmt {
  std::string name;
  ExprPtr value;
};
// Statement-level api or component call.
struct CallStmt {
  ExprPtr call;
};
struct IfStmt {
  ExprPtr condition;
  Block then_block;
  Block else_block;
};
struct ForStmt {
  std::string var;
  ExprPtr iterable;
  Block body;
};
struct ReturnStmt {
  ExprPtr value;  // may be null
};

struct Stmt {
  std::variant<LetStmt, CallStmt, IfStmt, ForStmt, ReturnStmt> node;
  SourceSpan span;
};

struct Param {
  std::string name;
  std::optional<ParamType> type;
  SourceSpan span;
};

struct FunctionDef {
  std::string name;
  std::vector<Param> params;
  Block body;
  SourceSpan span;
  // Span from '(' to ')' inclusive of the parameter list.
  SourceSpan params_span;
};

struct PolicyAst {
  FunctionDef root;
};

// Structural equality; source spans are ignored.
bool same_structure(const Expr& a, const Expr& b);
bool same_structure(const Block& a, const Block& b);
bool same_structure(const FunctionDef& a, const FunctionDef& b);
bool same_structure(const PolicyAst& a, const PolicyAst& b);

// Pre-order walk over every expression in the block, nested ones included.
void for_each_expr(const Block& block,
                   const std::function<void(const Expr&)>& fn);

struct CallCounts {
  int api_calls = 0;
  int component_calls = 0;
};
CallCounts count_calls(const FunctionDef& fn);

// Names of components called anywhere in the function, sorted and unique.
std::vector<std::string> component_calls(const FunctionDef& fn);

}  // namespace hclgp::lang
