#include "hclgp/lang/instantiate.hpp"

#include <algorithm>
#include <map>

#include "hclgp/lang/parser.hpp"

namespace hclgp::lang {

std::string substitution_text(const Value& v) {
  if (v.is_number() && v.as_number() < 0) return "(" + to_literal(v) + ")";
  return to_literal(v);
}

Plan instantiate(const Policy& policy, const ParameterBinding& binding) {
  PolicyAst ast = parse(policy.source);
  std::map<std::string, const Value*> values;
  for (const auto& p : ast.root.params) {
    auto it = binding.values.find(p.name);
    if (it == binding.values.end()) {
      throw InstantiationError("unbound parameter '" + p.name + "'");
    }
    values[p.name] = &it->second;
  }

  // Parameter names cannot be shadowed, so every VarExpr naming a parameter
  // refers to it.
  std::vector<std::pair<SourceSpan, std::string>> edits;
  edits.push_back({ast.root.params_span, "()"});
  for_each_expr(ast.root.body, [&](const Expr& e) {
    if (const auto* var = std::get_if<VarExpr>(&e.node)) {
      auto it = values.find(var->name);
      if (it != values.end()) {
        edits.push_back({e.span, substitution_text(*it->second)});
      }
    }
  });
  std::sort(edits.begin(), edits.end(), [](const auto& a, const auto& b) {
    return a.first.offset < b.first.offset;
  });

  std::string out;
  size_t cursor = 0;
  for (const auto& [span, text] : edits) {
    out.append(policy.source, cursor, span.offset - cursor);
    out += text;
    cursor = span.offset + span.length;
  }
  out.append(policy.source, cursor, std::string::npos);
  return Plan{binding.task_id, std::move(out)};
}

namespace {

ExprPtr subst_expr(const ExprPtr& e,
                   const std::map<std::string, Value>& values);

Block subst_block(const Block& block,
                  const std::map<std::string, Value>& values) {
  Block out;
  for (const auto& stmt : block) {
    auto copy = std::make_shared<Stmt>(*stmt);
    std::visit(
        [&](auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, LetStmt>) {
            s.value = subst_expr(s.value, values);
          } else if constexpr (std::is_same_v<T, CallStmt>) {
            s.call = subst_expr(s.call, values);
          } else if constexpr (std::is_same_v<T, IfStmt>) {
            s.condition = subst_expr(s.condition, values);
            s.then_block = subst_block(s.then_block, values);
            s.else_block = subst_block(s.else_block, values);
          } else if constexpr (std::is_same_v<T, ForStmt>) {
            s.iterable = subst_expr(s.iterable, values);
            s.body = subst_block(s.body, values);
          } else {
            if (s.value) s.value = subst_expr(s.value, values);
          }
        },
        copy->node);
    out.push_back(std::move(copy));
  }
  return out;
}

ExprPtr subst_expr(const ExprPtr& e,
                   const std::map<std::string, Value>& values) {
  auto copy = std::make_shared<Expr>(*e);
  std::visit(
      [&](auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, VarExpr>) {
          auto it = values.find(n.name);
          if (it != values.end()) copy->node = LiteralExpr{it->second};
        } else if constexpr (std::is_same_v<T, ListExpr>) {
          bool all_literal = true;
          for (auto& item : n.items) {
            item = subst_expr(item, values);
            all_literal = all_literal &&
                          std::holds_alternative<LiteralExpr>(item->node);
          }
          // Mirrors the parser, which folds constant lists into literals.
          if (all_literal) {
            List folded;
            for (const auto& item : n.items) {
              folded.push_back(std::get<LiteralExpr>(item->node).value);
            }
            copy->node = LiteralExpr{Value(std::move(folded))};
          }
        } else if constexpr (std::is_same_v<T, NegateExpr>) {
          n.operand = subst_expr(n.operand, values);
          const auto* lit = std::get_if<LiteralExpr>(&n.operand->node);
          if (lit && lit->value.is_number()) {
            copy->node = LiteralExpr{Value(-lit->value.as_number())};
          }
        } else if constexpr (std::is_same_v<T, BinaryExpr>) {
          n.lhs = subst_expr(n.lhs, values);
          n.rhs = subst_expr(n.rhs, values);
        } else if constexpr (std::is_same_v<T, FieldExpr>) {
          n.object = subst_expr(n.object, values);
        } else if constexpr (std::is_same_v<T, IndexExpr>) {
          n.object = subst_expr(n.object, values);
          n.index = subst_expr(n.index, values);
        } else if constexpr (std::is_same_v<T, ApiCallExpr>) {
          n.app = subst_expr(n.app, values);
          n.api = subst_expr(n.api, values);
          for (auto& [_, arg] : n.args) arg = subst_expr(arg, values);
        } else if constexpr (std::is_same_v<T, ComponentCallExpr>) {
          for (auto& arg : n.args) arg = subst_expr(arg, values);
        }
      },
      copy->node);
  return copy;
}

}  // namespace

PolicyAst substitute(const PolicyAst& ast, const ParameterBinding& binding) {
  std::map<std::string, Value> values;
  PolicyAst out = ast;
  out.root.params.clear();
  for (const auto& p : ast.root.params) {
    auto it = binding.values.find(p.name);
    if (it == binding.values.end()) {
      out.root.params.push_back(p);
    } else {
      values[p.name] = it->second;
    }
  }
  out.root.body = subst_block(ast.root.body, values);
  return out;
}

std::set<std::string> free_parameters(const PolicyAst& ast) {
  std::set<std::string> names;
  for (const auto& p : ast.root.params) names.insert(p.name);
  return names;
}

PolicySignature signature_of(const FunctionDef& fn) {
  PolicySignature sig;
  sig.name = fn.name;
  for (const auto& p : fn.params) {
    sig.params.push_back({p.name, p.type.value_or(ParamType::kString)});
  }
  return sig;
}

Policy make_policy(const std::string& source) {
  PolicyAst ast = parse(source);
  Policy policy;
  policy.signature = signature_of(ast.root);
  policy.source = source;
  policy.referenced_components = component_calls(ast.root);
  return policy;
}

void check_policy(const Policy& policy) {
  PolicyAst ast = parse(policy.source);
  if (!(signature_of(ast.root) == policy.signature)) {
    throw InvariantError("policy header " + signature_of(ast.root).to_string() +
                         " does not match signature " +
                         policy.signature.to_string());
  }
  auto referenced = policy.referenced_components;
  std::sort(referenced.begin(), referenced.end());
  referenced.erase(std::unique(referenced.begin(), referenced.end()),
                   referenced.end());
  if (referenced != component_calls(ast.root)) {
    throw InvariantError("referenced components do not match calls in " +
                         policy.signature.name);
  }
}

}  // namespace hclgp::lang
