#pragma once

#include <set>
#include <string>

#include "hclgp/core/model.hpp"
#include "hclgp/lang/ast.hpp"

namespace hclgp::lang {

class InstantiationError : public Error {
 public:
  using Error::Error;
};

// Replaces every parameter reference in the policy source with the literal
// text of its bound value and empties the parameter list. Source text outside
// the rewritten spans is preserved byte for byte.
Plan instantiate(const Policy& policy, const ParameterBinding& binding);

// AST-level substitution. Parameters without a value stay free, so partial
// bindings are allowed here.
PolicyAst substitute(const PolicyAst& ast, const ParameterBinding& binding);

std::set<std::string> free_parameters(const PolicyAst& ast);

// Literal source text used when a value replaces a parameter reference.
std::string substitution_text(const Value& v);

// Signature implied by a function header; untyped parameters become strings.
PolicySignature signature_of(const FunctionDef& fn);

// Parses the source and builds a Policy whose signature and referenced
// components are derived from it. Throws ParseError on malformed source.
Policy make_policy(const std::string& source);

// Checks the Policy invariants: the source parses, its header matches the
// signature, and referenced_components equals the set of component calls.
void check_policy(const Policy& policy);

}  // namespace hclgp::lang
