#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "hclgp/core/error.hpp"
#include "hclgp/lang/ast.hpp"

namespace hclgp::lang {

class ParseError : public Error {
 public:
  enum class Kind { kSyntax, kDuplicateDefinition, kUseBeforeDefine };

  ParseError(Kind kind, int line, int column, const std::string& message);

  Kind kind() const { return kind_; }
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  Kind kind_;
  int line_;
  int column_;
};

// Parses a source holding exactly one function definition.
PolicyAst parse(std::string_view source);

// Parses a source holding one or more function definitions, e.g. a block of
// components. Function names must be distinct.
std::vector<FunctionDef> parse_functions(std::string_view source);

}  // namespace hclgp::lang
