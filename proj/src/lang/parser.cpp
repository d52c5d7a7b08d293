#include "hclgp/lang/parser.hpp"

#include <cctype>
#include <charconv>
#include <set>

namespace hclgp::lang {

ParseError::ParseError(Kind kind, int line, int column,
                       const std::string& message)
    : Error(std::to_string(line) + ":" + std::to_string(column) + ": " +
            message),
      kind_(kind),
      line_(line),
      column_(column) {}

namespace {

enum class Tok {
  kIdent,
  kNumber,
  kString,
  kFn,
  kLet,
  kIf,
  kElse,
  kFor,
  kIn,
  kReturn,
  kTrue,
  kFalse,
  kApi,
  kLParen,
  kRParen,
  kLBrace,
  kRBrace,
  kLBracket,
  kRBracket,
  kComma,
  kColon,
  kColonColon,
  kDot,
  kSemicolon,
  kAssign,
  kEq,
  kNe,
  kLt,
  kLe,
  kGt,
  kGe,
  kPlus,
  kMinus,
  kStar,
  kEnd,
};

struct Token {
  Tok kind;
  std::string text;  // identifier name or decoded string literal
  double number = 0.0;
  SourceSpan span;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      Token t;
      t.span = {pos_, 0, line_, col_};
      if (pos_ >= src_.size()) {
        t.kind = Tok::kEnd;
        out.push_back(t);
        return out;
      }
      char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        lex_word(t);
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        lex_number(t);
      } else if (c == '"') {
        lex_string(t);
      } else {
        lex_punct(t);
      }
      t.span.length = pos_ - t.span.offset;
      out.push_back(std::move(t));
    }
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(ParseError::Kind::kSyntax, line_, col_, msg);
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  void lex_word(Token& t) {
    size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
            src_[pos_] == '_')) {
      advance();
    }
    t.text = std::string(src_.substr(start, pos_ - start));
    static const std::pair<const char*, Tok> kKeywords[] = {
        {"fn", Tok::kFn},         {"let", Tok::kLet},   {"if", Tok::kIf},
        {"else", Tok::kElse},     {"for", Tok::kFor},   {"in", Tok::kIn},
        {"return", Tok::kReturn}, {"true", Tok::kTrue}, {"false", Tok::kFalse},
        {"api", Tok::kApi},
    };
    t.kind = Tok::kIdent;
    for (const auto& [word, kind] : kKeywords) {
      if (t.text == word) t.kind = kind;
    }
  }

  void lex_number(Token& t) {
    size_t start = pos_;
    while (pos_ < src_.size() &&
           std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
      advance();
    }
    if (pos_ + 1 < src_.size() && src_[pos_] == '.' &&
        std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
      advance();
      while (pos_ < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        advance();
      }
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      size_t look = pos_ + 1;
      if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) {
        ++look;
      }
      if (look < src_.size() &&
          std::isdigit(static_cast<unsigned char>(src_[look]))) {
        while (pos_ < look) advance();
        while (pos_ < src_.size() &&
               std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
          advance();
        }
      }
    }
    auto text = src_.substr(start, pos_ - start);
    auto res = std::from_chars(text.data(), text.data() + text.size(),
                               t.number);
    if (res.ec != std::errc()) fail("bad number literal");
    t.kind = Tok::kNumber;
  }

  void lex_string(Token& t) {
    advance();  // opening quote
    std::string out;
    while (true) {
      if (pos_ >= src_.size()) fail("unterminated string literal");
      char c = src_[pos_];
      if (c == '"') {
        advance();
        break;
      }
      if (c == '\n') fail("newline in string literal");
      if (c == '\\') {
        advance();
        if (pos_ >= src_.size()) fail("unterminated string literal");
        char e = src_[pos_];
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: fail(std::string("unknown escape \\") + e);
        }
        advance();
        continue;
      }
      out += c;
      advance();
    }
    t.kind = Tok::kString;
    t.text = std::move(out);
  }

  void lex_punct(Token& t) {
    char c = src_[pos_];
    char n = pos_ + 1 < src_.size() ? src_[pos_ + 1] : '\0';
    auto two = [&](Tok kind) {
      advance();
      advance();
      t.kind = kind;
    };
    auto one = [&](Tok kind) {
      advance();
      t.kind = kind;
    };
    switch (c) {
      case '(': return one(Tok::kLParen);
      case ')': return one(Tok::kRParen);
      case '{': return one(Tok::kLBrace);
      case '}': return one(Tok::kRBrace);
      case '[': return one(Tok::kLBracket);
      case ']': return one(Tok::kRBracket);
      case ',': return one(Tok::kComma);
      case ';': return one(Tok::kSemicolon);
      case '.': return one(Tok::kDot);
      case '+': return one(Tok::kPlus);
      case '-': return one(Tok::kMinus);
      case '*': return one(Tok::kStar);
      case ':': return n == ':' ? two(Tok::kColonColon) : one(Tok::kColon);
      case '=': return n == '=' ? two(Tok::kEq) : one(Tok::kAssign);
      case '!':
        if (n == '=') return two(Tok::kNe);
        break;
      case '<': return n == '=' ? two(Tok::kLe) : one(Tok::kLt);
      case '>': return n == '=' ? two(Tok::kGe) : one(Tok::kGt);
      default: break;
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  std::string_view src_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : tokens_(Lexer(src).run()) {}

  std::vector<FunctionDef> functions() {
    std::vector<FunctionDef> out;
    std::set<std::string> names;
    while (peek().kind != Tok::kEnd) {
      const Token& at = peek();
      FunctionDef fn = function();
      if (!names.insert(fn.name).second) {
        throw ParseError(ParseError::Kind::kDuplicateDefinition, at.span.line,
                         at.span.column,
                         "duplicate function '" + fn.name + "'");
      }
      out.push_back(std::move(fn));
    }
    if (out.empty()) fail(peek(), "expected a function definition");
    return out;
  }

 private:
  [[noreturn]] void fail(const Token& at, const std::string& msg) const {
    throw ParseError(ParseError::Kind::kSyntax, at.span.line, at.span.column,
                     msg);
  }

  const Token& peek(size_t ahead = 0) const {
    size_t i = std::min(pos_ + ahead, tokens_.size() - 1);
    return tokens_[i];
  }
  const Token& next() {
    const Token& t = tokens_[pos_];
    if (pos_ + 1 < tokens_.size()) ++pos_;
    return t;
  }
  bool accept(Tok kind) {
    if (peek().kind != kind) return false;
    next();
    return true;
  }
  const Token& expect(Tok kind, const char* what) {
    if (peek().kind != kind) {
      fail(peek(), std::string("expected ") + what);
    }
    return next();
  }
  size_t prev_end() const {
    const Token& t = tokens_[pos_ == 0 ? 0 : pos_ - 1];
    return t.span.offset + t.span.length;
  }
  SourceSpan span_from(const SourceSpan& start) const {
    SourceSpan s = start;
    s.length = prev_end() - start.offset;
    return s;
  }

  // Scopes --------------------------------------------------------------

  bool visible(const std::string& name) const {
    for (const auto& scope : scopes_) {
      if (scope.count(name)) return true;
    }
    return false;
  }
  void define(const std::string& name, const Token& at) {
    if (visible(name)) {
      throw ParseError(ParseError::Kind::kDuplicateDefinition, at.span.line,
                       at.span.column, "duplicate definition of '" + name + "'");
    }
    scopes_.back().insert(name);
  }

  // Grammar -------------------------------------------------------------

  FunctionDef function() {
    FunctionDef fn;
    const Token& kw = expect(Tok::kFn, "'fn'");
    fn.name = expect(Tok::kIdent, "function name").text;
    scopes_.clear();
    scopes_.emplace_back();
    const Token& open = expect(Tok::kLParen, "'('");
    if (peek().kind != Tok::kRParen) {
      do {
        const Token& name = expect(Tok::kIdent, "parameter name");
        Param p;
        p.name = name.text;
        p.span = name.span;
        if (accept(Tok::kColon)) {
          const Token& type = expect(Tok::kIdent, "parameter type");
          p.type = parse_param_type(type.text);
          if (!p.type) fail(type, "unknown parameter type '" + type.text + "'");
          p.span = span_from(name.span);
        }
        define(p.name, name);
        fn.params.push_back(std::move(p));
      } while (accept(Tok::kComma));
    }
    expect(Tok::kRParen, "')'");
    fn.params_span = span_from(open.span);
    fn.body = block();
    fn.span = span_from(kw.span);
    scopes_.clear();
    return fn;
  }

  Block block() {
    expect(Tok::kLBrace, "'{'");
    scopes_.emplace_back();
    Block out;
    while (peek().kind != Tok::kRBrace) {
      if (peek().kind == Tok::kEnd) fail(peek(), "expected '}'");
      out.push_back(statement());
      while (accept(Tok::kSemicolon)) {
      }
    }
    next();
    scopes_.pop_back();
    return out;
  }

  StmtPtr statement() {
    const Token& start = peek();
    auto stmt = std::make_shared<Stmt>();
    switch (start.kind) {
      case Tok::kLet: {
        next();
        const Token& name = expect(Tok::kIdent, "variable name");
        expect(Tok::kAssign, "'='");
        ExprPtr value = expression();
        define(name.text, name);
        stmt->node = LetStmt{name.text, std::move(value)};
        break;
      }
      case Tok::kIf:
        stmt->node = if_statement();
        break;
      case Tok::kFor: {
        next();
        const Token& var = expect(Tok::kIdent, "loop variable");
        expect(Tok::kIn, "'in'");
        ExprPtr iterable = expression();
        scopes_.emplace_back();
        define(var.text, var);
        Block body = block();
        scopes_.pop_back();
        stmt->node = ForStmt{var.text, std::move(iterable), std::move(body)};
        break;
      }
      case Tok::kReturn: {
        next();
        ExprPtr value;
        if (peek().kind != Tok::kRBrace && peek().kind != Tok::kSemicolon) {
          value = expression();
        }
        stmt->node = ReturnStmt{std::move(value)};
        break;
      }
      default: {
        ExprPtr e = expression();
        if (!std::holds_alternative<ApiCallExpr>(e->node) &&
            !std::holds_alternative<ComponentCallExpr>(e->node)) {
          fail(start, "only calls may be used as statements");
        }
        stmt->node = CallStmt{std::move(e)};
      }
    }
    stmt->span = span_from(start.span);
    return stmt;
  }

  IfStmt if_statement() {
    expect(Tok::kIf, "'if'");
    IfStmt s;
    s.condition = expression();
    s.then_block = block();
    if (accept(Tok::kElse)) {
      if (peek().kind == Tok::kIf) {
        const Token& start = peek();
        auto nested = std::make_shared<Stmt>();
        nested->node = if_statement();
        nested->span = span_from(start.span);
        s.else_block.push_back(std::move(nested));
      } else {
        s.else_block = block();
      }
    }
    return s;
  }

  ExprPtr make(const SourceSpan& start, auto node) {
    auto e = std::make_shared<Expr>();
    e->node = std::move(node);
    e->span = span_from(start);
    return e;
  }

  ExprPtr expression() {
    const SourceSpan start = peek().span;
    ExprPtr lhs = additive();
    static const std::pair<Tok, BinaryOp> kCompare[] = {
        {Tok::kEq, BinaryOp::kEq}, {Tok::kNe, BinaryOp::kNe},
        {Tok::kLt, BinaryOp::kLt}, {Tok::kLe, BinaryOp::kLe},
        {Tok::kGt, BinaryOp::kGt}, {Tok::kGe, BinaryOp::kGe},
    };
    for (const auto& [tok, op] : kCompare) {
      if (peek().kind == tok) {
        next();
        ExprPtr rhs = additive();
        return make(start, BinaryExpr{op, std::move(lhs), std::move(rhs)});
      }
    }
    return lhs;
  }

  ExprPtr additive() {
    const SourceSpan start = peek().span;
    ExprPtr lhs = term();
    while (peek().kind == Tok::kPlus || peek().kind == Tok::kMinus) {
      BinaryOp op = next().kind == Tok::kPlus ? BinaryOp::kAdd : BinaryOp::kSub;
      ExprPtr rhs = term();
      lhs = make(start, BinaryExpr{op, std::move(lhs), std::move(rhs)});
    }
    return lhs;
  }

  ExprPtr term() {
    const SourceSpan start = peek().span;
    ExprPtr lhs = unary();
    while (accept(Tok::kStar)) {
      ExprPtr rhs = unary();
      lhs = make(start, BinaryExpr{BinaryOp::kMul, std::move(lhs),
                                   std::move(rhs)});
    }
    return lhs;
  }

  ExprPtr unary() {
    const SourceSpan start = peek().span;
    if (accept(Tok::kMinus)) {
      ExprPtr operand = unary();
      if (auto* lit = std::get_if<LiteralExpr>(&operand->node);
          lit && lit->value.is_number()) {
        return make(start, LiteralExpr{Value(-lit->value.as_number())});
      }
      return make(start, NegateExpr{std::move(operand)});
    }
    return postfix();
  }

  ExprPtr postfix() {
    const SourceSpan start = peek().span;
    ExprPtr e = primary();
    while (true) {
      if (accept(Tok::kDot)) {
        const Token& field = expect(Tok::kIdent, "field name");
        e = make(start, FieldExpr{std::move(e), field.text});
      } else if (accept(Tok::kLBracket)) {
        ExprPtr index = expression();
        expect(Tok::kRBracket, "']'");
        e = make(start, IndexExpr{std::move(e), std::move(index)});
      } else {
        return e;
      }
    }
  }

  std::vector<std::pair<std::string, ExprPtr>> keyword_args() {
    std::vector<std::pair<std::string, ExprPtr>> args;
    std::set<std::string> seen;
    if (peek().kind == Tok::kRParen) return args;
    do {
      const Token& key = expect(Tok::kIdent, "argument name");
      if (!seen.insert(key.text).second) {
        fail(key, "duplicate argument '" + key.text + "'");
      }
      expect(Tok::kColon, "':'");
      args.emplace_back(key.text, expression());
    } while (accept(Tok::kComma));
    return args;
  }

  ExprPtr string_literal(const Token& t) {
    auto e = std::make_shared<Expr>();
    e->node = LiteralExpr{Value(t.text)};
    e->span = t.span;
    return e;
  }

  ExprPtr primary() {
    const Token& t = peek();
    const SourceSpan start = t.span;
    switch (t.kind) {
      case Tok::kNumber:
        next();
        return make(start, LiteralExpr{Value(t.number)});
      case Tok::kString:
        next();
        return make(start, LiteralExpr{Value(t.text)});
      case Tok::kTrue:
        next();
        return make(start, LiteralExpr{Value(true)});
      case Tok::kFalse:
        next();
        return make(start, LiteralExpr{Value(false)});
      case Tok::kLParen: {
        next();
        ExprPtr inner = expression();
        expect(Tok::kRParen, "')'");
        return inner;
      }
      case Tok::kLBracket: {
        next();
        std::vector<ExprPtr> items;
        if (peek().kind != Tok::kRBracket) {
          do {
            items.push_back(expression());
          } while (accept(Tok::kComma));
        }
        expect(Tok::kRBracket, "']'");
        bool all_literal = true;
        for (const auto& item : items) {
          all_literal = all_literal &&
                        std::holds_alternative<LiteralExpr>(item->node);
        }
        if (all_literal) {
          List values;
          for (const auto& item : items) {
            values.push_back(std::get<LiteralExpr>(item->node).value);
          }
          return make(start, LiteralExpr{Value(std::move(values))});
        }
        return make(start, ListExpr{std::move(items)});
      }
      case Tok::kApi: {
        next();
        expect(Tok::kLParen, "'('");
        ApiCallExpr call;
        call.app = expression();
        expect(Tok::kComma, "','");
        call.api = expression();
        if (accept(Tok::kComma)) call.args = keyword_args();
        expect(Tok::kRParen, "')'");
        return make(start, std::move(call));
      }
      case Tok::kIdent: {
        next();
        if (peek().kind == Tok::kColonColon) {
          next();
          const Token& api = expect(Tok::kIdent, "api name");
          ApiCallExpr call;
          call.app = string_literal(t);
          call.api = string_literal(api);
          expect(Tok::kLParen, "'('");
          call.args = keyword_args();
          expect(Tok::kRParen, "')'");
          return make(start, std::move(call));
        }
        if (peek().kind == Tok::kLParen) {
          next();
          ComponentCallExpr call;
          call.name = t.text;
          if (peek().kind != Tok::kRParen) {
            do {
              call.args.push_back(expression());
            } while (accept(Tok::kComma));
          }
          expect(Tok::kRParen, "')'");
          return make(start, std::move(call));
        }
        if (!visible(t.text)) {
          throw ParseError(ParseError::Kind::kUseBeforeDefine, t.span.line,
                           t.span.column,
                           "use of undefined variable '" + t.text + "'");
        }
        return make(start, VarExpr{t.text});
      }
      default:
        fail(t, "expected an expression");
    }
  }

  std::vector<Token> tokens_;
  size_t pos_ = 0;
  std::vector<std::set<std::string>> scopes_;
};

}  // namespace

PolicyAst parse(std::string_view source) {
  auto fns = Parser(source).functions();
  if (fns.size() != 1) {
    throw ParseError(ParseError::Kind::kSyntax, 1, 1,
                     "expected exactly one function definition, found " +
                         std::to_string(fns.size()));
  }
  return PolicyAst{std::move(fns.front())};
}

std::vector<FunctionDef> parse_functions(std::string_view source) {
  return Parser(source).functions();
}

}  // namespace hclgp::lang
