#pragma once

// Arithmetic expression DSL used to define the bivariate distance maps D and P,
// the self-map T, and the comparison function phi at runtime.
//
// Grammar (also published in docs/dsl.md):
//
//   expr       = term , { ("+" | "-") , term } ;
//   term       = factor , { ("*" | "/") , factor } ;
//   factor     = "-" , factor | power ;
//   power      = atom , [ "^" , factor ] ;            (* right-associative *)
//   atom       = number | identifier | call | "(" , expr , ")" ;
//   call       = identifier , "(" , expr , { "," , expr } , ")" ;
//   comparison = expr , rel , expr ;                  (* first argument of if *)
//   rel        = "<" | "<=" | ">" | ">=" | "==" | "!=" ;
//
// Precedence: ^  >  unary -  >  * /  >  + -.  Comparisons select a branch of
// if(cmp, then, else); they never yield a numeric value.

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <initializer_list>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "permet/errors.hpp"

namespace permet {

// ---------------------------------------------------------------------------
// Tokens

enum class TokenKind { Number, Identifier, Operator, Paren, Comma };

struct Token {
  TokenKind kind;
  std::string lexeme;
  std::size_t position;  // character offset into the source text
};

/// Splits `source` into tokens. Whitespace separates tokens and is dropped;
/// any character outside the grammar raises LexError with its offset.
inline std::vector<Token> tokenize(std::string_view source) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  const std::size_t n = source.size();
  auto peek = [&](std::size_t k) -> char { return i + k < n ? source[i + k] : '\0'; };
  while (i < n) {
    const char c = source[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
      while (std::isdigit(static_cast<unsigned char>(peek(0)))) ++i;
      if (peek(0) == '.') {
        ++i;
        while (std::isdigit(static_cast<unsigned char>(peek(0)))) ++i;
      }
      if (peek(0) == 'e' || peek(0) == 'E') {
        std::size_t j = 1;
        if (peek(j) == '+' || peek(j) == '-') ++j;
        if (std::isdigit(static_cast<unsigned char>(peek(j)))) {
          i += j;
          while (std::isdigit(static_cast<unsigned char>(peek(0)))) ++i;
        }
      }
      std::string lexeme(source.substr(start, i - start));
      const double value = std::strtod(lexeme.c_str(), nullptr);
      if (!std::isfinite(value)) {
        throw LexError("number literal '" + lexeme + "' is out of range", start);
      }
      tokens.push_back({TokenKind::Number, std::move(lexeme), start});
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (std::isalnum(static_cast<unsigned char>(peek(0))) || peek(0) == '_') ++i;
      tokens.push_back({TokenKind::Identifier, std::string(source.substr(start, i - start)), start});
      continue;
    }
    switch (c) {
      case '+': case '-': case '*': case '/': case '^':
        tokens.push_back({TokenKind::Operator, std::string(1, c), start});
        ++i;
        continue;
      case '(': case ')':
        tokens.push_back({TokenKind::Paren, std::string(1, c), start});
        ++i;
        continue;
      case ',':
        tokens.push_back({TokenKind::Comma, ",", start});
        ++i;
        continue;
      case '<': case '>':
        if (peek(1) == '=') {
          tokens.push_back({TokenKind::Operator, std::string{c, '='}, start});
          i += 2;
        } else {
          tokens.push_back({TokenKind::Operator, std::string(1, c), start});
          ++i;
        }
        continue;
      case '=':
      case '!':
        if (peek(1) == '=') {
          tokens.push_back({TokenKind::Operator, std::string{c, '='}, start});
          i += 2;
          continue;
        }
        throw LexError(std::string("expected '=' after '") + c + "'", start);
      default:
        throw LexError(std::string("unexpected character '") + c + "'", start);
    }
  }
  return tokens;
}

// ---------------------------------------------------------------------------
// AST

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class BinaryOp { Add, Sub, Mul, Div, Pow };
enum class CmpOp { Lt, Le, Gt, Ge, Eq, Ne };

struct Constant {
  double value;
};
struct Variable {
  std::string name;
};
struct Negate {
  ExprPtr operand;
};
struct Binary {
  BinaryOp op;
  ExprPtr lhs, rhs;
};
struct Call {
  std::string name;
  std::vector<ExprPtr> args;
};
struct Conditional {
  CmpOp op;
  ExprPtr cmp_lhs, cmp_rhs;
  ExprPtr if_true, if_false;
};

/// Immutable expression node. Instances never change after parse, so a tree
/// may be shared and evaluated from many threads concurrently.
class Expr {
 public:
  using Node = std::variant<Constant, Variable, Negate, Binary, Call, Conditional>;

  explicit Expr(Node node) : node_(std::move(node)) {}
  const Node& node() const { return node_; }

 private:
  Node node_;
};

inline ExprPtr make_expr(Expr::Node node) { return std::make_shared<const Expr>(std::move(node)); }

inline ExprPtr make_constant(double v) { return make_expr(Constant{v}); }
inline ExprPtr make_variable(std::string name) { return make_expr(Variable{std::move(name)}); }

inline bool equal(const Expr& a, const Expr& b);

inline bool equal(const ExprPtr& a, const ExprPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return equal(*a, *b);
}

inline bool equal(const Expr& a, const Expr& b) {
  if (a.node().index() != b.node().index()) return false;
  struct Visitor {
    const Expr::Node& other;
    bool operator()(const Constant& c) const { return std::get<Constant>(other).value == c.value; }
    bool operator()(const Variable& v) const { return std::get<Variable>(other).name == v.name; }
    bool operator()(const Negate& u) const { return equal(std::get<Negate>(other).operand, u.operand); }
    bool operator()(const Binary& x) const {
      const auto& o = std::get<Binary>(other);
      return o.op == x.op && equal(o.lhs, x.lhs) && equal(o.rhs, x.rhs);
    }
    bool operator()(const Call& c) const {
      const auto& o = std::get<Call>(other);
      if (o.name != c.name || o.args.size() != c.args.size()) return false;
      for (std::size_t i = 0; i < c.args.size(); ++i)
        if (!equal(o.args[i], c.args[i])) return false;
      return true;
    }
    bool operator()(const Conditional& c) const {
      const auto& o = std::get<Conditional>(other);
      return o.op == c.op && equal(o.cmp_lhs, c.cmp_lhs) && equal(o.cmp_rhs, c.cmp_rhs) &&
             equal(o.if_true, c.if_true) && equal(o.if_false, c.if_false);
    }
  };
  return std::visit(Visitor{b.node()}, a.node());
}

// ---------------------------------------------------------------------------
// Parser

namespace detail {

struct FunctionSig {
  const char* name;
  std::size_t arity;
};
inline constexpr FunctionSig kFunctions[] = {
    {"abs", 1}, {"sqrt", 1}, {"exp", 1}, {"log", 1}, {"min", 2}, {"max", 2},
};

inline const FunctionSig* find_function(std::string_view name) {
  for (const auto& f : kFunctions)
    if (name == f.name) return &f;
  return nullptr;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  ExprPtr parse() {
    ExprPtr e = parse_expr();
    if (pos_ < tokens_.size()) {
      throw ParseError("unexpected trailing input '" + tokens_[pos_].lexeme + "'",
                       tokens_[pos_].position);
    }
    return e;
  }

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;

  bool at_end() const { return pos_ >= tokens_.size(); }
  const Token& peek() const {
    if (at_end()) throw ParseError("unexpected end of input", end_offset());
    return tokens_[pos_];
  }
  std::size_t end_offset() const {
    return tokens_.empty() ? 0 : tokens_.back().position + tokens_.back().lexeme.size();
  }
  bool match_operator(std::string_view lex) {
    if (!at_end() && tokens_[pos_].kind == TokenKind::Operator && tokens_[pos_].lexeme == lex) {
      ++pos_;
      return true;
    }
    return false;
  }
  bool match_paren(char p) {
    if (!at_end() && tokens_[pos_].kind == TokenKind::Paren && tokens_[pos_].lexeme[0] == p) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect_paren(char p, const char* what) {
    if (!match_paren(p)) {
      throw ParseError(std::string("expected '") + p + "' " + what,
                       at_end() ? end_offset() : peek().position);
    }
  }
  void expect_comma(const char* what) {
    if (at_end() || peek().kind != TokenKind::Comma) {
      throw ParseError(std::string("expected ',' ") + what,
                       at_end() ? end_offset() : peek().position);
    }
    ++pos_;
  }

  ExprPtr parse_expr() {
    ExprPtr lhs = parse_term();
    while (!at_end() && tokens_[pos_].kind == TokenKind::Operator &&
           (tokens_[pos_].lexeme == "+" || tokens_[pos_].lexeme == "-")) {
      const BinaryOp op = tokens_[pos_].lexeme == "+" ? BinaryOp::Add : BinaryOp::Sub;
      ++pos_;
      ExprPtr rhs = parse_term();
      lhs = make_expr(Binary{op, std::move(lhs), std::move(rhs)});
    }
    return lhs;
  }

  ExprPtr parse_term() {
    ExprPtr lhs = parse_factor();
    while (!at_end() && tokens_[pos_].kind == TokenKind::Operator &&
           (tokens_[pos_].lexeme == "*" || tokens_[pos_].lexeme == "/")) {
      const BinaryOp op = tokens_[pos_].lexeme == "*" ? BinaryOp::Mul : BinaryOp::Div;
      ++pos_;
      ExprPtr rhs = parse_factor();
      lhs = make_expr(Binary{op, std::move(lhs), std::move(rhs)});
    }
    return lhs;
  }

  ExprPtr parse_factor() {
    if (match_operator("-")) return make_expr(Negate{parse_factor()});
    return parse_power();
  }

  ExprPtr parse_power() {
    ExprPtr base = parse_atom();
    if (match_operator("^")) {
      ExprPtr exponent = parse_factor();  // right-associative, accepts 2^-3
      return make_expr(Binary{BinaryOp::Pow, std::move(base), std::move(exponent)});
    }
    return base;
  }

  static CmpOp to_cmp_op(std::string_view lex, std::size_t offset) {
    if (lex == "<") return CmpOp::Lt;
    if (lex == "<=") return CmpOp::Le;
    if (lex == ">") return CmpOp::Gt;
    if (lex == ">=") return CmpOp::Ge;
    if (lex == "==") return CmpOp::Eq;
    if (lex == "!=") return CmpOp::Ne;
    throw ParseError("expected comparison operator, got '" + std::string(lex) + "'", offset);
  }

  ExprPtr parse_if() {
    // if(comparison, then, else)
    ExprPtr cmp_lhs = parse_expr();
    if (at_end() || peek().kind != TokenKind::Operator) {
      throw ParseError("expected comparison operator in condition of if",
                       at_end() ? end_offset() : peek().position);
    }
    const Token& op_tok = peek();
    const CmpOp op = to_cmp_op(op_tok.lexeme, op_tok.position);
    ++pos_;
    ExprPtr cmp_rhs = parse_expr();
    expect_comma("after condition of if");
    ExprPtr if_true = parse_expr();
    expect_comma("after first branch of if");
    ExprPtr if_false = parse_expr();
    expect_paren(')', "to close call to if");
    return make_expr(Conditional{op, std::move(cmp_lhs), std::move(cmp_rhs),
                                 std::move(if_true), std::move(if_false)});
  }

  ExprPtr parse_atom() {
    if (at_end()) throw ParseError("unexpected end of input", end_offset());
    const Token tok = peek();
    if (tok.kind == TokenKind::Number) {
      ++pos_;
      return make_constant(std::strtod(tok.lexeme.c_str(), nullptr));
    }
    if (tok.kind == TokenKind::Identifier) {
      ++pos_;
      if (match_paren('(')) {
        if (tok.lexeme == "if") return parse_if();
        const FunctionSig* sig = find_function(tok.lexeme);
        if (sig == nullptr) {
          throw ParseError("unknown function '" + tok.lexeme + "'", tok.position);
        }
        std::vector<ExprPtr> args;
        args.push_back(parse_expr());
        while (!at_end() && peek().kind == TokenKind::Comma) {
          ++pos_;
          args.push_back(parse_expr());
        }
        expect_paren(')', ("to close call to " + tok.lexeme).c_str());
        if (args.size() != sig->arity) {
          throw ParseError("function '" + tok.lexeme + "' expects " +
                               std::to_string(sig->arity) + " argument(s), got " +
                               std::to_string(args.size()),
                           tok.position);
        }
        return make_expr(Call{tok.lexeme, std::move(args)});
      }
      return make_variable(tok.lexeme);
    }
    if (tok.kind == TokenKind::Paren && tok.lexeme == "(") {
      ++pos_;
      ExprPtr inner = parse_expr();
      expect_paren(')', "to close parenthesized expression");
      return inner;
    }
    throw ParseError("unexpected token '" + tok.lexeme + "'", tok.position);
  }
};

}  // namespace detail

inline ExprPtr parse(std::vector<Token> tokens) {
  return detail::Parser(std::move(tokens)).parse();
}

inline ExprPtr parse(std::string_view source) { return parse(tokenize(source)); }

// ---------------------------------------------------------------------------
// Evaluation

struct Binding {
  std::string_view name;
  double value;
};

namespace detail {

inline double require_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw EvalError(std::string(what) + " yielded a non-finite value");
  }
  return v;
}

struct Evaluator {
  std::span<const Binding> bindings;

  double operator()(const Constant& c) const { return c.value; }
  double operator()(const Variable& v) const {
    for (const Binding& b : bindings)
      if (b.name == v.name) return b.value;
    throw EvalError("unbound variable '" + v.name + "'");
  }
  double operator()(const Negate& u) const { return -eval(*u.operand); }
  double operator()(const Binary& b) const {
    const double a = eval(*b.lhs);
    const double c = eval(*b.rhs);
    switch (b.op) {
      case BinaryOp::Add: return require_finite(a + c, "addition");
      case BinaryOp::Sub: return require_finite(a - c, "subtraction");
      case BinaryOp::Mul: return require_finite(a * c, "multiplication");
      case BinaryOp::Div: return require_finite(a / c, "division");
      case BinaryOp::Pow: {
        const bool integral_exp = c == std::trunc(c) && std::abs(c) < 9.0e15;
        if (a < 0.0 && !integral_exp) {
          throw EvalError("negative base with non-integer exponent");
        }
        return require_finite(std::pow(a, c), "exponentiation");
      }
    }
    throw EvalError("unknown binary operator");
  }
  double operator()(const Call& c) const {
    if (c.name == "abs") return std::fabs(eval(*c.args[0]));
    if (c.name == "sqrt") {
      const double a = eval(*c.args[0]);
      if (a < 0.0) throw EvalError("sqrt of negative value");
      return std::sqrt(a);
    }
    if (c.name == "exp") return require_finite(std::exp(eval(*c.args[0])), "exp");
    if (c.name == "log") {
      const double a = eval(*c.args[0]);
      if (a <= 0.0) throw EvalError("log of non-positive value");
      return require_finite(std::log(a), "log");
    }
    if (c.name == "min") return std::fmin(eval(*c.args[0]), eval(*c.args[1]));
    if (c.name == "max") return std::fmax(eval(*c.args[0]), eval(*c.args[1]));
    throw EvalError("unknown function '" + c.name + "'");
  }
  double operator()(const Conditional& c) const {
    const double a = eval(*c.cmp_lhs);
    const double b = eval(*c.cmp_rhs);
    bool selected = false;
    switch (c.op) {
      case CmpOp::Lt: selected = a < b; break;
      case CmpOp::Le: selected = a <= b; break;
      case CmpOp::Gt: selected = a > b; break;
      case CmpOp::Ge: selected = a >= b; break;
      case CmpOp::Eq: selected = a == b; break;
      case CmpOp::Ne: selected = a != b; break;
    }
    // exactly one branch is evaluated
    return selected ? eval(*c.if_true) : eval(*c.if_false);
  }

  double eval(const Expr& e) const { return std::visit(*this, e.node()); }
};

}  // namespace detail

/// Evaluates `e` under `bindings`. Pure: identical inputs give bit-identical
/// results. Any non-finite intermediate raises EvalError, so a successful
/// evaluation always returns a finite double.
inline double evaluate(const Expr& e, std::span<const Binding> bindings) {
  return detail::Evaluator{bindings}.eval(e);
}

inline double evaluate(const Expr& e, std::initializer_list<Binding> bindings) {
  return evaluate(e, std::span<const Binding>(bindings.begin(), bindings.size()));
}

// ---------------------------------------------------------------------------
// Introspection

inline void collect_free_variables(const Expr& e, std::set<std::string>& out) {
  struct Visitor {
    std::set<std::string>& out;
    void operator()(const Constant&) const {}
    void operator()(const Variable& v) const { out.insert(v.name); }
    void operator()(const Negate& u) const { collect_free_variables(*u.operand, out); }
    void operator()(const Binary& b) const {
      collect_free_variables(*b.lhs, out);
      collect_free_variables(*b.rhs, out);
    }
    void operator()(const Call& c) const {
      for (const auto& a : c.args) collect_free_variables(*a, out);
    }
    void operator()(const Conditional& c) const {
      collect_free_variables(*c.cmp_lhs, out);
      collect_free_variables(*c.cmp_rhs, out);
      collect_free_variables(*c.if_true, out);
      collect_free_variables(*c.if_false, out);
    }
  };
  std::visit(Visitor{out}, e.node());
}

inline std::set<std::string> free_variables(const Expr& e) {
  std::set<std::string> out;
  collect_free_variables(e, out);
  return out;
}

// ---------------------------------------------------------------------------
// Printing

inline std::string format_double(double v) {
  if (v == 0.0) v = 0.0;  // normalize -0
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

// Precedence levels used by the printer: additive 1, multiplicative 2,
// unary minus 3, power 4, atom 5.
inline int print_level(const Expr& e) {
  struct Visitor {
    int operator()(const Constant&) const { return 5; }
    int operator()(const Variable&) const { return 5; }
    int operator()(const Negate&) const { return 3; }
    int operator()(const Binary& b) const {
      switch (b.op) {
        case BinaryOp::Add:
        case BinaryOp::Sub: return 1;
        case BinaryOp::Mul:
        case BinaryOp::Div: return 2;
        case BinaryOp::Pow: return 4;
      }
      return 5;
    }
    int operator()(const Call&) const { return 5; }
    int operator()(const Conditional&) const { return 5; }
  };
  return std::visit(Visitor{}, e.node());
}

inline void print_expr(const Expr& e, std::string& out);

inline void print_child(const Expr& child, int min_level, std::string& out) {
  if (print_level(child) < min_level) {
    out += '(';
    print_expr(child, out);
    out += ')';
  } else {
    print_expr(child, out);
  }
}

inline const char* cmp_lexeme(CmpOp op) {
  switch (op) {
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
    case CmpOp::Eq: return "==";
    case CmpOp::Ne: return "!=";
  }
  return "?";
}

inline void print_expr(const Expr& e, std::string& out) {
  struct Visitor {
    std::string& out;
    void operator()(const Constant& c) const { out += format_double(c.value); }
    void operator()(const Variable& v) const { out += v.name; }
    void operator()(const Negate& u) const {
      out += '-';
      print_child(*u.operand, 3, out);
    }
    void operator()(const Binary& b) const {
      switch (b.op) {
        case BinaryOp::Add:
          print_child(*b.lhs, 1, out); out += '+'; print_child(*b.rhs, 2, out); break;
        case BinaryOp::Sub:
          print_child(*b.lhs, 1, out); out += '-'; print_child(*b.rhs, 2, out); break;
        case BinaryOp::Mul:
          print_child(*b.lhs, 2, out); out += '*'; print_child(*b.rhs, 3, out); break;
        case BinaryOp::Div:
          print_child(*b.lhs, 2, out); out += '/'; print_child(*b.rhs, 3, out); break;
        case BinaryOp::Pow:
          print_child(*b.lhs, 5, out); out += '^'; print_child(*b.rhs, 3, out); break;
      }
    }
    void operator()(const Call& c) const {
      out += c.name;
      out += '(';
      for (std::size_t i = 0; i < c.args.size(); ++i) {
        if (i > 0) out += ", ";
        print_expr(*c.args[i], out);
      }
      out += ')';
    }
    void operator()(const Conditional& c) const {
      out += "if(";
      print_expr(*c.cmp_lhs, out);
      out += ' ';
      out += cmp_lexeme(c.op);
      out += ' ';
      print_expr(*c.cmp_rhs, out);
      out += ", ";
      print_expr(*c.if_true, out);
      out += ", ";
      print_expr(*c.if_false, out);
      out += ')';
    }
  };
  std::visit(Visitor{out}, e.node());
}

}  // namespace detail

/// Renders the expression so that re-parsing the result yields a structurally
/// identical tree (constants are printed with round-trip precision).
inline std::string to_string(const Expr& e) {
  std::string out;
  detail::print_expr(e, out);
  return out;
}

}  // namespace permet
