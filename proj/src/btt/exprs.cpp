#include "btt/exprs.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <vector>

namespace btt {

std::string_view op_symbol(UnaryOp op) { return op == UnaryOp::Not ? "!" : "-"; }

std::string_view op_symbol(BinaryOp op) {
  switch (op) {
    case BinaryOp::Or: return "||";
    case BinaryOp::And: return "&&";
    case BinaryOp::Eq: return "==";
    case BinaryOp::Ne: return "!=";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
  }
  return "?";
}

ExprPtr Expr::literal(Value v) { return std::make_shared<Expr>(Expr{Literal{std::move(v)}}); }
ExprPtr Expr::variable(std::string key) {
  return std::make_shared<Expr>(Expr{Variable{std::move(key)}});
}
ExprPtr Expr::unary(UnaryOp op, ExprPtr operand) {
  return std::make_shared<Expr>(Expr{Unary{op, std::move(operand)}});
}
ExprPtr Expr::binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs) {
  return std::make_shared<Expr>(Expr{Binary{op, std::move(lhs), std::move(rhs)}});
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  if (auto* x = std::get_if<Expr::Literal>(&a.node))
    return x->value == std::get<Expr::Literal>(b.node).value;
  if (auto* x = std::get_if<Expr::Variable>(&a.node))
    return x->key == std::get<Expr::Variable>(b.node).key;
  if (auto* x = std::get_if<Expr::Unary>(&a.node)) {
    const auto& y = std::get<Expr::Unary>(b.node);
    return x->op == y.op && *x->operand == *y.operand;
  }
  const auto& x = std::get<Expr::Binary>(a.node);
  const auto& y = std::get<Expr::Binary>(b.node);
  return x.op == y.op && *x.lhs == *y.lhs && *x.rhs == *y.rhs;
}

SyntaxError::SyntaxError(std::size_t offset, std::string message)
    : Error(Code::ExprSyntax, {}, "at offset " + std::to_string(offset) + ": " + message),
      offset_(offset) {}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

namespace {

enum class Tok { End, Number, Text, Ident, Literal, Op, LParen, RParen, Assign };

struct Token {
  Tok kind = Tok::End;
  std::size_t offset = 0;
  std::string text;  // identifier, operator symbol, or raw text literal
  Value value;       // Number, Text and Literal tokens
};

bool ident_start(char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; }
bool ident_char(char c) {
  return ident_start(c) || (c >= '0' && c <= '9') || c == '/' || c == '.' || c == '-';
}
bool digit(char c) { return c >= '0' && c <= '9'; }

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (true) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\n' || s[i] == '\r')) ++i;
    Token t;
    t.offset = i;
    if (i == s.size()) {
      out.push_back(std::move(t));
      return out;
    }
    char c = s[i];
    if (digit(c)) {
      std::size_t start = i;
      bool is_float = false;
      while (i < s.size() && digit(s[i])) ++i;
      if (i + 1 < s.size() && s[i] == '.' && digit(s[i + 1])) {
        is_float = true;
        ++i;
        while (i < s.size() && digit(s[i])) ++i;
      }
      if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < s.size() && (s[j] == '+' || s[j] == '-')) ++j;
        if (j < s.size() && digit(s[j])) {
          is_float = true;
          i = j;
          while (i < s.size() && digit(s[i])) ++i;
        }
      }
      std::string_view lexeme = s.substr(start, i - start);
      t.kind = Tok::Number;
      if (is_float) {
        double d = 0;
        auto [p, ec] = std::from_chars(lexeme.data(), lexeme.data() + lexeme.size(), d);
        if (ec != std::errc()) throw SyntaxError(start, "float literal out of range");
        t.value = Value(d);
      } else {
        std::int64_t v = 0;
        auto [p, ec] = std::from_chars(lexeme.data(), lexeme.data() + lexeme.size(), v);
        if (ec != std::errc()) throw SyntaxError(start, "integer literal out of range");
        t.value = Value(v);
      }
    } else if (ident_start(c)) {
      std::size_t start = i;
      while (i < s.size() && ident_char(s[i])) ++i;
      t.text = std::string(s.substr(start, i - start));
      if (t.text == "true" || t.text == "false") {
        t.kind = Tok::Literal;
        t.value = Value(t.text == "true");
      } else if (auto st = parse_state(t.text)) {
        t.kind = Tok::Literal;
        t.value = Value(*st);
      } else {
        t.kind = Tok::Ident;
      }
    } else if (c == '\'') {
      std::string text;
      ++i;
      while (true) {
        if (i == s.size()) throw SyntaxError(t.offset, "unterminated text literal");
        if (s[i] == '\'') {
          ++i;
          break;
        }
        if (s[i] == '\\') {
          if (i + 1 == s.size() || (s[i + 1] != '\'' && s[i + 1] != '\\'))
            throw SyntaxError(i, "invalid escape in text literal");
          ++i;
        }
        text += s[i++];
      }
      t.kind = Tok::Text;
      t.value = Value(std::move(text));
    } else {
      auto two = s.substr(i, 2);
      if (two == "||" || two == "&&" || two == "==" || two == "!=" || two == "<=" || two == ">=") {
        t.kind = Tok::Op;
        t.text = std::string(two);
        i += 2;
      } else if (two == ":=") {
        t.kind = Tok::Assign;
        t.text = ":=";
        i += 2;
      } else if (c == '<' || c == '>' || c == '+' || c == '-' || c == '*' || c == '/' ||
                 c == '!') {
        t.kind = Tok::Op;
        t.text = std::string(1, c);
        ++i;
      } else if (c == '(') {
        t.kind = Tok::LParen;
        ++i;
      } else if (c == ')') {
        t.kind = Tok::RParen;
        ++i;
      } else {
        throw SyntaxError(i, std::string("unexpected character '") + c + "'");
      }
    }
    out.push_back(std::move(t));
  }
}

// ---------------------------------------------------------------------------
// Recursive-descent parser
// ---------------------------------------------------------------------------

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  ExprPtr expression() { return parse_or(); }

  const Token& peek() const { return toks_[pos_]; }
  Token take() { return toks_[pos_++]; }
  bool at_end() const { return peek().kind == Tok::End; }

  [[noreturn]] void unexpected() const {
    const Token& t = peek();
    if (t.kind == Tok::End) throw SyntaxError(t.offset, "unexpected end of expression");
    throw SyntaxError(t.offset, "unexpected token");
  }

 private:
  static constexpr int kMaxDepth = 256;

  bool accept_op(std::string_view op) {
    if (peek().kind == Tok::Op && peek().text == op) {
      ++pos_;
      return true;
    }
    return false;
  }

  ExprPtr parse_or() {
    ExprPtr lhs = parse_and();
    while (accept_op("||")) lhs = Expr::binary(BinaryOp::Or, lhs, parse_and());
    return lhs;
  }

  ExprPtr parse_and() {
    ExprPtr lhs = parse_cmp();
    while (accept_op("&&")) lhs = Expr::binary(BinaryOp::And, lhs, parse_cmp());
    return lhs;
  }

  ExprPtr parse_cmp() {
    ExprPtr lhs = parse_add();
    static constexpr std::pair<std::string_view, BinaryOp> kOps[] = {
        {"==", BinaryOp::Eq}, {"!=", BinaryOp::Ne}, {"<", BinaryOp::Lt},
        {"<=", BinaryOp::Le}, {">", BinaryOp::Gt}, {">=", BinaryOp::Ge}};
    for (auto [sym, op] : kOps)
      if (accept_op(sym)) return Expr::binary(op, lhs, parse_add());
    return lhs;
  }

  ExprPtr parse_add() {
    ExprPtr lhs = parse_mul();
    while (true) {
      if (accept_op("+"))
        lhs = Expr::binary(BinaryOp::Add, lhs, parse_mul());
      else if (accept_op("-"))
        lhs = Expr::binary(BinaryOp::Sub, lhs, parse_mul());
      else
        return lhs;
    }
  }

  ExprPtr parse_mul() {
    ExprPtr lhs = parse_unary();
    while (true) {
      if (accept_op("*"))
        lhs = Expr::binary(BinaryOp::Mul, lhs, parse_unary());
      else if (accept_op("/"))
        lhs = Expr::binary(BinaryOp::Div, lhs, parse_unary());
      else
        return lhs;
    }
  }

  ExprPtr parse_unary() {
    DepthGuard guard(*this);
    if (accept_op("!")) return Expr::unary(UnaryOp::Not, parse_unary());
    if (accept_op("-")) return Expr::unary(UnaryOp::Negate, parse_unary());
    return parse_atom();
  }

  ExprPtr parse_atom() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Number:
      case Tok::Text:
      case Tok::Literal:
        return Expr::literal(take().value);
      case Tok::Ident:
        return Expr::variable(take().text);
      case Tok::LParen: {
        ++pos_;
        ExprPtr inner = parse_or();
        if (peek().kind != Tok::RParen) unexpected();
        ++pos_;
        return inner;
      }
      default:
        unexpected();
    }
  }

  struct DepthGuard {
    explicit DepthGuard(Parser& p) : p_(p) {
      if (++p_.depth_ > kMaxDepth) throw SyntaxError(p_.peek().offset, "expression nests too deeply");
    }
    ~DepthGuard() { --p_.depth_; }
    Parser& p_;
  };

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  int depth_ = 0;
};

// ---------------------------------------------------------------------------
// Printer
// ---------------------------------------------------------------------------

int precedence(BinaryOp op) {
  switch (op) {
    case BinaryOp::Or: return 1;
    case BinaryOp::And: return 2;
    case BinaryOp::Eq:
    case BinaryOp::Ne:
    case BinaryOp::Lt:
    case BinaryOp::Le:
    case BinaryOp::Gt:
    case BinaryOp::Ge:
      return 3;
    case BinaryOp::Add:
    case BinaryOp::Sub:
      return 4;
    case BinaryOp::Mul:
    case BinaryOp::Div:
      return 5;
  }
  return 0;
}

constexpr int kAtomPrecedence = 7;

int precedence(const Expr& e) {
  if (auto* b = std::get_if<Expr::Binary>(&e.node)) return precedence(b->op);
  if (std::holds_alternative<Expr::Unary>(e.node)) return 6;
  return kAtomPrecedence;
}

void print_into(std::string& out, const Expr& e);

void print_wrapped(std::string& out, const Expr& e, bool parens) {
  if (parens) out += '(';
  print_into(out, e);
  if (parens) out += ')';
}

void print_into(std::string& out, const Expr& e) {
  if (auto* lit = std::get_if<Expr::Literal>(&e.node)) {
    out += render_literal(lit->value);
  } else if (auto* var = std::get_if<Expr::Variable>(&e.node)) {
    out += var->key;
  } else if (auto* un = std::get_if<Expr::Unary>(&e.node)) {
    out += op_symbol(un->op);
    print_wrapped(out, *un->operand, precedence(*un->operand) < 6);
  } else {
    const auto& bin = std::get<Expr::Binary>(e.node);
    int p = precedence(bin.op);
    int lp = precedence(*bin.lhs);
    print_wrapped(out, *bin.lhs, lp < p || (p == 3 && lp == 3));
    out += ' ';
    out += op_symbol(bin.op);
    out += ' ';
    print_wrapped(out, *bin.rhs, precedence(*bin.rhs) <= p);
  }
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

[[noreturn]] void type_error(std::string_view op, const Value& a) {
  throw Error(Code::TypeError, {},
              "operator '" + std::string(op) + "' not defined for " + std::string(tag_name(a.tag())));
}

[[noreturn]] void type_error(std::string_view op, const Value& a, const Value& b) {
  throw Error(Code::TypeError, {},
              "operator '" + std::string(op) + "' not defined for " +
                  std::string(tag_name(a.tag())) + " and " + std::string(tag_name(b.tag())));
}

std::int64_t wrap(std::uint64_t v) { return static_cast<std::int64_t>(v); }

Value arithmetic(BinaryOp op, const Value& a, const Value& b) {
  if (!a.is_numeric() || !b.is_numeric()) type_error(op_symbol(op), a, b);
  if (a.tag() == Value::Tag::Integer && b.tag() == Value::Tag::Integer) {
    auto x = static_cast<std::uint64_t>(a.as_int());
    auto y = static_cast<std::uint64_t>(b.as_int());
    switch (op) {
      case BinaryOp::Add: return Value(wrap(x + y));
      case BinaryOp::Sub: return Value(wrap(x - y));
      case BinaryOp::Mul: return Value(wrap(x * y));
      default: {
        if (b.as_int() == 0) throw Error(Code::DivisionByZero, {}, "integer division by zero");
        if (a.as_int() == std::numeric_limits<std::int64_t>::min() && b.as_int() == -1)
          return Value(a.as_int());
        return Value(a.as_int() / b.as_int());
      }
    }
  }
  double x = a.to_double(), y = b.to_double();
  switch (op) {
    case BinaryOp::Add: return Value(x + y);
    case BinaryOp::Sub: return Value(x - y);
    case BinaryOp::Mul: return Value(x * y);
    default:
      if (y == 0.0) throw Error(Code::DivisionByZero, {}, "float division by zero");
      return Value(x / y);
  }
}

bool ordering(BinaryOp op, const Value& a, const Value& b) {
  if (!a.is_numeric() || !b.is_numeric()) type_error(op_symbol(op), a, b);
  auto cmp = [&](auto x, auto y) {
    switch (op) {
      case BinaryOp::Lt: return x < y;
      case BinaryOp::Le: return x <= y;
      case BinaryOp::Gt: return x > y;
      default: return x >= y;
    }
  };
  if (a.tag() == Value::Tag::Integer && b.tag() == Value::Tag::Integer)
    return cmp(a.as_int(), b.as_int());
  return cmp(a.to_double(), b.to_double());
}

bool require_bool(std::string_view op, const Value& v) {
  if (v.tag() != Value::Tag::Boolean) type_error(op, v);
  return v.as_bool();
}

}  // namespace

ExprPtr parse_expr(std::string_view text) {
  Parser p(lex(text));
  ExprPtr e = p.expression();
  if (!p.at_end()) p.unexpected();
  return e;
}

Assignment parse_assignment(std::string_view text) {
  Parser p(lex(text));
  Token key = p.peek();
  if (key.kind != Tok::Ident) p.unexpected();
  p.take();
  if (p.peek().kind != Tok::Assign) p.unexpected();
  p.take();
  ExprPtr value = p.expression();
  if (!p.at_end()) p.unexpected();
  return {key.text, std::move(value)};
}

std::string print_expr(const Expr& e) {
  std::string out;
  print_into(out, e);
  return out;
}

Value eval_expr(const Expr& e, const Memory& m) {
  if (auto* lit = std::get_if<Expr::Literal>(&e.node)) return lit->value;
  if (auto* var = std::get_if<Expr::Variable>(&e.node)) {
    const Value* v = m.get(var->key);
    if (!v) throw Error(Code::UndefinedVariable, var->key, "variable is not defined");
    return *v;
  }
  if (auto* un = std::get_if<Expr::Unary>(&e.node)) {
    Value v = eval_expr(*un->operand, m);
    if (un->op == UnaryOp::Not) return Value(!require_bool("!", v));
    if (v.tag() == Value::Tag::Integer)
      return Value(wrap(0u - static_cast<std::uint64_t>(v.as_int())));
    if (v.tag() == Value::Tag::Float) return Value(-v.as_float());
    type_error("-", v);
  }
  const auto& bin = std::get<Expr::Binary>(e.node);
  switch (bin.op) {
    case BinaryOp::Or: {
      if (require_bool("||", eval_expr(*bin.lhs, m))) return Value(true);
      return Value(require_bool("||", eval_expr(*bin.rhs, m)));
    }
    case BinaryOp::And: {
      if (!require_bool("&&", eval_expr(*bin.lhs, m))) return Value(false);
      return Value(require_bool("&&", eval_expr(*bin.rhs, m)));
    }
    default:
      break;
  }
  Value a = eval_expr(*bin.lhs, m);
  Value b = eval_expr(*bin.rhs, m);
  switch (bin.op) {
    case BinaryOp::Eq: return Value(a == b);
    case BinaryOp::Ne: return Value(!(a == b));
    case BinaryOp::Lt:
    case BinaryOp::Le:
    case BinaryOp::Gt:
    case BinaryOp::Ge:
      return Value(ordering(bin.op, a, b));
    default:
      return arithmetic(bin.op, a, b);
  }
}

ReturnState eval_state_expr(const Expr& e, const Memory& m) {
  Value v = eval_expr(e, m);
  if (v.tag() != Value::Tag::State)
    throw Error(Code::NotAState, {},
                "expected a return state, got " + std::string(tag_name(v.tag())) + " " +
                    render_literal(v));
  return v.as_state();
}

bool eval_condition(const Expr& e, const Memory& m) {
  Value v = eval_expr(e, m);
  if (v.tag() != Value::Tag::Boolean)
    throw Error(Code::TypeError, {},
                "condition must evaluate to a boolean, got " + std::string(tag_name(v.tag())));
  return v.as_bool();
}

}  // namespace btt
