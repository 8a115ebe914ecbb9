#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <variant>

#include "btt/memory.hpp"
#include "btt/model.hpp"

namespace btt {

enum class UnaryOp { Not, Negate };

enum class BinaryOp { Or, And, Eq, Ne, Lt, Le, Gt, Ge, Add, Sub, Mul, Div };

std::string_view op_symbol(UnaryOp op);
std::string_view op_symbol(BinaryOp op);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Immutable expression tree. Children are shared, so copies are cheap.
struct Expr {
  struct Literal {
    Value value;
  };
  struct Variable {
    std::string key;
  };
  struct Unary {
    UnaryOp op;
    ExprPtr operand;
  };
  struct Binary {
    BinaryOp op;
    ExprPtr lhs;
    ExprPtr rhs;
  };

  std::variant<Literal, Variable, Unary, Binary> node;

  static ExprPtr literal(Value v);
  static ExprPtr variable(std::string key);
  static ExprPtr unary(UnaryOp op, ExprPtr operand);
  static ExprPtr binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs);
};

/// Structural equality.
bool operator==(const Expr& a, const Expr& b);

struct Assignment {
  std::string key;
  ExprPtr value;
};

/// EXPR_SYNTAX with the 0-based character offset of the offending token.
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t offset, std::string message);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

ExprPtr parse_expr(std::string_view text);

/// `<key> := <expr>`.
Assignment parse_assignment(std::string_view text);

/// Minimal-parentheses rendering; parse_expr(print_expr(e)) == e.
std::string print_expr(const Expr& e);

/// Throws UNDEFINED_VARIABLE, TYPE_ERROR or DIVISION_BY_ZERO.
Value eval_expr(const Expr& e, const Memory& m);

/// As eval_expr, plus NOT_A_STATE when the result is not a return state.
ReturnState eval_state_expr(const Expr& e, const Memory& m);

/// Evaluates a condition guard; the result must be a boolean (TYPE_ERROR otherwise).
bool eval_condition(const Expr& e, const Memory& m);

}  // namespace btt
