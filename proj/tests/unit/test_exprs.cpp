#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "btt/exprs.hpp"
#include "support/expr_gen.hpp"

using namespace btt;

namespace {

Code error_code(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return Code::RuntimeError;
}

Value eval(const std::string& text, const Memory& m = {}) { return eval_expr(*parse_expr(text), m); }

std::string reprint(const std::string& text) { return print_expr(*parse_expr(text)); }

}  // namespace

TEST(ParseExpr, Examples) {
  auto e = parse_expr("battery < 20");
  auto expected = Expr::binary(BinaryOp::Lt, Expr::variable("battery"), Expr::literal(Value(20)));
  EXPECT_TRUE(*e == *expected);

  auto s = parse_expr("__STATE__/goto == SUCCESS");
  auto s_expected = Expr::binary(BinaryOp::Eq, Expr::variable("__STATE__/goto"),
                                 Expr::literal(Value(ReturnState::Success)));
  EXPECT_TRUE(*s == *s_expected);
}

TEST(ParseExpr, SyntaxErrorsCarryOffset) {
  try {
    parse_expr("a == ");
    FAIL();
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.code(), Code::ExprSyntax);
    EXPECT_EQ(e.offset(), 5u);
  }
  EXPECT_EQ(error_code([] { parse_expr("x = 1"); }), Code::ExprSyntax);
  EXPECT_EQ(error_code([] { parse_expr(""); }), Code::ExprSyntax);
  EXPECT_EQ(error_code([] { parse_expr("(a"); }), Code::ExprSyntax);
  EXPECT_EQ(error_code([] { parse_expr("a b"); }), Code::ExprSyntax);
  EXPECT_EQ(error_code([] { parse_expr("'open"); }), Code::ExprSyntax);
  EXPECT_EQ(error_code([] { parse_expr("1 < 2 < 3"); }), Code::ExprSyntax);
  EXPECT_EQ(error_code([] { parse_expr("a == b == c"); }), Code::ExprSyntax);
  EXPECT_EQ(error_code([] { parse_expr("99999999999999999999"); }), Code::ExprSyntax);
  EXPECT_EQ(error_code([] { parse_expr("#"); }), Code::ExprSyntax);
}

TEST(ParseExpr, DeepNestingIsBounded) {
  std::string deep(10000, '(');
  EXPECT_EQ(error_code([&] { parse_expr(deep + "1" + std::string(10000, ')')); }), Code::ExprSyntax);
  std::string nots(10000, '!');
  EXPECT_EQ(error_code([&] { parse_expr(nots + "true"); }), Code::ExprSyntax);
}

TEST(ParseExpr, Precedence) {
  EXPECT_EQ(eval("1 + 2 * 3"), Value(7));
  EXPECT_EQ(eval("(1 + 2) * 3"), Value(9));
  EXPECT_EQ(eval("10 - 4 - 3"), Value(3));
  EXPECT_EQ(eval("12 / 3 / 2"), Value(2));
  EXPECT_EQ(eval("!false && false"), Value(false));
  EXPECT_EQ(eval("true || false && false"), Value(true));
  EXPECT_EQ(eval("1 + 1 == 2 && 3 > 2"), Value(true));
  EXPECT_EQ(eval("-2 * 3"), Value(-6));
  EXPECT_EQ(eval("- -2"), Value(2));
}

TEST(ParseAssignment, Forms) {
  auto a = parse_assignment("count := count + 1");
  EXPECT_EQ(a.key, "count");
  EXPECT_EQ(print_expr(*a.value), "count + 1");
  auto b = parse_assignment("__STATE__/x := EMPTY");
  EXPECT_EQ(b.key, "__STATE__/x");
  EXPECT_EQ(error_code([] { parse_assignment("count = 1"); }), Code::ExprSyntax);
  EXPECT_EQ(error_code([] { parse_assignment("1 := 2"); }), Code::ExprSyntax);
  EXPECT_EQ(error_code([] { parse_assignment("x := "); }), Code::ExprSyntax);
}

TEST(PrintExpr, MinimalParentheses) {
  EXPECT_EQ(reprint("(a + b) * c"), "(a + b) * c");
  EXPECT_EQ(reprint("a + (b * c)"), "a + b * c");
  EXPECT_EQ(reprint("a - (b - c)"), "a - (b - c)");
  EXPECT_EQ(reprint("(a - b) - c"), "a - b - c");
  EXPECT_EQ(reprint("!(a && b)"), "!(a && b)");
  EXPECT_EQ(reprint("-(-a)"), "--a");
  EXPECT_EQ(reprint("(a == b) == c").empty(), false);
  EXPECT_EQ(reprint("'it\\'s'"), "'it\\'s'");
  EXPECT_EQ(reprint("2.50"), "2.5");
}

TEST(PrintExpr, ComparisonChainsKeepParentheses) {
  auto e = parse_expr("(a == b) == c");
  EXPECT_EQ(print_expr(*e), "(a == b) == c");
  EXPECT_TRUE(*parse_expr(print_expr(*e)) == *e);
}

TEST(PrintExpr, RoundTripProperty) {
  support::ExprGen gen(7);
  for (int i = 0; i < 3000; ++i) {
    auto e = gen.make(6);
    std::string text = print_expr(*e);
    ExprPtr back;
    ASSERT_NO_THROW(back = parse_expr(text)) << text;
    EXPECT_TRUE(*back == *e) << text;
  }
}

TEST(EvalExpr, Arithmetic) {
  EXPECT_EQ(eval("7 / 2"), Value(3));
  EXPECT_EQ(eval("-7 / 2"), Value(-3));
  EXPECT_EQ(eval("7 / 2.0"), Value(3.5));
  EXPECT_EQ(eval("1 + 0.5"), Value(1.5));
  EXPECT_EQ(eval("9223372036854775807 + 1"), Value(std::numeric_limits<std::int64_t>::min()));
  EXPECT_EQ(eval("-9223372036854775807 - 1 - 1"), Value(std::numeric_limits<std::int64_t>::max()));
  EXPECT_EQ(error_code([] { eval("1 / 0"); }), Code::DivisionByZero);
  EXPECT_EQ(error_code([] { eval("1.0 / 0.0"); }), Code::DivisionByZero);
  EXPECT_EQ(error_code([] { eval("1 + true"); }), Code::TypeError);
  EXPECT_EQ(error_code([] { eval("'a' + 'b'"); }), Code::TypeError);
  EXPECT_EQ(error_code([] { eval("-'a'"); }), Code::TypeError);
  EXPECT_EQ(error_code([] { eval("!1"); }), Code::TypeError);
}

TEST(EvalExpr, IntMinDividedByMinusOneWraps) {
  Memory m;
  m.set("lo", Value(std::numeric_limits<std::int64_t>::min()));
  EXPECT_EQ(eval("lo / -1", m), Value(std::numeric_limits<std::int64_t>::min()));
}

TEST(EvalExpr, ComparisonAndEquality) {
  EXPECT_EQ(eval("1 == 1.0"), Value(false));
  EXPECT_EQ(eval("1 != 1.0"), Value(true));
  EXPECT_EQ(eval("1 < 1.5"), Value(true));
  EXPECT_EQ(eval("'a' == 'a'"), Value(true));
  EXPECT_EQ(eval("SUCCESS == 'SUCCESS'"), Value(false));
  EXPECT_EQ(error_code([] { eval("'a' < 'b'"); }), Code::TypeError);
  EXPECT_EQ(error_code([] { eval("SUCCESS < FAILURE"); }), Code::TypeError);
  EXPECT_EQ(error_code([] { eval("true < false"); }), Code::TypeError);
}

TEST(EvalExpr, StatePairs) {
  const ReturnState all[] = {ReturnState::Success, ReturnState::Failure, ReturnState::Running,
                             ReturnState::Empty};
  int pairs = 0;
  for (ReturnState a : all) {
    for (ReturnState b : all) {
      Memory m;
      m.set("__STATE__/n", Value(a));
      std::string text = "__STATE__/n == " + std::string(state_name(b));
      EXPECT_EQ(eval(text, m), Value(a == b)) << text;
      EXPECT_EQ(eval("__STATE__/n != " + std::string(state_name(b)), m), Value(a != b));
      ++pairs;
    }
  }
  EXPECT_EQ(pairs, 16);
}

TEST(EvalExpr, ShortCircuit) {
  EXPECT_EQ(eval("false && missing"), Value(false));
  EXPECT_EQ(eval("true || missing"), Value(true));
  EXPECT_EQ(eval("false && 1 / 0 == 1"), Value(false));
  EXPECT_EQ(error_code([] { eval("true && missing"); }), Code::UndefinedVariable);
  EXPECT_EQ(error_code([] { eval("false || missing"); }), Code::UndefinedVariable);
  EXPECT_EQ(error_code([] { eval("1 && true"); }), Code::TypeError);
  EXPECT_EQ(error_code([] { eval("true && 1"); }), Code::TypeError);
}

TEST(EvalExpr, UndefinedVariableNamesKey) {
  try {
    eval("battery < 20");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Code::UndefinedVariable);
    EXPECT_EQ(e.diagnostics().front().subject, "battery");
  }
  Memory m;
  m.set("battery", Value(15));
  EXPECT_EQ(eval("battery < 20", m), Value(true));
}

TEST(EvalExpr, IdentifiersWithDashes) {
  Memory m;
  m.set("a-b", Value(5));
  m.set("a", Value(1));
  m.set("b", Value(1));
  EXPECT_EQ(eval("a-b", m), Value(5));
  EXPECT_EQ(eval("a - b", m), Value(0));
  EXPECT_EQ(eval("3-1"), Value(2));
}

TEST(EvalStateExpr, RequiresState) {
  Memory m;
  m.set("__STATE__/goto", Value(ReturnState::Running));
  EXPECT_EQ(eval_state_expr(*parse_expr("__STATE__/goto"), m), ReturnState::Running);
  EXPECT_EQ(eval_state_expr(*parse_expr("EMPTY"), m), ReturnState::Empty);
  EXPECT_EQ(error_code([&] { eval_state_expr(*parse_expr("1"), m); }), Code::NotAState);
  EXPECT_EQ(error_code([&] { eval_state_expr(*parse_expr("'SUCCESS'"), m); }), Code::NotAState);
}

TEST(EvalCondition, RequiresBoolean) {
  Memory m;
  EXPECT_TRUE(eval_condition(*parse_expr("1 < 2"), m));
  EXPECT_EQ(error_code([&] { eval_condition(*parse_expr("1"), m); }), Code::TypeError);
}

TEST(EvalExpr, FloatLiterals) {
  EXPECT_EQ(eval("1e3"), Value(1000.0));
  EXPECT_EQ(eval("0.1 + 0.2").tag(), Value::Tag::Float);
  EXPECT_EQ(reprint("1e300"), print_expr(*Expr::literal(Value(1e300))));
  EXPECT_EQ(error_code([] { eval("1e999"); }), Code::ExprSyntax);
}
