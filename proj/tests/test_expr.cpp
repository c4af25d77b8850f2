#include <limits>

#include "btflow/expr.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace btflow;

namespace {

Expr ex(const std::string& text)
{
  const BtDef def = testsupport::parse_ok("behaviortree T { condition \"c\" {= @expr " + text + " =} }");
  return std::get<ExprBody>(def.root.body).condition;
}

using Env = std::map<std::string, Slot, std::less<>>;

Value ev(const std::string& text, const Env& env = {}) { return eval_expr(ex(text), env); }

EvalErrorCode err_of(const std::string& text, const Env& env = {})
{
  try {
    ev(text, env);
  } catch (const EvalError& e) {
    return e.code();
  }
  FAIL("expected an evaluation error for " << text);
  return EvalErrorCode::TypeMismatch;
}

}  // namespace

TEST_SUITE("expr")
{
  TEST_CASE("integer arithmetic and precedence")
  {
    CHECK(ev("1 + 2 * 3") == Value(std::int64_t{7}));
    CHECK(ev("(1 + 2) * 3") == Value(std::int64_t{9}));
    CHECK(ev("7 / 2") == Value(std::int64_t{3}));
    CHECK(ev("-7 / 2") == Value(std::int64_t{-3}));
    CHECK(ev("-7 % 3") == Value(std::int64_t{-1}));
    CHECK(ev("10 - 4 - 3") == Value(std::int64_t{3}));
    CHECK(ev("-(2 + 3)") == Value(std::int64_t{-5}));
  }

  TEST_CASE("integer overflow wraps")
  {
    const Env env{{"big", Value(std::numeric_limits<std::int64_t>::max())}};
    CHECK(ev("big + 1", env) == Value(std::numeric_limits<std::int64_t>::min()));
    const Env env2{{"small", Value(std::numeric_limits<std::int64_t>::min())}};
    CHECK(ev("small / -1", env2) == Value(std::numeric_limits<std::int64_t>::min()));
    CHECK(ev("small % -1", env2) == Value(std::int64_t{0}));
  }

  TEST_CASE("int and float promote")
  {
    CHECK(ev("1 + 0.5") == Value(1.5));
    CHECK(ev("3 / 2.0") == Value(1.5));
    CHECK(ev("2 < 2.5") == Value(true));
    CHECK(ev("2 == 2.0") == Value(true));
  }

  TEST_CASE("strings")
  {
    CHECK(ev("\"ab\" + \"cd\"") == Value(std::string("abcd")));
    CHECK(ev("\"a\" < \"b\"") == Value(true));
    CHECK(ev("\"x\" == \"x\"") == Value(true));
    CHECK(err_of("\"a\" + 1") == EvalErrorCode::TypeMismatch);
  }

  TEST_CASE("logic short-circuits")
  {
    const Env env{{"x", std::nullopt}};
    CHECK(ev("false && x > 1", env) == Value(false));
    CHECK(ev("true || x > 1", env) == Value(true));
    CHECK(ev("present(x) ? x : 5", env) == Value(std::int64_t{5}));
    CHECK(ev("!present(x)", env) == Value(true));
  }

  TEST_CASE("errors")
  {
    const Env env{{"x", std::nullopt}, {"b", Value(true)}};
    CHECK(err_of("x + 1", env) == EvalErrorCode::ReadOfAbsent);
    CHECK(err_of("1 / 0") == EvalErrorCode::DivisionByZero);
    CHECK(err_of("1 % 0") == EvalErrorCode::DivisionByZero);
    CHECK(err_of("y") == EvalErrorCode::UnboundIdentifier);
    CHECK(err_of("b + 1", env) == EvalErrorCode::TypeMismatch);
    CHECK(err_of("1 && true") == EvalErrorCode::TypeMismatch);
    CHECK(err_of("1 ? 2 : 3") == EvalErrorCode::TypeMismatch);
  }

  TEST_CASE("float division by zero follows IEEE")
  {
    const Value v = ev("1.0 / 0");
    REQUIRE(std::holds_alternative<double>(v));
    CHECK(std::get<double>(v) == std::numeric_limits<double>::infinity());
  }

  TEST_CASE("referenced names")
  {
    const auto names = referenced_names(ex("present(a) ? a + b : c * a"));
    CHECK(names == std::vector<std::string>{"a", "b", "c"});
  }

  TEST_CASE("value encoding")
  {
    CHECK(value_to_json(Value(std::int64_t{5})) == R"({"type":"int","value":5})");
    CHECK(value_to_json(Value(true)) == R"({"type":"bool","value":true})");
    CHECK(value_to_json(Value(0.1)) == R"({"type":"float","value":0.1})");
    CHECK(value_to_json(Value(1.0 / 3.0)) == R"({"type":"float","value":0.333333333})");
    CHECK(value_to_json(Value(std::string("a\"b"))) == R"({"type":"string","value":"a\"b"})");
    CHECK(coerce(Value(std::int64_t{2}), ValueType::Float) == Value(2.0));
    CHECK_FALSE(coerce(Value(2.0), ValueType::Int).has_value());
  }
}
