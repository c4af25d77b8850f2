#include "btflow/expr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace btflow {

std::string_view eval_error_name(EvalErrorCode c)
{
  switch (c) {
    case EvalErrorCode::TypeMismatch: return "TypeMismatch";
    case EvalErrorCode::ReadOfAbsent: return "ReadOfAbsent";
    case EvalErrorCode::DivisionByZero: return "DivisionByZero";
    case EvalErrorCode::UnboundIdentifier: return "UnboundIdentifier";
  }
  return "?";
}

namespace {

std::string_view op_symbol(ExprOp op)
{
  switch (op) {
    case ExprOp::Not: return "!";
    case ExprOp::Neg: return "-";
    case ExprOp::Add: return "+";
    case ExprOp::Sub: return "-";
    case ExprOp::Mul: return "*";
    case ExprOp::Div: return "/";
    case ExprOp::Mod: return "%";
    case ExprOp::Eq: return "==";
    case ExprOp::Ne: return "!=";
    case ExprOp::Lt: return "<";
    case ExprOp::Le: return "<=";
    case ExprOp::Gt: return ">";
    case ExprOp::Ge: return ">=";
    case ExprOp::And: return "&&";
    case ExprOp::Or: return "||";
    case ExprOp::Cond: return "?:";
    default: return "?";
  }
}

[[noreturn]] void mismatch(ExprOp op, const Value& a)
{
  throw EvalError(EvalErrorCode::TypeMismatch,
                  "operator '" + std::string(op_symbol(op)) + "' cannot be applied to " +
                    std::string(type_name(type_of(a))));
}

[[noreturn]] void mismatch(ExprOp op, const Value& a, const Value& b)
{
  throw EvalError(EvalErrorCode::TypeMismatch,
                  "operator '" + std::string(op_symbol(op)) + "' cannot be applied to " +
                    std::string(type_name(type_of(a))) + " and " + std::string(type_name(type_of(b))));
}

bool as_bool(ExprOp op, const Value& v)
{
  if (const bool* b = std::get_if<bool>(&v)) return *b;
  mismatch(op, v);
}

bool numeric(const Value& v)
{
  return std::holds_alternative<std::int64_t>(v) || std::holds_alternative<double>(v);
}

double to_double(const Value& v)
{
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  return std::get<double>(v);
}

std::int64_t wrap(std::uint64_t u) { return static_cast<std::int64_t>(u); }

Value arith(ExprOp op, const Value& a, const Value& b)
{
  if (op == ExprOp::Add && std::holds_alternative<std::string>(a) && std::holds_alternative<std::string>(b)) {
    return std::get<std::string>(a) + std::get<std::string>(b);
  }
  if (!numeric(a) || !numeric(b)) mismatch(op, a, b);
  if (std::holds_alternative<std::int64_t>(a) && std::holds_alternative<std::int64_t>(b)) {
    const auto x = std::get<std::int64_t>(a);
    const auto y = std::get<std::int64_t>(b);
    const auto ux = static_cast<std::uint64_t>(x);
    const auto uy = static_cast<std::uint64_t>(y);
    switch (op) {
      case ExprOp::Add: return wrap(ux + uy);
      case ExprOp::Sub: return wrap(ux - uy);
      case ExprOp::Mul: return wrap(ux * uy);
      case ExprOp::Div:
      case ExprOp::Mod:
        if (y == 0) throw EvalError(EvalErrorCode::DivisionByZero, "integer division by zero");
        if (y == -1) return op == ExprOp::Div ? wrap(std::uint64_t{0} - ux) : std::int64_t{0};
        return op == ExprOp::Div ? x / y : x % y;
      default: break;
    }
  }
  const double x = to_double(a);
  const double y = to_double(b);
  switch (op) {
    case ExprOp::Add: return x + y;
    case ExprOp::Sub: return x - y;
    case ExprOp::Mul: return x * y;
    case ExprOp::Div: return x / y;
    case ExprOp::Mod: return std::fmod(x, y);
    default: mismatch(op, a, b);
  }
}

bool equal_values(ExprOp op, const Value& a, const Value& b)
{
  if (numeric(a) && numeric(b)) {
    if (a.index() == b.index()) return a == b;
    return to_double(a) == to_double(b);
  }
  if (a.index() != b.index()) mismatch(op, a, b);
  return a == b;
}

bool compare(ExprOp op, const Value& a, const Value& b)
{
  int c = 0;
  if (numeric(a) && numeric(b)) {
    if (std::holds_alternative<std::int64_t>(a) && std::holds_alternative<std::int64_t>(b)) {
      const auto x = std::get<std::int64_t>(a);
      const auto y = std::get<std::int64_t>(b);
      c = x < y ? -1 : (x > y ? 1 : 0);
    } else {
      const double x = to_double(a);
      const double y = to_double(b);
      if (std::isnan(x) || std::isnan(y)) return false;
      c = x < y ? -1 : (x > y ? 1 : 0);
    }
  } else if (std::holds_alternative<std::string>(a) && std::holds_alternative<std::string>(b)) {
    const int r = std::get<std::string>(a).compare(std::get<std::string>(b));
    c = r < 0 ? -1 : (r > 0 ? 1 : 0);
  } else {
    mismatch(op, a, b);
  }
  switch (op) {
    case ExprOp::Lt: return c < 0;
    case ExprOp::Le: return c <= 0;
    case ExprOp::Gt: return c > 0;
    default: return c >= 0;
  }
}

const Slot& lookup(const ExprEnv& env, const std::string& name)
{
  const Slot* s = env(name);
  if (s == nullptr) throw EvalError(EvalErrorCode::UnboundIdentifier, "unbound identifier '" + name + "'");
  return *s;
}

}  // namespace

Value eval_expr(const Expr& e, const ExprEnv& env)
{
  switch (e.op) {
    case ExprOp::Literal: return e.literal;
    case ExprOp::Ref: {
      const Slot& s = lookup(env, e.name);
      if (!s) throw EvalError(EvalErrorCode::ReadOfAbsent, "read of absent '" + e.name + "'");
      return *s;
    }
    case ExprOp::Present: return lookup(env, e.name).has_value();
    case ExprOp::Not: return !as_bool(e.op, eval_expr(e.args[0], env));
    case ExprOp::Neg: {
      const Value v = eval_expr(e.args[0], env);
      if (const auto* i = std::get_if<std::int64_t>(&v)) return wrap(std::uint64_t{0} - static_cast<std::uint64_t>(*i));
      if (const auto* d = std::get_if<double>(&v)) return -*d;
      mismatch(e.op, v);
    }
    case ExprOp::And:
      if (!as_bool(e.op, eval_expr(e.args[0], env))) return false;
      return as_bool(e.op, eval_expr(e.args[1], env));
    case ExprOp::Or:
      if (as_bool(e.op, eval_expr(e.args[0], env))) return true;
      return as_bool(e.op, eval_expr(e.args[1], env));
    case ExprOp::Cond:
      return as_bool(e.op, eval_expr(e.args[0], env)) ? eval_expr(e.args[1], env) : eval_expr(e.args[2], env);
    case ExprOp::Add:
    case ExprOp::Sub:
    case ExprOp::Mul:
    case ExprOp::Div:
    case ExprOp::Mod: return arith(e.op, eval_expr(e.args[0], env), eval_expr(e.args[1], env));
    case ExprOp::Eq: return equal_values(e.op, eval_expr(e.args[0], env), eval_expr(e.args[1], env));
    case ExprOp::Ne: return !equal_values(e.op, eval_expr(e.args[0], env), eval_expr(e.args[1], env));
    case ExprOp::Lt:
    case ExprOp::Le:
    case ExprOp::Gt:
    case ExprOp::Ge: return compare(e.op, eval_expr(e.args[0], env), eval_expr(e.args[1], env));
  }
  throw EvalError(EvalErrorCode::TypeMismatch, "malformed expression");
}

Value eval_expr(const Expr& e, const std::map<std::string, Slot, std::less<>>& env)
{
  return eval_expr(e, [&env](std::string_view name) -> const Slot* {
    auto it = env.find(name);
    return it == env.end() ? nullptr : &it->second;
  });
}

namespace {

void collect_names(const Expr& e, std::vector<std::string>& out)
{
  if (e.op == ExprOp::Ref || e.op == ExprOp::Present) {
    if (std::find(out.begin(), out.end(), e.name) == out.end()) out.push_back(e.name);
  }
  for (const auto& a : e.args) collect_names(a, out);
}

}  // namespace

std::vector<std::string> referenced_names(const Expr& e)
{
  std::vector<std::string> out;
  collect_names(e, out);
  return out;
}

}  // namespace btflow
