#pragma once

#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

#include "btflow/ast.hpp"

namespace btflow {

enum class EvalErrorCode { TypeMismatch, ReadOfAbsent, DivisionByZero, UnboundIdentifier };

std::string_view eval_error_name(EvalErrorCode c);

class EvalError : public std::runtime_error
{
public:
  EvalError(EvalErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  EvalErrorCode code() const { return code_; }

private:
  EvalErrorCode code_;
};

/// Returns the binding for an identifier, or nullptr if unbound.
using ExprEnv = std::function<const Slot*(std::string_view)>;

/// Strict evaluation. `&&`, `||` and `?:` short-circuit. Reading an absent
/// binding raises ReadOfAbsent unless it appears inside present(...).
/// Integer arithmetic wraps on overflow.
Value eval_expr(const Expr& e, const ExprEnv& env);
Value eval_expr(const Expr& e, const std::map<std::string, Slot, std::less<>>& env);

/// Identifiers read by an expression (including present() operands), in
/// first-occurrence order.
std::vector<std::string> referenced_names(const Expr& e);

}  // namespace btflow
