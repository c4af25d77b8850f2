#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "btflow/ast.hpp"
#include "btflow/check.hpp"

namespace btflow {

struct Diagnostic
{
  Severity severity = Severity::Error;
  std::string message;
  SourceSpan span;
};

/// "file:line:col: severity: message", optionally with ANSI colour.
std::string format_diagnostic(const Diagnostic& d, bool color = false);

struct ParseResult
{
  std::optional<BtDef> def;  // set iff no error diagnostics
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return def.has_value(); }
};

/// Parses one `behaviortree` definition. Never throws on malformed input;
/// recovers at node boundaries so several errors can be reported at once.
ParseResult parse(std::string_view text, std::string_view file = "<input>");

/// Canonical text form: two-space indent, one declaration per line,
/// explicit parallel thresholds. parse(pretty_print(d)) reproduces d.
std::string pretty_print(const BtDef& def);

/// Canonical rendering of an expression, minimal parentheses.
std::string print_expr(const Expr& e);

}  // namespace btflow
