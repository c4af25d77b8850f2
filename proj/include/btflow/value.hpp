#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace btflow {

enum class ValueType { Bool, Int, Float, String };

/// Payload carried by a port or channel event. Absence of an event is not a
/// Value; it is modelled as an empty Slot.
using Value = std::variant<bool, std::int64_t, double, std::string>;

/// A port/channel at one tag: either present(v) or absent.
using Slot = std::optional<Value>;

enum class Status { Success, Failure, Running };

ValueType type_of(const Value& v);
std::string_view type_name(ValueType t);
std::optional<ValueType> parse_type_name(std::string_view name);
std::string_view status_name(Status s);

/// Converts `v` to type `t` if the conversion is lossless by construction
/// (identity, or Int -> Float). Returns nullopt otherwise.
std::optional<Value> coerce(const Value& v, ValueType t);

/// Canonical JSON encoding used in traces: {"type":"int","value":5}.
/// Floats use 9 significant digits; non-finite floats are strings.
std::string value_to_json(const Value& v);

/// Human-readable rendering (used in diagnostics and DOT labels).
std::string value_to_string(const Value& v);

/// Floats formatted with 9 significant digits.
std::string format_float(double d);

/// JSON string literal with escaping.
std::string json_quote(std::string_view s);

}  // namespace btflow
