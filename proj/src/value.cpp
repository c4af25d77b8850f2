#include "btflow/value.hpp"

#include <cmath>
#include <cstdio>

namespace btflow {

ValueType type_of(const Value& v)
{
  switch (v.index()) {
    case 0: return ValueType::Bool;
    case 1: return ValueType::Int;
    case 2: return ValueType::Float;
    default: return ValueType::String;
  }
}

std::string_view type_name(ValueType t)
{
  switch (t) {
    case ValueType::Bool: return "bool";
    case ValueType::Int: return "int";
    case ValueType::Float: return "float";
    case ValueType::String: return "string";
  }
  return "?";
}

std::optional<ValueType> parse_type_name(std::string_view name)
{
  if (name == "bool") return ValueType::Bool;
  if (name == "int") return ValueType::Int;
  if (name == "float") return ValueType::Float;
  if (name == "string") return ValueType::String;
  return std::nullopt;
}

std::string_view status_name(Status s)
{
  switch (s) {
    case Status::Success: return "SUCCESS";
    case Status::Failure: return "FAILURE";
    case Status::Running: return "RUNNING";
  }
  return "?";
}

std::optional<Value> coerce(const Value& v, ValueType t)
{
  const ValueType from = type_of(v);
  if (from == t) return v;
  if (from == ValueType::Int && t == ValueType::Float) {
    return Value{static_cast<double>(std::get<std::int64_t>(v))};
  }
  return std::nullopt;
}

std::string format_float(double d)
{
  if (std::isnan(d)) return "nan";
  if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", d);
  return buf;
}

std::string json_quote(std::string_view s)
{
  std::string out;
  out.reserve(s.size() + 2);
  out.push_back('"');
  for (const char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      default:
        if (c < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out.push_back(ch);
        }
    }
  }
  out.push_back('"');
  return out;
}

std::string value_to_json(const Value& v)
{
  std::string out = "{\"type\":\"";
  out += type_name(type_of(v));
  out += "\",\"value\":";
  switch (type_of(v)) {
    case ValueType::Bool: out += std::get<bool>(v) ? "true" : "false"; break;
    case ValueType::Int: out += std::to_string(std::get<std::int64_t>(v)); break;
    case ValueType::Float: {
      const double d = std::get<double>(v);
      out += std::isfinite(d) ? format_float(d) : json_quote(format_float(d));
      break;
    }
    case ValueType::String: out += json_quote(std::get<std::string>(v)); break;
  }
  out += "}";
  return out;
}

std::string value_to_string(const Value& v)
{
  switch (type_of(v)) {
    case ValueType::Bool: return std::get<bool>(v) ? "true" : "false";
    case ValueType::Int: return std::to_string(std::get<std::int64_t>(v));
    case ValueType::Float: return format_float(std::get<double>(v));
    case ValueType::String: return json_quote(std::get<std::string>(v));
  }
  return "?";
}

}  // namespace btflow
