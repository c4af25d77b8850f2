#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "btflow/value.hpp"

namespace btflow {

/// Logical time point. Ordered lexicographically.
struct Tag
{
  std::int64_t time_ms = 0;
  std::uint32_t microstep = 0;

  auto operator<=>(const Tag&) const = default;
};

std::string tag_string(const Tag& t);

enum class RunErrorCode {
  DoubleStatus,
  MergeConflict,
  TypeMismatch,
  ReadOfAbsent,
  DivisionByZero,
  UnboundIdentifier,
  UndeclaredEffect,
  UnknownPort,
  MissingExtern,
  DuplicateExtern,
  InvalidScenario,
  InternalCycle,
  NonMonotonicTag,
};

std::string_view run_error_name(RunErrorCode c);

class RunError : public std::runtime_error
{
public:
  RunError(RunErrorCode code, std::string node_id, Tag tag, const std::string& message)
      : std::runtime_error(message), code_(code), node_id_(std::move(node_id)), tag_(tag)
  {
  }

  RunErrorCode code() const { return code_; }
  const std::string& node_id() const { return node_id_; }
  Tag tag() const { return tag_; }

private:
  RunErrorCode code_;
  std::string node_id_;
  Tag tag_;
};

enum class TraceKind { PortEvent, NodeInvoked, StatusEmitted, Warning, Error, BlockEvent };

std::string_view trace_kind_name(TraceKind k);

/// Canonical position of an event within its tag. Both executors assign
/// the same keys, derived from the depth-first order of the tree, so traces
/// do not depend on the order in which independent reactions ran.
struct EventKey
{
  std::int64_t major = 0;
  int minor = 0;

  auto operator<=>(const EventKey&) const = default;
};

struct TraceEvent
{
  Tag tag;
  TraceKind kind = TraceKind::PortEvent;
  std::string subject;
  std::string payload;  // canonical JSON text
  EventKey key;
};

struct Trace
{
  std::vector<TraceEvent> events;
  std::optional<RunError> error;

  /// JSON lines. Block events (runtime internals) are only written when
  /// `include_internal` is set; everything else is the comparable subset.
  std::string to_jsonl(bool include_internal = false) const;
};

std::string event_to_json(const TraceEvent& e);

/// Key of tree output port events: after everything else in the tag.
inline constexpr std::int64_t kOutputKeyMajor = INT64_MAX;

TraceEvent port_event(Tag tag, const std::string& port, const Slot& value, EventKey key);
TraceEvent invoked_event(Tag tag, const std::string& node_id, std::string_view kind, const std::string& label,
                         EventKey key);
TraceEvent status_event(Tag tag, const std::string& node_id, Status status, EventKey key);
TraceEvent warning_event(Tag tag, const std::string& node_id, std::string_view code, const std::string& message,
                         EventKey key);
TraceEvent error_event(const RunError& error, EventKey key);

/// Appends one tag's events to `trace` in key order. With an error, only
/// events that precede the error's key are kept, followed by the error.
void close_tag(Trace& trace, std::vector<TraceEvent> events, const std::optional<RunError>& error, EventKey error_key);

}  // namespace btflow
