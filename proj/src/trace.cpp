#include "btflow/trace.hpp"

#include <algorithm>

namespace btflow {

std::string tag_string(const Tag& t)
{
  return "(" + std::to_string(t.time_ms) + " ms, " + std::to_string(t.microstep) + ")";
}

std::string_view run_error_name(RunErrorCode c)
{
  switch (c) {
    case RunErrorCode::DoubleStatus: return "DoubleStatus";
    case RunErrorCode::MergeConflict: return "MergeConflict";
    case RunErrorCode::TypeMismatch: return "TypeMismatch";
    case RunErrorCode::ReadOfAbsent: return "ReadOfAbsent";
    case RunErrorCode::DivisionByZero: return "DivisionByZero";
    case RunErrorCode::UnboundIdentifier: return "UnboundIdentifier";
    case RunErrorCode::UndeclaredEffect: return "UndeclaredEffect";
    case RunErrorCode::UnknownPort: return "UnknownPort";
    case RunErrorCode::MissingExtern: return "MissingExtern";
    case RunErrorCode::DuplicateExtern: return "DuplicateExtern";
    case RunErrorCode::InvalidScenario: return "InvalidScenario";
    case RunErrorCode::InternalCycle: return "InternalCycle";
    case RunErrorCode::NonMonotonicTag: return "NonMonotonicTag";
  }
  return "?";
}

std::string_view trace_kind_name(TraceKind k)
{
  switch (k) {
    case TraceKind::PortEvent: return "port-event";
    case TraceKind::NodeInvoked: return "node-invoked";
    case TraceKind::StatusEmitted: return "status-emitted";
    case TraceKind::Warning: return "warning";
    case TraceKind::Error: return "error";
    case TraceKind::BlockEvent: return "block-event";
  }
  return "?";
}

std::string event_to_json(const TraceEvent& e)
{
  std::string out = "{\"time\":" + std::to_string(e.tag.time_ms) + ",\"microstep\":" + std::to_string(e.tag.microstep) +
                    ",\"kind\":" + json_quote(trace_kind_name(e.kind)) + ",\"subject\":" + json_quote(e.subject) +
                    ",\"payload\":" + (e.payload.empty() ? std::string("null") : e.payload) + "}";
  return out;
}

TraceEvent port_event(Tag tag, const std::string& port, const Slot& value, EventKey key)
{
  return {tag, TraceKind::PortEvent, port, value ? value_to_json(*value) : std::string("null"), key};
}

TraceEvent invoked_event(Tag tag, const std::string& node_id, std::string_view kind, const std::string& label,
                         EventKey key)
{
  std::string payload = "{\"kind\":" + json_quote(kind);
  if (!label.empty()) payload += ",\"label\":" + json_quote(label);
  return {tag, TraceKind::NodeInvoked, node_id, payload + "}", key};
}

TraceEvent status_event(Tag tag, const std::string& node_id, Status status, EventKey key)
{
  return {tag, TraceKind::StatusEmitted, node_id, "{\"status\":" + json_quote(status_name(status)) + "}", key};
}

TraceEvent warning_event(Tag tag, const std::string& node_id, std::string_view code, const std::string& message,
                         EventKey key)
{
  return {tag, TraceKind::Warning, node_id,
          "{\"code\":" + json_quote(code) + ",\"message\":" + json_quote(message) + "}", key};
}

TraceEvent error_event(const RunError& error, EventKey key)
{
  return {error.tag(), TraceKind::Error, error.node_id(),
          "{\"code\":" + json_quote(run_error_name(error.code())) + ",\"message\":" + json_quote(error.what()) + "}",
          key};
}

void close_tag(Trace& trace, std::vector<TraceEvent> events, const std::optional<RunError>& error, EventKey error_key)
{
  std::stable_sort(events.begin(), events.end(), [](const TraceEvent& a, const TraceEvent& b) { return a.key < b.key; });
  for (auto& e : events) {
    if (error && !(e.key < error_key)) break;
    trace.events.push_back(std::move(e));
  }
  if (error) {
    trace.events.push_back(error_event(*error, error_key));
    trace.error = error;
  }
}

std::string Trace::to_jsonl(bool include_internal) const
{
  std::string out;
  for (const auto& e : events) {
    if (e.kind == TraceKind::BlockEvent && !include_internal) continue;
    out += event_to_json(e);
    out += '\n';
  }
  return out;
}

}  // namespace btflow
