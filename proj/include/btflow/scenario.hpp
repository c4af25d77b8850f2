#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "btflow/ast.hpp"
#include "btflow/trace.hpp"

namespace btflow {

/// Fires at (offset + k * period, 0) for k = 0, 1, 2, ...; period 0 fires once.
struct TimerSpec
{
  std::int64_t offset_ms = 0;
  std::int64_t period_ms = 0;
  std::string port = "start";
};

struct Injection
{
  std::int64_t time_ms = 0;
  std::string port;
  Slot value;  // empty for pure events such as start
};

struct Scenario
{
  std::vector<TimerSpec> timers;
  std::vector<Injection> injections;
  std::optional<std::int64_t> horizon_ms;     // tags with time < horizon_ms
  std::optional<std::int64_t> horizon_ticks;  // at most this many tags
};

struct InputEvent
{
  std::string port;
  Slot value;
};

struct ScheduledTag
{
  Tag tag;
  std::vector<InputEvent> events;  // sorted by port name
};

/// Parses {timers:[{offset_ms, period_ms, port}], injections:[{time_ms, port,
/// value}], horizon_ms, horizon_ticks}. Throws RunError(InvalidScenario).
Scenario parse_scenario(std::string_view json_text);
std::string scenario_to_json(const Scenario& s);

/// Every tag at which the scenario delivers events, in order.
std::vector<ScheduledTag> expand_schedule(const Scenario& s);

/// Checks an input event against the tree's declared ports and returns the
/// value to deliver (coerced to the port type). Throws RunError(UnknownPort)
/// or RunError(TypeMismatch).
Slot bind_input(const std::vector<PortDecl>& ports, const InputEvent& ev, Tag tag);

}  // namespace btflow
