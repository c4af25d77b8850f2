#include "btflow/scenario.hpp"

#include <algorithm>
#include <map>

#include "json.hpp"

namespace btflow {

namespace {

[[noreturn]] void invalid(const std::string& msg)
{
  throw RunError(RunErrorCode::InvalidScenario, "", Tag{}, "invalid scenario: " + msg);
}

std::int64_t get_ms(const nlohmann::json& j, const char* key, bool required, std::int64_t fallback = 0)
{
  if (!j.contains(key)) {
    if (required) invalid(std::string("missing '") + key + "'");
    return fallback;
  }
  const auto& v = j.at(key);
  if (!v.is_number_integer()) invalid(std::string("'") + key + "' must be an integer");
  const auto ms = v.get<std::int64_t>();
  if (ms < 0) invalid(std::string("'") + key + "' must be non-negative");
  return ms;
}

Slot json_to_slot(const nlohmann::json& v)
{
  if (v.is_null()) return std::nullopt;
  if (v.is_boolean()) return Value{v.get<bool>()};
  if (v.is_number_integer()) return Value{v.get<std::int64_t>()};
  if (v.is_number_float()) return Value{v.get<double>()};
  if (v.is_string()) return Value{v.get<std::string>()};
  invalid("injection values must be bool, number, string or null");
}

nlohmann::ordered_json slot_to_json(const Slot& s)
{
  if (!s) return nullptr;
  return std::visit([](const auto& x) { return nlohmann::ordered_json(x); }, *s);
}

}  // namespace

Scenario parse_scenario(std::string_view json_text)
{
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    invalid(e.what());
  }
  if (!j.is_object()) invalid("top level must be an object");
  Scenario s;
  if (j.contains("timers")) {
    if (!j["timers"].is_array()) invalid("'timers' must be an array");
    for (const auto& t : j["timers"]) {
      if (!t.is_object()) invalid("timer entries must be objects");
      TimerSpec spec;
      spec.offset_ms = get_ms(t, "offset_ms", false);
      spec.period_ms = get_ms(t, "period_ms", false);
      if (t.contains("port")) {
        if (!t["port"].is_string()) invalid("timer 'port' must be a string");
        spec.port = t["port"].get<std::string>();
      }
      s.timers.push_back(spec);
    }
  }
  if (j.contains("injections")) {
    if (!j["injections"].is_array()) invalid("'injections' must be an array");
    for (const auto& i : j["injections"]) {
      if (!i.is_object()) invalid("injection entries must be objects");
      Injection inj;
      inj.time_ms = get_ms(i, "time_ms", true);
      if (!i.contains("port") || !i["port"].is_string()) invalid("injection requires a string 'port'");
      inj.port = i["port"].get<std::string>();
      if (i.contains("value")) inj.value = json_to_slot(i["value"]);
      s.injections.push_back(std::move(inj));
    }
  }
  if (j.contains("horizon_ms")) s.horizon_ms = get_ms(j, "horizon_ms", true);
  if (j.contains("horizon_ticks")) s.horizon_ticks = get_ms(j, "horizon_ticks", true);
  return s;
}

std::string scenario_to_json(const Scenario& s)
{
  nlohmann::ordered_json j;
  j["timers"] = nlohmann::ordered_json::array();
  for (const auto& t : s.timers) {
    j["timers"].push_back({{"offset_ms", t.offset_ms}, {"period_ms", t.period_ms}, {"port", t.port}});
  }
  j["injections"] = nlohmann::ordered_json::array();
  for (const auto& i : s.injections) {
    nlohmann::ordered_json e = {{"time_ms", i.time_ms}, {"port", i.port}};
    if (i.value) e["value"] = slot_to_json(i.value);
    j["injections"].push_back(std::move(e));
  }
  if (s.horizon_ms) j["horizon_ms"] = *s.horizon_ms;
  if (s.horizon_ticks) j["horizon_ticks"] = *s.horizon_ticks;
  return j.dump(2) + "\n";
}

std::vector<ScheduledTag> expand_schedule(const Scenario& s)
{
  const auto within = [&](std::int64_t t) { return !s.horizon_ms || t < *s.horizon_ms; };
  std::map<std::int64_t, std::map<std::string, InputEvent>> by_time;
  std::map<std::pair<std::int64_t, std::string>, bool> from_timer;

  for (const auto& t : s.timers) {
    if (t.period_ms > 0 && !s.horizon_ms && !s.horizon_ticks) {
      invalid("periodic timer requires horizon_ms or horizon_ticks");
    }
    std::int64_t count = 0;
    for (std::int64_t time = t.offset_ms; within(time); time += t.period_ms) {
      if (s.horizon_ticks && count >= *s.horizon_ticks) break;
      ++count;
      InputEvent ev{t.port, t.port == "start" ? Slot{} : Slot{Value{true}}};
      by_time[time].insert_or_assign(t.port, ev);
      from_timer[{time, t.port}] = true;
      if (t.period_ms == 0) break;
    }
  }

  std::map<std::pair<std::int64_t, std::string>, bool> injected;
  for (const auto& inj : s.injections) {
    if (!within(inj.time_ms)) continue;
    const auto key = std::make_pair(inj.time_ms, inj.port);
    if (injected.count(key) != 0) {
      invalid("two injections on port '" + inj.port + "' at " + std::to_string(inj.time_ms) + " ms");
    }
    injected[key] = true;
    if (from_timer.count(key) != 0 && inj.port != "start") {
      invalid("injection on '" + inj.port + "' collides with a timer at " + std::to_string(inj.time_ms) + " ms");
    }
    by_time[inj.time_ms].insert_or_assign(inj.port, InputEvent{inj.port, inj.port == "start" ? Slot{} : inj.value});
  }

  std::vector<ScheduledTag> out;
  for (auto& [time, events] : by_time) {
    if (s.horizon_ticks && static_cast<std::int64_t>(out.size()) >= *s.horizon_ticks) break;
    ScheduledTag st;
    st.tag = Tag{time, 0};
    for (auto& [port, ev] : events) st.events.push_back(std::move(ev));
    out.push_back(std::move(st));
  }
  return out;
}

Slot bind_input(const std::vector<PortDecl>& ports, const InputEvent& ev, Tag tag)
{
  if (ev.port == "start") return std::nullopt;
  for (const auto& p : ports) {
    if (p.name != ev.port) continue;
    if (p.direction != PortDirection::Input) break;
    if (!ev.value) {
      throw RunError(RunErrorCode::TypeMismatch, "", tag, "input '" + ev.port + "' requires a value");
    }
    auto v = coerce(*ev.value, p.type);
    if (!v) {
      throw RunError(RunErrorCode::TypeMismatch, "", tag,
                     "value for input '" + ev.port + "' is " + std::string(type_name(type_of(*ev.value))) +
                       ", expected " + std::string(type_name(p.type)));
    }
    return v;
  }
  throw RunError(RunErrorCode::UnknownPort, "", tag, "unknown input port '" + ev.port + "'");
}

}  // namespace btflow
