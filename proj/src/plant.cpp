#include "btflow/plant.hpp"

#include "plant_data.hpp"

namespace btflow {

const Plant& bundled_plant()
{
  static const Plant plant{std::string(plant_data::kSource), std::string(plant_data::kScenario)};
  return plant;
}

namespace {

std::int64_t int_state(const StateMap& s, const char* name)
{
  auto it = s.find(name);
  return it == s.end() ? 0 : std::get<std::int64_t>(it->second);
}

std::optional<std::int64_t> int_source(const SourceMap& s, std::string_view name)
{
  auto it = s.find(name);
  if (it == s.end() || !it->second) return std::nullopt;
  return std::get<std::int64_t>(*it->second);
}

/// The only source of a task, whatever it is called.
std::optional<std::int64_t> single_source(const SourceMap& s)
{
  if (s.size() != 1 || !s.begin()->second) return std::nullopt;
  return std::get<std::int64_t>(*s.begin()->second);
}

constexpr std::int64_t kBufferLocation = 3;

ExternResult has_job(ExternCall& call)
{
  std::int64_t current = int_state(call.states, "currentJob");
  std::int64_t queued = int_state(call.states, "queuedJob");
  const auto finished = int_source(call.sources, "finishedJob");
  const auto offered = int_source(call.sources, "newJob");
  if (finished && *finished == current) current = 0;
  if (offered && *offered != current) {
    if (current == 0) {
      current = *offered;
    } else {
      queued = *offered;
    }
  }
  if (current == 0 && queued != 0) {
    current = queued;
    queued = 0;
  }
  call.states.insert_or_assign("currentJob", Value(current));
  call.states.insert_or_assign("queuedJob", Value(queued));
  if (current == 0) return ExternResult::fail();
  ExternResult r = ExternResult::succeed();
  r.emits = {{"jobId", Value(current)},
             {"pickupAt", Value(std::int64_t{1} + current % 2)},
             {"deliverTo", Value(kBufferLocation)}};
  return r;
}

ExternResult move_to(ExternCall& call)
{
  const auto target = single_source(call.sources);
  if (!target) return ExternResult::fail();
  std::int64_t elapsed = int_state(call.states, "elapsed");
  if (int_state(call.states, "target") != *target) elapsed = 0;
  ++elapsed;
  const bool arrived = elapsed >= kMoveTicks;
  call.states.insert_or_assign("target", Value(arrived ? std::int64_t{0} : *target));
  call.states.insert_or_assign("elapsed", Value(arrived ? std::int64_t{0} : elapsed));
  return arrived ? ExternResult::succeed() : ExternResult::running();
}

ExternResult request_transfer(ExternCall& call, const char* confirmation)
{
  const auto job = single_source(call.sources);
  if (!job) return ExternResult::fail();
  const std::int64_t waited = int_state(call.states, "waited") + 1;
  if (waited < kTransferTicks) {
    call.states.insert_or_assign("waited", Value(waited));
    return ExternResult::running();
  }
  call.states.insert_or_assign("waited", Value(std::int64_t{0}));
  ExternResult r = ExternResult::succeed();
  r.emits = {{confirmation, Value(*job)}};
  return r;
}

ExternResult finish_job(ExternCall& call)
{
  const auto job = int_source(call.sources, "jobId");
  if (!job) return ExternResult::fail();
  ExternResult r = ExternResult::succeed();
  r.emits = {{"finishedJob", Value(*job)}, {"jobDone", Value(*job)}};
  return r;
}

}  // namespace

ExternRegistry plant_externs()
{
  ExternRegistry reg;
  reg.register_extern("hasJob", has_job);
  reg.register_extern("moveToWaiting", [](ExternCall&) { return ExternResult::running(); });
  reg.register_extern("stop", [](ExternCall&) { return ExternResult::running(); });
  reg.register_extern("moveTo", move_to);
  reg.register_extern("requestLoad", [](ExternCall& c) { return request_transfer(c, "loadedJob"); });
  reg.register_extern("requestUnload", [](ExternCall& c) { return request_transfer(c, "deliveredJob"); });
  reg.register_extern("finishJob", finish_job);
  return reg;
}

int completed_jobs(const Trace& trace)
{
  int n = 0;
  for (const auto& e : trace.events) n += e.kind == TraceKind::PortEvent && e.subject == "jobDone" ? 1 : 0;
  return n;
}

}  // namespace btflow
