#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "btflow/exec.hpp"
#include "btflow/scenario.hpp"
#include "btflow/trace.hpp"

namespace btflow {

/// The bundled AGV example: tree source, scenario and host callbacks.
struct Plant
{
  std::string source;    // AGVBehavior tree text
  std::string scenario;  // scenario JSON text
};

const Plant& bundled_plant();

/// Deterministic stubs: moveTo succeeds on the 3rd consecutive tick toward
/// one target, requestLoad/requestUnload on their 2nd tick, moveToWaiting and stop always
/// run, hasJob keeps the current job plus one queued job.
ExternRegistry plant_externs();

inline constexpr int kMoveTicks = 3;
inline constexpr int kTransferTicks = 2;

/// Number of jobDone events in a trace.
int completed_jobs(const Trace& trace);

}  // namespace btflow
