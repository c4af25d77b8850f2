#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "btflow/exec.hpp"
#include "btflow/graph.hpp"
#include "btflow/scenario.hpp"
#include "btflow/trace.hpp"

namespace btflow {

/// Everything that persists between tags: task states and Pre buffers.
struct RuntimeState
{
  std::vector<LeafState> leaves;  // indexed like ReactorGraph::leaves
  std::map<int, Slot> pre_buffers;  // Pre block index -> buffered value
  std::optional<Tag> last_tag;

  static RuntimeState initial(const ReactorGraph& g);
  bool operator==(const RuntimeState&) const = default;
};

struct StepResult
{
  RuntimeState state;
  std::vector<TraceEvent> events;  // canonical order, truncated at an error
  std::optional<RunError> error;
  std::vector<Slot> ports;  // value of every graph port at this tag
};

/// Executes one tag. Pure: the input state is not modified. `order`
/// defaults to the graph's canonical topological order.
StepResult step(const ReactorGraph& g, const RuntimeState& state, Tag tag, const std::vector<InputEvent>& events,
                const ExternRegistry& externs, const std::vector<int>* order = nullptr);

struct RunOptions
{
  TopoPolicy policy = TopoPolicy::Canonical;
  std::uint64_t seed = 0;
};

/// Runs a scenario to its horizon, stopping at the first error. Throws
/// RunError(MissingExtern) before the first tag when a callback is missing.
Trace run(const ReactorGraph& g, const Scenario& scenario, const ExternRegistry& externs,
          const RunOptions& options = {});

}  // namespace btflow
