#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "btflow/ast.hpp"
#include "btflow/check.hpp"
#include "btflow/exec.hpp"
#include "btflow/scenario.hpp"
#include "btflow/trace.hpp"

namespace btflow {

/// Interpreter state. Channels are keyed like ResolvedRef::key, e.g.
/// "chan:r.0:x".
struct TickEnv
{
  std::map<std::string, Slot> channel_now;  // written during this tick
  std::map<std::string, Slot> channel_pre;  // final values of earlier ticks
  std::map<std::string, LeafState> leaves;  // by node id: states and script cursor
  std::map<std::string, Slot> inputs;
  std::map<std::string, Slot> outputs;

  bool operator==(const TickEnv&) const = default;
};

/// Direct recursive evaluation of a tree, one tick per start event.
class Interpreter
{
public:
  /// Throws std::invalid_argument if the tree does not validate.
  explicit Interpreter(const BtDef& def);
  Interpreter(const Interpreter&) = delete;
  Interpreter& operator=(const Interpreter&) = delete;

  TickEnv initial_env() const;

  /// Ticks the root. Appends trace events (unsorted keys) when `events` is
  /// given. Throws RunError from task bodies with `error_key` set to the
  /// failing node's event key.
  Status tick(TickEnv& env, Tag tag, const ExternRegistry& externs, std::vector<TraceEvent>* events = nullptr,
              EventKey* error_key = nullptr) const;

  const Resolution& resolution() const { return res_; }
  const std::vector<LeafSpec>& leaves() const { return specs_; }

private:
  Status tick_node(int e, TickEnv& env, Tag tag, const ExternRegistry& externs, std::vector<TraceEvent>* events,
                   EventKey* error_key) const;

  BtDef def_;
  Resolution res_;
  std::vector<LeafSpec> specs_;          // by leaf order
  std::vector<int> spec_of_;             // entry -> index into specs_, or -1
  std::vector<std::vector<std::string>> source_keys_;  // by entry
  std::vector<std::vector<bool>> backward_;            // by entry: source may read the previous tick
  std::vector<std::vector<std::string>> effect_keys_;
};

/// One tick as a value transformation: (status, env').
std::pair<Status, TickEnv> tick(const BtDef& def, const TickEnv& env, Tag tag, const ExternRegistry& externs);

/// Interprets a scenario, producing the same comparable events as run().
Trace run_oracle(const BtDef& def, const Scenario& scenario, const ExternRegistry& externs);

}  // namespace btflow
