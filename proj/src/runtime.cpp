#include "btflow/runtime.hpp"

namespace btflow {

RuntimeState RuntimeState::initial(const ReactorGraph& g)
{
  RuntimeState s;
  for (const auto& leaf : g.leaves) s.leaves.push_back(LeafState::initial(leaf));
  for (std::size_t b = 0; b < g.blocks.size(); ++b) {
    if (g.blocks[b].kind == BlockKind::Pre) s.pre_buffers.emplace(static_cast<int>(b), std::nullopt);
  }
  return s;
}

namespace {

constexpr EventKey kNoError{0, 0};

class Executor
{
public:
  explicit Executor(const ReactorGraph& g) : g_(g), fanout_(g.ports.size())
  {
    for (const auto& c : g.connections) fanout_[static_cast<std::size_t>(c.from)].push_back(c.to);
  }

  StepResult step(const RuntimeState& state, Tag tag, const std::vector<InputEvent>& inputs,
                  const ExternRegistry& externs, const std::vector<int>& order) const
  {
    Tick t{StepResult{state, {}, std::nullopt, std::vector<Slot>(g_.ports.size())}, tag, {}, kNoError};
    if (state.last_tag && !(*state.last_tag < tag)) {
      fail(t, RunError(RunErrorCode::NonMonotonicTag, "", tag,
                       "tag " + tag_string(tag) + " does not follow " + tag_string(*state.last_tag)),
           {-1, -3});
      return finish(std::move(t));
    }
    t.result.state.last_tag = tag;

    for (const auto& ev : inputs) {
      try {
        const Slot v = bind_input(g_.tree_ports, ev, tag);
        const int port = g_.find_port(g_.tree_block, ev.port);
        set(t, port, ev.port == "start" ? Slot(Value(true)) : v);
      } catch (const RunError& e) {
        fail(t, e, {-1, -2});
        return finish(std::move(t));
      }
    }

    for (int r : order) {
      const Reaction& rx = g_.reactions[static_cast<std::size_t>(r)];
      bool triggered = false;
      for (int p : rx.triggers) triggered = triggered || present(t, p);
      if (triggered) react(t, rx, externs);
    }
    return finish(std::move(t));
  }

private:
  struct Tick
  {
    StepResult result;
    Tag tag;
    std::optional<RunError> error;
    EventKey error_key;
  };

  bool present(const Tick& t, int port) const { return t.result.ports[static_cast<std::size_t>(port)].has_value(); }
  const Slot& value(const Tick& t, int port) const { return t.result.ports[static_cast<std::size_t>(port)]; }

  static void fail(Tick& t, const RunError& e, EventKey key)
  {
    if (!t.error || key < t.error_key) {
      t.error = e;
      t.error_key = key;
    }
  }

  StepResult finish(Tick t) const
  {
    Trace tr;
    close_tag(tr, std::move(t.result.events), t.error, t.error_key);
    t.result.events = std::move(tr.events);
    t.result.error = std::move(t.error);
    return std::move(t.result);
  }

  const NodeInfo& node(int n) const { return g_.nodes[static_cast<std::size_t>(n)]; }

  void record(Tick& t, int port, const Slot& v) const
  {
    const GraphPort& p = g_.ports[static_cast<std::size_t>(port)];
    auto& events = t.result.events;
    switch (p.role) {
      case PortRole::TreeInput:
        events.push_back(port_event(t.tag, p.name, p.pure ? Slot{} : v, {-1, p.decl}));
        return;
      case PortRole::TreeOutput:
        events.push_back(port_event(t.tag, p.name, v, {kOutputKeyMajor, p.decl}));
        return;
      case PortRole::NodeStart:
        events.push_back(invoked_event(t.tag, node(p.node).id, node_kind_name(node(p.node).kind), node(p.node).label,
                                       {node(p.node).enter, 0}));
        return;
      case PortRole::NodeSuccess:
      case PortRole::NodeFailure:
        events.push_back(status_event(t.tag, node(p.node).id,
                                      p.role == PortRole::NodeSuccess ? Status::Success : Status::Failure,
                                      {node(p.node).exit, 2}));
        return;
      case PortRole::None:
        events.push_back({t.tag, TraceKind::BlockEvent, g_.port_path(port), v ? value_to_json(*v) : "null",
                          {kOutputKeyMajor - 1, port}});
        return;
    }
  }

  /// Sets a port and propagates through connections within the tag.
  void set(Tick& t, int port, Slot v) const
  {
    if (!v) return;
    t.result.ports[static_cast<std::size_t>(port)] = v;
    record(t, port, v);
    for (int q : fanout_[static_cast<std::size_t>(port)]) set(t, q, v);
  }

  void react(Tick& t, const Reaction& rx, const ExternRegistry& externs) const
  {
    const GraphBlock& blk = g_.blocks[static_cast<std::size_t>(rx.block)];
    switch (rx.kind) {
      case ReactionKind::TaskBody: {
        const LeafSpec& spec = g_.leaves[static_cast<std::size_t>(blk.leaf)];
        SourceMap sources;
        for (std::size_t i = 0; i < spec.sources.size(); ++i) sources.emplace(spec.sources[i].name, value(t, rx.sources[i]));
        LeafOutcome out;
        try {
          out = execute_leaf(spec, t.result.state.leaves[static_cast<std::size_t>(blk.leaf)], sources, externs, t.tag);
        } catch (const RunError& e) {
          fail(t, e, {node(blk.node).exit, 0});
          return;
        }
        if (out.condition_running) {
          t.result.events.push_back(warning_event(t.tag, spec.node_id, "ConditionRunning",
                                                  condition_running_message(spec), {node(blk.node).exit, 1}));
        }
        for (const auto& [name, v] : out.emits) {
          for (std::size_t i = 0; i < spec.effects.size(); ++i) {
            if (spec.effects[i].name == name) set(t, rx.effects[i + 2], v);
          }
        }
        if (out.success) set(t, rx.effects[0], Value(true));
        if (out.failure) set(t, rx.effects[1], Value(true));
        return;
      }
      case ReactionKind::Collect: {
        int s = 0;
        int f = 0;
        for (std::size_t i = 0; i < rx.triggers.size(); i += 2) {
          s += present(t, rx.triggers[i]) ? 1 : 0;
          f += present(t, rx.triggers[i + 1]) ? 1 : 0;
        }
        if (s >= blk.threshold) set(t, rx.effects[0], Value(true));
        if (f >= blk.arity - blk.threshold + 1) set(t, rx.effects[1], Value(true));
        return;
      }
      case ReactionKind::Merge: {
        int count = 0;
        int first = -1;
        for (int p : rx.triggers) {
          if (!present(t, p)) continue;
          ++count;
          if (first < 0) first = p;
        }
        if (blk.mode == MergeMode::AtMostOne && count > 1) {
          const std::string& id = blk.node >= 0 ? node(blk.node).id : std::string();
          fail(t, RunError(RunErrorCode::MergeConflict, id, t.tag,
                           "merge '" + blk.name + "' at " + tag_string(t.tag) + ": " + std::to_string(count) +
                             " inputs present"),
               {blk.node >= 0 ? node(blk.node).exit : kOutputKeyMajor, 0});
          return;
        }
        if (first >= 0) set(t, rx.effects[0], value(t, first));
        return;
      }
      case ReactionKind::PreEmit: {
        const Slot& buf = t.result.state.pre_buffers[rx.block];
        if (buf) set(t, rx.effects[0], buf);
        return;
      }
      case ReactionKind::PreStore:
        t.result.state.pre_buffers[rx.block] = value(t, rx.triggers[0]);
        return;
    }
  }

  const ReactorGraph& g_;
  std::vector<std::vector<int>> fanout_;
};

}  // namespace

StepResult step(const ReactorGraph& g, const RuntimeState& state, Tag tag, const std::vector<InputEvent>& events,
                const ExternRegistry& externs, const std::vector<int>* order)
{
  return Executor(g).step(state, tag, events, externs, order != nullptr ? *order : g.top_order);
}

Trace run(const ReactorGraph& g, const Scenario& scenario, const ExternRegistry& externs, const RunOptions& options)
{
  std::vector<const LeafSpec*> leaves;
  for (const auto& l : g.leaves) leaves.push_back(&l);
  check_externs(leaves, externs);

  const std::vector<int> order =
    options.policy == TopoPolicy::Canonical ? g.top_order : topological_order(g, options.policy, options.seed);
  const Executor exec(g);
  RuntimeState state = RuntimeState::initial(g);
  Trace trace;
  for (const auto& st : expand_schedule(scenario)) {
    StepResult r = exec.step(state, st.tag, st.events, externs, order);
    for (auto& e : r.events) trace.events.push_back(std::move(e));
    if (r.error) {
      trace.error = std::move(r.error);
      break;
    }
    state = std::move(r.state);
  }
  return trace;
}

}  // namespace btflow
