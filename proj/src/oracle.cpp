#include "btflow/oracle.hpp"

#include <algorithm>
#include <stdexcept>

namespace btflow {

Interpreter::Interpreter(const BtDef& def) : def_(def)
{
  const CheckReport report = validate(def_);
  if (report.has_errors()) throw std::invalid_argument("cannot interpret '" + def_.name + "': tree does not validate");
  res_ = Resolution::build(def_);
  const auto& entries = res_.index.entries;
  spec_of_.assign(entries.size(), -1);
  source_keys_.resize(entries.size());
  backward_.resize(entries.size());
  effect_keys_.resize(entries.size());

  std::map<std::string, int> last_writer;  // channel key -> highest writer leaf order
  for (int leaf : res_.index.leaves) {
    for (const auto& r : res_.effects[static_cast<std::size_t>(leaf)]) {
      const std::string k = r->key(res_.index);
      last_writer[k] = std::max(last_writer.count(k) != 0 ? last_writer[k] : -1, entries[static_cast<std::size_t>(leaf)].leaf_order);
    }
  }
  for (int leaf : res_.index.leaves) {
    const auto e = static_cast<std::size_t>(leaf);
    spec_of_[e] = static_cast<int>(specs_.size());
    specs_.push_back(make_leaf_spec(entries[e], res_));
    for (const auto& r : res_.sources[e]) {
      const std::string k = r->key(res_.index);
      source_keys_[e].push_back(k);
      const auto it = last_writer.find(k);
      backward_[e].push_back(r->kind == RefKind::Channel && it != last_writer.end() && it->second >= entries[e].leaf_order);
    }
    for (const auto& r : res_.effects[e]) effect_keys_[e].push_back(r->key(res_.index));
  }
}

TickEnv Interpreter::initial_env() const
{
  TickEnv env;
  for (const auto& s : specs_) env.leaves.emplace(s.node_id, LeafState::initial(s));
  return env;
}

Status Interpreter::tick(TickEnv& env, Tag tag, const ExternRegistry& externs, std::vector<TraceEvent>* events,
                         EventKey* error_key) const
{
  env.channel_now.clear();
  env.outputs.clear();
  const Status st = tick_node(0, env, tag, externs, events, error_key);
  // Channels that were not written keep their previous value.
  for (const auto& [k, v] : env.channel_now) {
    if (v) env.channel_pre[k] = v;
  }
  if (events != nullptr) {
    for (std::size_t i = 0; i < def_.ports.size(); ++i) {
      const auto it = env.outputs.find(def_.ports[i].name);
      if (it != env.outputs.end() && it->second) {
        events->push_back(port_event(tag, it->first, it->second, {kOutputKeyMajor, static_cast<int>(i)}));
      }
    }
  }
  return st;
}

Status Interpreter::tick_node(int e, TickEnv& env, Tag tag, const ExternRegistry& externs,
                              std::vector<TraceEvent>* events, EventKey* error_key) const
{
  const NodeEntry& en = res_.index.entries[static_cast<std::size_t>(e)];
  const BtNode& n = *en.node;
  if (events != nullptr) events->push_back(invoked_event(tag, en.id, node_kind_name(n.kind), n.label, {en.enter, 0}));

  Status st = Status::Running;
  switch (n.kind) {
    case NodeKind::Sequence:
    case NodeKind::Fallback: {
      const Status go_on = n.kind == NodeKind::Sequence ? Status::Success : Status::Failure;
      st = go_on;
      for (int c : en.children) {
        const Status cs = tick_node(c, env, tag, externs, events, error_key);
        if (cs != go_on) {
          st = cs;
          break;
        }
      }
      break;
    }
    case NodeKind::Parallel: {
      int s = 0;
      int f = 0;
      for (int c : en.children) {
        const Status cs = tick_node(c, env, tag, externs, events, error_key);
        s += cs == Status::Success ? 1 : 0;
        f += cs == Status::Failure ? 1 : 0;
      }
      const int count = static_cast<int>(en.children.size());
      if (s >= n.threshold) {
        st = Status::Success;
      } else if (f >= count - n.threshold + 1) {
        st = Status::Failure;
      }
      break;
    }
    case NodeKind::Task:
    case NodeKind::Condition: {
      const auto idx = static_cast<std::size_t>(e);
      const LeafSpec& spec = specs_[static_cast<std::size_t>(spec_of_[idx])];
      SourceMap sources;
      for (std::size_t i = 0; i < spec.sources.size(); ++i) {
        const std::string& k = source_keys_[idx][i];
        Slot v;
        if (k.starts_with("port:")) {
          if (auto it = env.inputs.find(spec.sources[i].name); it != env.inputs.end()) v = it->second;
        } else if (auto it = env.channel_now.find(k); it != env.channel_now.end() && it->second) {
          v = it->second;
        } else if (backward_[idx][i]) {
          if (auto pit = env.channel_pre.find(k); pit != env.channel_pre.end()) v = pit->second;
        }
        sources.emplace(spec.sources[i].name, std::move(v));
      }
      LeafOutcome out;
      try {
        out = execute_leaf(spec, env.leaves.at(spec.node_id), sources, externs, tag);
      } catch (const RunError&) {
        if (error_key != nullptr) *error_key = {en.exit, 0};
        throw;
      }
      for (const auto& [name, v] : out.emits) {
        for (std::size_t i = 0; i < spec.effects.size(); ++i) {
          if (spec.effects[i].name != name) continue;
          const std::string& k = effect_keys_[idx][i];
          if (k.starts_with("port:")) {
            env.outputs[name] = v;
          } else {
            env.channel_now[k] = v;
          }
        }
      }
      if (out.condition_running && events != nullptr) {
        events->push_back(
          warning_event(tag, en.id, "ConditionRunning", condition_running_message(spec), {en.exit, 1}));
      }
      st = out.success ? Status::Success : out.failure ? Status::Failure : Status::Running;
      break;
    }
  }
  if (st != Status::Running && events != nullptr) events->push_back(status_event(tag, en.id, st, {en.exit, 2}));
  return st;
}

std::pair<Status, TickEnv> tick(const BtDef& def, const TickEnv& env, Tag tag, const ExternRegistry& externs)
{
  const Interpreter interp(def);
  TickEnv next = env;
  const Status st = interp.tick(next, tag, externs);
  return {st, std::move(next)};
}

Trace run_oracle(const BtDef& def, const Scenario& scenario, const ExternRegistry& externs)
{
  const Interpreter interp(def);
  std::vector<const LeafSpec*> leaves;
  for (const auto& l : interp.leaves()) leaves.push_back(&l);
  check_externs(leaves, externs);

  TickEnv env = interp.initial_env();
  Trace trace;
  std::optional<Tag> last;
  for (const auto& st : expand_schedule(scenario)) {
    std::vector<TraceEvent> events;
    std::optional<RunError> error;
    EventKey error_key{};
    bool started = false;
    env.inputs.clear();
    try {
      if (last && !(*last < st.tag)) {
        error_key = {-1, -3};
        throw RunError(RunErrorCode::NonMonotonicTag, "", st.tag,
                       "tag " + tag_string(st.tag) + " does not follow " + tag_string(*last));
      }
      last = st.tag;
      for (const auto& ev : st.events) {
        error_key = {-1, -2};
        const Slot v = bind_input(def.ports, ev, st.tag);
        if (ev.port == "start") {
          started = true;
          events.push_back(port_event(st.tag, "start", std::nullopt, {-1, -1}));
          continue;
        }
        const auto decl = std::find_if(def.ports.begin(), def.ports.end(), [&](const PortDecl& p) { return p.name == ev.port; });
        env.inputs[ev.port] = v;
        events.push_back(port_event(st.tag, ev.port, v, {-1, static_cast<int>(decl - def.ports.begin())}));
      }
      if (started) interp.tick(env, st.tag, externs, &events, &error_key);
    } catch (const RunError& e) {
      error = e;
    }
    close_tag(trace, std::move(events), error, error_key);
    if (error) break;
  }
  return trace;
}

}  // namespace btflow
