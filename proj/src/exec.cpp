#include "btflow/exec.hpp"

#include <algorithm>

#include "btflow/expr.hpp"

namespace btflow {

void ExternRegistry::register_extern(const std::string& name, ExternFn fn)
{
  if (fns_.count(name) != 0) {
    throw RunError(RunErrorCode::DuplicateExtern, "", Tag{}, "extern '" + name + "' is already registered");
  }
  fns_.emplace(name, std::move(fn));
}

const ExternFn* ExternRegistry::find(std::string_view name) const
{
  auto it = fns_.find(name);
  return it == fns_.end() ? nullptr : &it->second;
}

std::vector<std::string> ExternRegistry::names() const
{
  std::vector<std::string> out;
  for (const auto& [k, v] : fns_) out.push_back(k);
  return out;
}

LeafSpec make_leaf_spec(const NodeEntry& entry, const Resolution& res)
{
  const BtNode& n = *entry.node;
  LeafSpec spec;
  spec.node_id = entry.id;
  spec.label = n.label;
  spec.is_condition = n.kind == NodeKind::Condition;
  spec.states = n.states;
  spec.body = n.body;
  const auto idx = static_cast<std::size_t>(&entry - res.index.entries.data());
  for (std::size_t i = 0; i < n.sources.size(); ++i) {
    const auto& r = res.sources[idx][i];
    spec.sources.push_back({n.sources[i].name, r ? r->type : ValueType::Int});
  }
  for (std::size_t i = 0; i < n.effects.size(); ++i) {
    const auto& r = res.effects[idx][i];
    spec.effects.push_back({n.effects[i].name, r ? r->type : ValueType::Int});
  }
  return spec;
}

LeafState LeafState::initial(const LeafSpec& spec)
{
  LeafState s;
  for (const auto& d : spec.states) {
    auto v = coerce(d.initial, d.type);
    s.states.insert_or_assign(d.name, v ? *v : d.initial);
  }
  return s;
}

std::string condition_running_message(const LeafSpec& spec)
{
  return "condition '" + spec.label + "' yielded RUNNING; treated as running";
}

namespace {

RunErrorCode map_eval(EvalErrorCode c)
{
  switch (c) {
    case EvalErrorCode::TypeMismatch: return RunErrorCode::TypeMismatch;
    case EvalErrorCode::ReadOfAbsent: return RunErrorCode::ReadOfAbsent;
    case EvalErrorCode::DivisionByZero: return RunErrorCode::DivisionByZero;
    case EvalErrorCode::UnboundIdentifier: return RunErrorCode::UnboundIdentifier;
  }
  return RunErrorCode::TypeMismatch;
}

RunError node_error(RunErrorCode code, const LeafSpec& spec, Tag tag, const std::string& what)
{
  return RunError(code, spec.node_id, tag,
                  std::string(spec.is_condition ? "condition '" : "task '") + spec.label + "' (" + spec.node_id +
                    ") at " + tag_string(tag) + ": " + what);
}

/// Orders emits by effect declaration and converts them to the effect type.
std::vector<std::pair<std::string, Value>> finish_emits(const LeafSpec& spec,
                                                        std::vector<std::pair<std::string, Value>> raw, Tag tag)
{
  std::vector<std::pair<std::string, Value>> out;
  for (const auto& [name, value] : raw) {
    auto it = std::find_if(spec.effects.begin(), spec.effects.end(), [&](const RefSpec& r) { return r.name == name; });
    if (it == spec.effects.end()) {
      throw node_error(RunErrorCode::UndeclaredEffect, spec, tag, "emit to undeclared effect '" + name + "'");
    }
    if (std::any_of(out.begin(), out.end(), [&](const auto& e) { return e.first == name; })) {
      throw node_error(RunErrorCode::UndeclaredEffect, spec, tag, "effect '" + name + "' emitted twice");
    }
    auto v = coerce(value, it->type);
    if (!v) {
      throw node_error(RunErrorCode::TypeMismatch, spec, tag,
                       "value emitted on '" + name + "' is " + std::string(type_name(type_of(value))) +
                         ", expected " + std::string(type_name(it->type)));
    }
    out.emplace_back(name, std::move(*v));
  }
  std::stable_sort(out.begin(), out.end(), [&](const auto& a, const auto& b) {
    auto rank = [&](const std::string& n) {
      return std::find_if(spec.effects.begin(), spec.effects.end(), [&](const RefSpec& r) { return r.name == n; }) -
             spec.effects.begin();
    };
    return rank(a.first) < rank(b.first);
  });
  return out;
}

}  // namespace

LeafOutcome execute_leaf(const LeafSpec& spec, LeafState& state, const SourceMap& sources,
                         const ExternRegistry& externs, Tag tag)
{
  LeafOutcome out;
  std::vector<std::pair<std::string, Value>> raw;

  // Expressions see sources and the pre-invocation state.
  std::map<std::string, Slot, std::less<>> state_slots;
  for (const auto& [k, v] : state.states) state_slots.emplace(k, v);
  const ExprEnv env = [&](std::string_view name) -> const Slot* {
    if (auto it = sources.find(name); it != sources.end()) return &it->second;
    if (auto it = state_slots.find(name); it != state_slots.end()) return &it->second;
    return nullptr;
  };

  try {
    if (const auto* eb = std::get_if<ExternBody>(&spec.body)) {
      const ExternFn* fn = externs.find(eb->callback);
      if (fn == nullptr) {
        throw node_error(RunErrorCode::MissingExtern, spec, tag, "extern '" + eb->callback + "' is not registered");
      }
      ExternCall call{spec.node_id, spec.label, tag, sources, state.states};
      ExternResult r = (*fn)(call);
      raw = std::move(r.emits);
      out.success = r.success;
      out.failure = r.failure;
    } else if (const auto* xb = std::get_if<ExprBody>(&spec.body)) {
      const Value v = eval_expr(xb->condition, env);
      const bool* b = std::get_if<bool>(&v);
      if (b == nullptr) {
        throw node_error(RunErrorCode::TypeMismatch, spec, tag,
                         "condition expression yields " + std::string(type_name(type_of(v))) + ", expected bool");
      }
      out.success = *b;
      out.failure = !*b;
    } else {
      const auto& sb = std::get<ScriptBody>(spec.body);
      const ScriptStep& step = sb.steps[std::min(state.cursor, sb.steps.size() - 1)];
      std::vector<std::pair<std::string, Value>> updates;
      for (const auto& a : step.emits) {
        Value v = eval_expr(a.value, env);
        if (a.target == "success") {
          out.success = true;
        } else if (a.target == "failure") {
          out.failure = true;
        } else {
          raw.emplace_back(a.target, std::move(v));
        }
      }
      for (const auto& a : step.state_updates) updates.emplace_back(a.target, eval_expr(a.value, env));
      out.success = out.success || step.status == Status::Success;
      out.failure = out.failure || step.status == Status::Failure;
      for (auto& [name, v] : updates) {
        auto decl = std::find_if(spec.states.begin(), spec.states.end(), [&](const StateDecl& d) { return d.name == name; });
        if (decl == spec.states.end()) {
          throw node_error(RunErrorCode::UnboundIdentifier, spec, tag, "'" + name + "' is not a state variable");
        }
        auto cv = coerce(v, decl->type);
        if (!cv) {
          throw node_error(RunErrorCode::TypeMismatch, spec, tag,
                           "state '" + name + "' assigned " + std::string(type_name(type_of(v))) + ", expected " +
                             std::string(type_name(decl->type)));
        }
        state.states.insert_or_assign(name, std::move(*cv));
      }
      if (sb.tail == ScriptTail::Loop) {
        state.cursor = (state.cursor + 1) % sb.steps.size();
      } else if (state.cursor + 1 < sb.steps.size()) {
        ++state.cursor;
      }
    }
  } catch (const EvalError& e) {
    throw node_error(map_eval(e.code()), spec, tag, e.what());
  }

  if (out.success && out.failure) {
    throw node_error(RunErrorCode::DoubleStatus, spec, tag, "produced both success and failure");
  }
  out.emits = finish_emits(spec, std::move(raw), tag);
  out.condition_running = spec.is_condition && !out.success && !out.failure;
  return out;
}

void check_externs(const std::vector<const LeafSpec*>& leaves, const ExternRegistry& externs)
{
  for (const LeafSpec* leaf : leaves) {
    if (const auto* eb = std::get_if<ExternBody>(&leaf->body)) {
      if (externs.find(eb->callback) == nullptr) {
        throw RunError(RunErrorCode::MissingExtern, leaf->node_id, Tag{},
                       "extern '" + eb->callback + "' used by '" + leaf->label + "' (" + leaf->node_id +
                         ") is not registered");
      }
    }
  }
}

}  // namespace btflow
