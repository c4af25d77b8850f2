#pragma once

#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "btflow/ast.hpp"
#include "btflow/check.hpp"
#include "btflow/trace.hpp"

namespace btflow {

using SourceMap = std::map<std::string, Slot, std::less<>>;
using StateMap = std::map<std::string, Value, std::less<>>;

struct ExternCall
{
  std::string_view node_id;
  std::string_view label;
  Tag tag;
  const SourceMap& sources;
  StateMap& states;
};

/// What a host callback produced. Setting both flags is a protocol
/// violation reported as DoubleStatus; setting neither means RUNNING.
struct ExternResult
{
  std::vector<std::pair<std::string, Value>> emits;
  bool success = false;
  bool failure = false;

  static ExternResult succeed() { return {{}, true, false}; }
  static ExternResult fail() { return {{}, false, true}; }
  static ExternResult running() { return {}; }
};

using ExternFn = std::function<ExternResult(ExternCall&)>;

/// Host callbacks addressable from `@extern name` bodies. Callbacks must be
/// deterministic functions of their call for runs to be reproducible.
class ExternRegistry
{
public:
  /// Throws RunError(DuplicateExtern) if the name is taken.
  void register_extern(const std::string& name, ExternFn fn);
  const ExternFn* find(std::string_view name) const;
  std::vector<std::string> names() const;

private:
  std::map<std::string, ExternFn, std::less<>> fns_;
};

struct RefSpec
{
  std::string name;
  ValueType type = ValueType::Int;
};

/// Everything needed to run one task/condition body, detached from the AST.
struct LeafSpec
{
  std::string node_id;
  std::string label;
  bool is_condition = false;
  std::vector<StateDecl> states;
  TaskBody body;
  std::vector<RefSpec> sources;
  std::vector<RefSpec> effects;
};

LeafSpec make_leaf_spec(const NodeEntry& entry, const Resolution& res);

struct LeafState
{
  std::size_t cursor = 0;
  StateMap states;

  static LeafState initial(const LeafSpec& spec);
  bool operator==(const LeafState&) const = default;
};

struct LeafOutcome
{
  std::vector<std::pair<std::string, Value>> emits;  // effect declaration order
  bool success = false;
  bool failure = false;
  bool condition_running = false;
};

/// Runs one invocation of a body. Emitted values are coerced to the effect
/// types. Throws RunError (DoubleStatus, TypeMismatch, ReadOfAbsent, ...)
/// carrying the node id and tag.
LeafOutcome execute_leaf(const LeafSpec& spec, LeafState& state, const SourceMap& sources,
                         const ExternRegistry& externs, Tag tag);

/// Throws RunError(MissingExtern) naming the first task whose callback is
/// not registered.
void check_externs(const std::vector<const LeafSpec*>& leaves, const ExternRegistry& externs);

std::string condition_running_message(const LeafSpec& spec);

}  // namespace btflow
