#pragma once

#include <optional>
#include <string>
#include <vector>

#include "btflow/ast.hpp"

namespace btflow {

enum class Severity { Error, Warning };

std::string_view severity_name(Severity s);

struct CheckItem
{
  Severity severity = Severity::Error;
  std::string code;
  std::string node_path;
  std::string message;
  SourceSpan span;
};

struct CheckReport
{
  std::vector<CheckItem> items;

  bool empty() const { return items.empty(); }
  bool has_errors() const;
  /// One JSON object per line: {"severity","code","nodePath","message"}.
  std::string to_jsonl() const;
};

enum class RefKind { InputPort, OutputPort, Channel };

/// What a source/effect name denotes at its point of use.
struct ResolvedRef
{
  RefKind kind = RefKind::InputPort;
  std::string name;
  ValueType type = ValueType::Int;
  int owner = -1;  // channel owner (NodeIndex entry); -1 for ports

  /// Unique identity of the port/channel within one tree, e.g. "port:x" or
  /// "chan:r.0:x".
  std::string key(const NodeIndex& index) const;
};

/// Refs of every leaf, resolved against visible channels and tree ports.
/// Unresolvable refs are left empty.
struct Resolution
{
  NodeIndex index;
  std::vector<std::vector<std::optional<ResolvedRef>>> sources;  // by entry
  std::vector<std::vector<std::optional<ResolvedRef>>> effects;

  static Resolution build(const BtDef& def, CheckReport* report = nullptr);
};

struct WriterConflict
{
  std::string name;  // channel or port name
  bool is_port = false;
  std::string first;   // node id
  std::string second;  // node id
};

/// Pairs of effect-writers to the same channel or output port whose least
/// common ancestor is a Parallel node, ordered by node path.
std::vector<WriterConflict> parallel_writer_conflicts(const BtDef& def);

/// All static violations. An empty report means the tree is compilable.
CheckReport validate(const BtDef& def);

}  // namespace btflow
