#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "btflow/value.hpp"

namespace btflow {

struct SourceSpan
{
  std::string file;
  int start_line = 1;
  int start_col = 1;
  int end_line = 1;
  int end_col = 1;
};

enum class ExprOp {
  Literal,
  Ref,
  Present,
  Not,
  Neg,
  Add,
  Sub,
  Mul,
  Div,
  Mod,
  Eq,
  Ne,
  Lt,
  Le,
  Gt,
  Ge,
  And,
  Or,
  Cond,  // args: condition, then, else
};

struct Expr
{
  ExprOp op = ExprOp::Literal;
  Value literal{false};
  std::string name;  // Ref, Present
  std::vector<Expr> args;
  SourceSpan span;

  static Expr lit(Value v);
  static Expr ref(std::string name);
  static Expr present(std::string name);
  static Expr unary(ExprOp op, Expr operand);
  static Expr binary(ExprOp op, Expr lhs, Expr rhs);
  static Expr cond(Expr c, Expr then_e, Expr else_e);
};

struct Assignment
{
  std::string target;
  Expr value;
  SourceSpan span;
};

struct ScriptStep
{
  std::vector<Assignment> emits;
  std::vector<Assignment> state_updates;
  Status status = Status::Success;
  SourceSpan span;
};

enum class ScriptTail { Loop, Hold };

struct ExternBody
{
  std::string callback;
};

struct ScriptBody
{
  std::vector<ScriptStep> steps;
  ScriptTail tail = ScriptTail::Loop;
};

/// Only valid on conditions.
struct ExprBody
{
  Expr condition;
};

using TaskBody = std::variant<ExternBody, ScriptBody, ExprBody>;

struct StateDecl
{
  std::string name;
  ValueType type = ValueType::Int;
  Value initial{std::int64_t{0}};
  SourceSpan span;
};

struct Ref
{
  std::string name;
  SourceSpan span;
};

struct ChannelDecl
{
  std::string name;
  ValueType type = ValueType::Int;
  SourceSpan span;
};

enum class PortDirection { Input, Output };

struct PortDecl
{
  std::string name;
  PortDirection direction = PortDirection::Input;
  ValueType type = ValueType::Int;
  SourceSpan span;
};

enum class NodeKind { Task, Condition, Sequence, Fallback, Parallel };

bool is_leaf(NodeKind k);
std::string_view node_kind_name(NodeKind k);

/// One node of the tree. Leaf fields are meaningful for Task/Condition,
/// composite fields for Sequence/Fallback/Parallel.
struct BtNode
{
  NodeKind kind = NodeKind::Task;
  SourceSpan span;

  std::string label;
  std::vector<Ref> sources;
  std::vector<Ref> effects;
  std::vector<StateDecl> states;
  TaskBody body = ExternBody{};

  std::vector<ChannelDecl> channels;
  std::vector<BtNode> children;
  int threshold = 0;  // Parallel only

  bool leaf() const { return is_leaf(kind); }
};

struct BtDef
{
  std::string name;
  std::vector<PortDecl> ports;
  BtNode root;
  SourceSpan span;
};

inline constexpr std::string_view kReservedNames[] = {"start", "success", "failure", "running"};
bool is_reserved_name(std::string_view name);

// Node identity: the path of child indices from the root, rendered "r", "r.0", "r.0.2".
using NodePath = std::vector<int>;
std::string node_id(const NodePath& path);
std::optional<NodePath> parse_node_id(std::string_view id);
const BtNode* find_node(const BtDef& def, const NodePath& path);

struct NodeEntry
{
  const BtNode* node = nullptr;
  NodePath path;
  std::string id;
  int parent = -1;
  int depth = 0;
  /// Position of the enter/exit visits in a depth-first Euler tour. Trace
  /// events are ordered by these.
  int enter = 0;
  int exit = 0;
  int leaf_order = -1;  // leaves only: depth-first left-to-right rank
  std::vector<int> children;
};

/// Flattened pre-order view of a tree. Holds pointers into the BtDef.
struct NodeIndex
{
  std::vector<NodeEntry> entries;  // entries[0] is the root
  std::vector<int> leaves;         // entry indices in execution order

  static NodeIndex build(const BtDef& def);
  int find(std::string_view id) const;
  /// Least common ancestor of two entries.
  int lca(int a, int b) const;
  bool is_ancestor(int ancestor, int node) const;
};

/// Structural equality ignoring source spans.
bool same_structure(const Expr& a, const Expr& b);
bool same_structure(const BtNode& a, const BtNode& b);
bool same_structure(const BtDef& a, const BtDef& b);

}  // namespace btflow
