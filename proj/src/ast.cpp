#include "btflow/ast.hpp"

#include <charconv>

namespace btflow {

Expr Expr::lit(Value v)
{
  Expr e;
  e.op = ExprOp::Literal;
  e.literal = std::move(v);
  return e;
}

Expr Expr::ref(std::string name)
{
  Expr e;
  e.op = ExprOp::Ref;
  e.name = std::move(name);
  return e;
}

Expr Expr::present(std::string name)
{
  Expr e;
  e.op = ExprOp::Present;
  e.name = std::move(name);
  return e;
}

Expr Expr::unary(ExprOp op, Expr operand)
{
  Expr e;
  e.op = op;
  e.args.push_back(std::move(operand));
  return e;
}

Expr Expr::binary(ExprOp op, Expr lhs, Expr rhs)
{
  Expr e;
  e.op = op;
  e.args.push_back(std::move(lhs));
  e.args.push_back(std::move(rhs));
  return e;
}

Expr Expr::cond(Expr c, Expr then_e, Expr else_e)
{
  Expr e;
  e.op = ExprOp::Cond;
  e.args.push_back(std::move(c));
  e.args.push_back(std::move(then_e));
  e.args.push_back(std::move(else_e));
  return e;
}

bool is_leaf(NodeKind k) { return k == NodeKind::Task || k == NodeKind::Condition; }

std::string_view node_kind_name(NodeKind k)
{
  switch (k) {
    case NodeKind::Task: return "task";
    case NodeKind::Condition: return "condition";
    case NodeKind::Sequence: return "sequence";
    case NodeKind::Fallback: return "fallback";
    case NodeKind::Parallel: return "parallel";
  }
  return "?";
}

bool is_reserved_name(std::string_view name)
{
  for (auto r : kReservedNames) {
    if (r == name) return true;
  }
  return false;
}

std::string node_id(const NodePath& path)
{
  std::string id = "r";
  for (int i : path) {
    id += '.';
    id += std::to_string(i);
  }
  return id;
}

std::optional<NodePath> parse_node_id(std::string_view id)
{
  if (id.empty() || id[0] != 'r') return std::nullopt;
  NodePath path;
  std::size_t pos = 1;
  while (pos < id.size()) {
    if (id[pos] != '.') return std::nullopt;
    ++pos;
    int v = 0;
    auto [ptr, ec] = std::from_chars(id.data() + pos, id.data() + id.size(), v);
    if (ec != std::errc{} || ptr == id.data() + pos || v < 0) return std::nullopt;
    path.push_back(v);
    pos = static_cast<std::size_t>(ptr - id.data());
  }
  return path;
}

const BtNode* find_node(const BtDef& def, const NodePath& path)
{
  const BtNode* n = &def.root;
  for (int i : path) {
    if (i < 0 || static_cast<std::size_t>(i) >= n->children.size()) return nullptr;
    n = &n->children[static_cast<std::size_t>(i)];
  }
  return n;
}

namespace {

void index_rec(NodeIndex& idx, const BtNode& node, NodePath& path, int parent, int depth, int& clock)
{
  const int self = static_cast<int>(idx.entries.size());
  idx.entries.push_back(NodeEntry{});
  {
    NodeEntry& e = idx.entries.back();
    e.node = &node;
    e.path = path;
    e.id = node_id(path);
    e.parent = parent;
    e.depth = depth;
    e.enter = clock++;
  }
  if (node.leaf()) {
    idx.entries[static_cast<std::size_t>(self)].leaf_order = static_cast<int>(idx.leaves.size());
    idx.leaves.push_back(self);
  }
  for (std::size_t i = 0; i < node.children.size(); ++i) {
    path.push_back(static_cast<int>(i));
    const int child = static_cast<int>(idx.entries.size());
    idx.entries[static_cast<std::size_t>(self)].children.push_back(child);
    index_rec(idx, node.children[i], path, self, depth + 1, clock);
    path.pop_back();
  }
  idx.entries[static_cast<std::size_t>(self)].exit = clock++;
}

}  // namespace

NodeIndex NodeIndex::build(const BtDef& def)
{
  NodeIndex idx;
  NodePath path;
  int clock = 0;
  index_rec(idx, def.root, path, -1, 0, clock);
  return idx;
}

int NodeIndex::find(std::string_view id) const
{
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

bool NodeIndex::is_ancestor(int ancestor, int node) const
{
  while (node >= 0) {
    if (node == ancestor) return true;
    node = entries[static_cast<std::size_t>(node)].parent;
  }
  return false;
}

int NodeIndex::lca(int a, int b) const
{
  while (!is_ancestor(a, b)) a = entries[static_cast<std::size_t>(a)].parent;
  return a;
}

bool same_structure(const Expr& a, const Expr& b)
{
  if (a.op != b.op || a.name != b.name || a.args.size() != b.args.size()) return false;
  if (a.op == ExprOp::Literal && !(a.literal == b.literal)) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!same_structure(a.args[i], b.args[i])) return false;
  }
  return true;
}

namespace {

bool same_assignments(const std::vector<Assignment>& a, const std::vector<Assignment>& b)
{
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].target != b[i].target || !same_structure(a[i].value, b[i].value)) return false;
  }
  return true;
}

bool same_refs(const std::vector<Ref>& a, const std::vector<Ref>& b)
{
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].name != b[i].name) return false;
  }
  return true;
}

bool same_body(const TaskBody& a, const TaskBody& b)
{
  if (a.index() != b.index()) return false;
  if (const auto* ea = std::get_if<ExternBody>(&a)) {
    return ea->callback == std::get<ExternBody>(b).callback;
  }
  if (const auto* xa = std::get_if<ExprBody>(&a)) {
    return same_structure(xa->condition, std::get<ExprBody>(b).condition);
  }
  const auto& sa = std::get<ScriptBody>(a);
  const auto& sb = std::get<ScriptBody>(b);
  if (sa.tail != sb.tail || sa.steps.size() != sb.steps.size()) return false;
  for (std::size_t i = 0; i < sa.steps.size(); ++i) {
    const auto& x = sa.steps[i];
    const auto& y = sb.steps[i];
    if (x.status != y.status || !same_assignments(x.emits, y.emits) ||
        !same_assignments(x.state_updates, y.state_updates)) {
      return false;
    }
  }
  return true;
}

}  // namespace

bool same_structure(const BtNode& a, const BtNode& b)
{
  if (a.kind != b.kind) return false;
  if (a.leaf()) {
    if (a.label != b.label || !same_refs(a.sources, b.sources) || !same_refs(a.effects, b.effects)) return false;
    if (a.states.size() != b.states.size()) return false;
    for (std::size_t i = 0; i < a.states.size(); ++i) {
      const auto& x = a.states[i];
      const auto& y = b.states[i];
      if (x.name != y.name || x.type != y.type || !(x.initial == y.initial)) return false;
    }
    return same_body(a.body, b.body);
  }
  if (a.threshold != b.threshold || a.channels.size() != b.channels.size() ||
      a.children.size() != b.children.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.channels.size(); ++i) {
    if (a.channels[i].name != b.channels[i].name || a.channels[i].type != b.channels[i].type) return false;
  }
  for (std::size_t i = 0; i < a.children.size(); ++i) {
    if (!same_structure(a.children[i], b.children[i])) return false;
  }
  return true;
}

bool same_structure(const BtDef& a, const BtDef& b)
{
  if (a.name != b.name || a.ports.size() != b.ports.size()) return false;
  for (std::size_t i = 0; i < a.ports.size(); ++i) {
    const auto& x = a.ports[i];
    const auto& y = b.ports[i];
    if (x.name != y.name || x.direction != y.direction || x.type != y.type) return false;
  }
  return same_structure(a.root, b.root);
}

}  // namespace btflow
