#include "btflow/generator.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "btflow/check.hpp"

namespace btflow {

namespace {

class Rng
{
public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  int below(int n) { return n <= 1 ? 0 : static_cast<int>(eng_() % static_cast<std::uint64_t>(n)); }
  bool chance(int percent) { return below(100) < percent; }
  std::int64_t range(std::int64_t lo, std::int64_t hi)
  {
    return lo + static_cast<std::int64_t>(eng_() % static_cast<std::uint64_t>(hi - lo + 1));
  }

private:
  std::mt19937_64 eng_;
};

struct Shape
{
  int tasks = 0;
  int conditions = 0;
  int channels = 0;
};

BtNode gen_structure(Rng& rng, int depth, int max_depth, int max_children, Shape& shape)
{
  BtNode n;
  const bool leaf = depth >= max_depth || (depth > 1 && rng.chance(35));
  if (leaf) {
    if (rng.chance(25)) {
      n.kind = NodeKind::Condition;
      n.label = "C" + std::to_string(shape.conditions++);
    } else {
      n.kind = NodeKind::Task;
      n.label = "T" + std::to_string(shape.tasks++);
    }
    return n;
  }
  const int k = rng.below(3);
  n.kind = k == 0 ? NodeKind::Sequence : k == 1 ? NodeKind::Fallback : NodeKind::Parallel;
  const int count = 1 + rng.below(max_children);
  for (int i = 0; i < count; ++i) n.children.push_back(gen_structure(rng, depth + 1, max_depth, max_children, shape));
  if (n.kind == NodeKind::Parallel) n.threshold = 1 + rng.below(count);
  if (rng.chance(45)) {
    const int nch = 1 + rng.below(2);
    for (int i = 0; i < nch; ++i) {
      n.channels.push_back({"c" + std::to_string(shape.channels++), rng.chance(75) ? ValueType::Int : ValueType::Bool, {}});
    }
  }
  return n;
}

struct Visible
{
  std::string name;
  ValueType type;
  bool readable;
  bool writable;
};

void assign_refs(Rng& rng, BtNode& n, std::vector<Visible> scope)
{
  for (const auto& c : n.channels) scope.push_back({c.name, c.type, true, true});
  if (!n.leaf()) {
    for (auto& c : n.children) assign_refs(rng, c, scope);
    return;
  }
  for (const auto& v : scope) {
    if (v.readable && rng.chance(35)) n.sources.push_back({v.name, {}});
    if (v.writable && rng.chance(n.kind == NodeKind::Task ? 40 : 15)) n.effects.push_back({v.name, {}});
  }
}

BtNode* node_at(BtDef& def, const NodePath& path)
{
  BtNode* n = &def.root;
  for (int i : path) n = &n->children[static_cast<std::size_t>(i)];
  return n;
}

void erase_ref(std::vector<Ref>& refs, const std::string& name)
{
  refs.erase(std::remove_if(refs.begin(), refs.end(), [&](const Ref& r) { return r.name == name; }), refs.end());
}

bool has_ref(const std::vector<Ref>& refs, const std::string& name)
{
  return std::any_of(refs.begin(), refs.end(), [&](const Ref& r) { return r.name == name; });
}

/// Drops refs that would make concurrent branches of a parallel share a
/// channel or output, and channels nobody writes.
void repair(BtDef& def)
{
  const NodeIndex idx = NodeIndex::build(def);
  std::vector<NodePath> paths;
  for (const auto& e : idx.entries) paths.push_back(e.path);
  for (std::size_t a = 0; a < idx.leaves.size(); ++a) {
    for (std::size_t b = a + 1; b < idx.leaves.size(); ++b) {
      const int la = idx.leaves[a];
      const int lb = idx.leaves[b];
      const int anc = idx.lca(la, lb);
      if (idx.entries[static_cast<std::size_t>(anc)].node->kind != NodeKind::Parallel) continue;
      BtNode* na = node_at(def, paths[static_cast<std::size_t>(la)]);
      BtNode* nb = node_at(def, paths[static_cast<std::size_t>(lb)]);
      for (const auto& r : std::vector<Ref>(nb->effects)) {
        if (has_ref(na->effects, r.name) || has_ref(na->sources, r.name)) erase_ref(nb->effects, r.name);
      }
      for (const auto& r : std::vector<Ref>(nb->sources)) {
        if (has_ref(na->effects, r.name)) erase_ref(nb->sources, r.name);
      }
    }
  }

  std::set<std::string> written;
  std::vector<BtNode*> stack{&def.root};
  std::vector<BtNode*> leaves;
  while (!stack.empty()) {
    BtNode* n = stack.back();
    stack.pop_back();
    if (n->leaf()) {
      leaves.push_back(n);
      for (const auto& r : n->effects) written.insert(r.name);
    }
    for (auto& c : n->children) stack.push_back(&c);
  }
  stack = {&def.root};
  while (!stack.empty()) {
    BtNode* n = stack.back();
    stack.pop_back();
    std::erase_if(n->channels, [&](const ChannelDecl& c) { return written.count(c.name) == 0; });
    for (auto& c : n->children) stack.push_back(&c);
  }
  for (BtNode* leaf : leaves) {
    std::erase_if(leaf->sources, [&](const Ref& r) {
      return written.count(r.name) == 0 && r.name.starts_with("c");
    });
  }
}

struct BodyGen
{
  Rng& rng;
  std::map<std::string, ValueType> types;  // sources and states
  std::vector<std::string> sources;
  std::vector<std::string> states;

  std::vector<std::string> of_type(const std::vector<std::string>& names, ValueType t) const
  {
    std::vector<std::string> out;
    for (const auto& n : names) {
      if (types.at(n) == t) out.push_back(n);
    }
    return out;
  }

  Expr int_lit() { return Expr::lit(Value(rng.range(-3, 9))); }

  Expr int_expr()
  {
    const auto ints = of_type(sources, ValueType::Int);
    const auto st = of_type(states, ValueType::Int);
    switch (rng.below(6)) {
      case 0:
      case 1:
        if (!ints.empty()) {
          const std::string& x = ints[static_cast<std::size_t>(rng.below(static_cast<int>(ints.size())))];
          // Occasionally read without a presence guard.
          if (rng.chance(3)) return Expr::binary(ExprOp::Add, Expr::ref(x), int_lit());
          return Expr::cond(Expr::present(x), Expr::binary(ExprOp::Add, Expr::ref(x), int_lit()), int_lit());
        }
        return int_lit();
      case 2:
        if (!st.empty()) {
          const std::string& s = st[static_cast<std::size_t>(rng.below(static_cast<int>(st.size())))];
          return Expr::binary(ExprOp::Mul, Expr::ref(s), int_lit());
        }
        return int_lit();
      case 3:
        if (!st.empty() && rng.chance(5)) {
          const std::string& s = st[static_cast<std::size_t>(rng.below(static_cast<int>(st.size())))];
          return Expr::binary(ExprOp::Mod, Expr::lit(Value(std::int64_t{100})),
                              Expr::binary(ExprOp::Sub, Expr::ref(s), Expr::lit(Value(std::int64_t{rng.range(3, 40)}))));
        }
        return int_lit();
      default: return int_lit();
    }
  }

  Expr bool_expr()
  {
    const auto bools = of_type(sources, ValueType::Bool);
    const auto ints = of_type(sources, ValueType::Int);
    const auto st = of_type(states, ValueType::Int);
    switch (rng.below(5)) {
      case 0:
        if (!bools.empty()) {
          const std::string& b = bools[static_cast<std::size_t>(rng.below(static_cast<int>(bools.size())))];
          return Expr::binary(ExprOp::And, Expr::present(b), rng.chance(50) ? Expr::ref(b) : Expr::unary(ExprOp::Not, Expr::ref(b)));
        }
        return Expr::lit(Value(rng.chance(50)));
      case 1:
        if (!ints.empty()) {
          const std::string& x = ints[static_cast<std::size_t>(rng.below(static_cast<int>(ints.size())))];
          return Expr::binary(ExprOp::And, Expr::present(x),
                              Expr::binary(rng.chance(50) ? ExprOp::Gt : ExprOp::Le, Expr::ref(x), int_lit()));
        }
        return Expr::lit(Value(rng.chance(50)));
      case 2:
        if (!st.empty()) {
          const std::string& s = st[static_cast<std::size_t>(rng.below(static_cast<int>(st.size())))];
          return Expr::binary(ExprOp::Eq,
                              Expr::binary(ExprOp::Mod, Expr::ref(s), Expr::lit(Value(std::int64_t{rng.range(2, 4)}))),
                              Expr::lit(Value(std::int64_t{0})));
        }
        return Expr::lit(Value(rng.chance(50)));
      case 3:
        if (!sources.empty()) {
          const std::string& x = sources[static_cast<std::size_t>(rng.below(static_cast<int>(sources.size())))];
          return rng.chance(50) ? Expr::present(x) : Expr::unary(ExprOp::Not, Expr::present(x));
        }
        return Expr::lit(Value(rng.chance(50)));
      default: return Expr::lit(Value(rng.chance(50)));
    }
  }

  Expr expr_of(ValueType t) { return t == ValueType::Bool ? bool_expr() : int_expr(); }

  Status status(bool condition)
  {
    const int r = rng.below(100);
    if (condition) return r < 55 ? Status::Success : Status::Failure;
    return r < 50 ? Status::Success : r < 75 ? Status::Failure : Status::Running;
  }
};

void gen_body(Rng& rng, BtNode& n, const std::map<std::string, ValueType>& ref_types)
{
  BodyGen g{rng, {}, {}, {}};
  for (const auto& s : n.sources) {
    g.sources.push_back(s.name);
    g.types[s.name] = ref_types.at(s.name);
  }
  const bool condition = n.kind == NodeKind::Condition;
  if (condition && n.effects.empty() && rng.chance(50)) {
    n.body = ExprBody{g.bool_expr()};
    return;
  }
  if (rng.chance(40)) {
    n.states.push_back({"n", ValueType::Int, Value(std::int64_t{0}), {}});
    g.states.push_back("n");
    g.types["n"] = ValueType::Int;
  }
  ScriptBody body;
  body.tail = rng.chance(70) ? ScriptTail::Loop : ScriptTail::Hold;
  const int steps = 1 + rng.below(3);
  for (int i = 0; i < steps; ++i) {
    ScriptStep step;
    for (const auto& e : n.effects) {
      if (rng.chance(75)) step.emits.push_back({e.name, g.expr_of(ref_types.at(e.name)), {}});
    }
    for (const auto& s : n.states) {
      if (rng.chance(80)) {
        step.state_updates.push_back(
          {s.name, Expr::binary(ExprOp::Add, Expr::ref(s.name), Expr::lit(Value(std::int64_t{1 + rng.below(2)}))), {}});
      }
    }
    step.status = g.status(condition);
    // A rare protocol violation: both statuses in one step.
    if (!condition && rng.chance(1)) {
      step.status = Status::Success;
      step.emits.push_back({"failure", Expr::lit(Value(true)), {}});
    }
    body.steps.push_back(std::move(step));
  }
  n.body = std::move(body);
}

void gen_bodies(Rng& rng, BtNode& n, std::map<std::string, ValueType> types)
{
  for (const auto& c : n.channels) types[c.name] = c.type;
  if (n.leaf()) {
    gen_body(rng, n, types);
    return;
  }
  for (auto& c : n.children) gen_bodies(rng, c, types);
}

BtDef attempt(Rng& rng, int max_depth, int max_children)
{
  BtDef def;
  def.name = "Gen";
  Shape shape;
  def.root = gen_structure(rng, 1, max_depth, max_children, shape);

  std::vector<Visible> scope;
  if (max_depth > 1 || rng.chance(50)) {
    const int inputs = rng.below(3);
    for (int i = 0; i < inputs; ++i) {
      const ValueType t = rng.chance(70) ? ValueType::Int : ValueType::Bool;
      def.ports.push_back({"in" + std::to_string(i), PortDirection::Input, t, {}});
      scope.push_back({def.ports.back().name, t, true, false});
    }
    if (rng.chance(50)) {
      def.ports.push_back({"out0", PortDirection::Output, ValueType::Int, {}});
      scope.push_back({"out0", ValueType::Int, false, true});
    }
  }
  assign_refs(rng, def.root, scope);
  repair(def);

  std::map<std::string, ValueType> types;
  for (const auto& p : def.ports) types[p.name] = p.type;
  gen_bodies(rng, def.root, types);
  return def;
}

}  // namespace

BtDef gen_random_def(std::uint64_t seed, int max_depth, int max_children)
{
  Rng rng(seed);
  max_depth = std::max(1, max_depth);
  max_children = std::max(1, max_children);
  for (int i = 0; i < 100; ++i) {
    BtDef def = attempt(rng, max_depth, max_children);
    if (validate(def).empty()) return def;
  }
  // Fallback that always validates.
  BtDef def;
  def.name = "Gen";
  def.root.kind = NodeKind::Task;
  def.root.label = "T0";
  def.root.body = ScriptBody{{ScriptStep{}}, ScriptTail::Loop};
  return def;
}

Scenario gen_random_scenario(const BtDef& def, std::uint64_t seed, int ticks)
{
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  Scenario s;
  s.timers.push_back({0, 250, "start"});
  s.horizon_ms = std::int64_t{250} * ticks;
  for (int t = 0; t < ticks; ++t) {
    for (const auto& p : def.ports) {
      if (p.direction != PortDirection::Input || !rng.chance(40)) continue;
      Value v = p.type == ValueType::Bool ? Value(rng.chance(50)) : Value(rng.range(-5, 20));
      s.injections.push_back({std::int64_t{250} * t, p.name, v});
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Syntax generator for round trips.

namespace {

std::string ident(Rng& rng)
{
  static const char* const names[] = {"a", "b", "x", "y", "speed", "jobId", "ready", "k2", "_t", "pos_x"};
  return names[rng.below(10)];
}

Value any_literal(Rng& rng)
{
  switch (rng.below(5)) {
    case 0: return Value(rng.chance(50));
    case 1: return Value(rng.range(-1000000, 1000000));
    case 2: {
      const double mant = static_cast<double>(rng.range(-99999, 99999));
      const double d = mant / static_cast<double>(1 + rng.below(1000));
      return Value(d);
    }
    case 3: {
      static const char* const strs[] = {"", "hello", "a \"quoted\" word", "tab\there", "back\\slash", "line\nbreak", "\x01"};
      return Value(std::string(strs[rng.below(7)]));
    }
    default: return Value(std::int64_t{rng.range(0, 9)});
  }
}

Expr any_expr(Rng& rng, int depth)
{
  if (depth <= 0 || rng.chance(30)) {
    switch (rng.below(3)) {
      case 0: return Expr::lit(any_literal(rng));
      case 1: return Expr::ref(ident(rng));
      default: return Expr::present(ident(rng));
    }
  }
  static const ExprOp binops[] = {ExprOp::Add, ExprOp::Sub, ExprOp::Mul, ExprOp::Div, ExprOp::Mod,
                                  ExprOp::Eq,  ExprOp::Ne,  ExprOp::Lt,  ExprOp::Le,  ExprOp::Gt,
                                  ExprOp::Ge,  ExprOp::And, ExprOp::Or};
  switch (rng.below(4)) {
    case 0: return Expr::unary(rng.chance(50) ? ExprOp::Not : ExprOp::Neg, any_expr(rng, depth - 1));
    case 1: return Expr::cond(any_expr(rng, depth - 1), any_expr(rng, depth - 1), any_expr(rng, depth - 1));
    default: return Expr::binary(binops[rng.below(13)], any_expr(rng, depth - 1), any_expr(rng, depth - 1));
  }
}

ValueType any_type(Rng& rng)
{
  static const ValueType types[] = {ValueType::Bool, ValueType::Int, ValueType::Float, ValueType::String};
  return types[rng.below(4)];
}

std::vector<Ref> any_refs(Rng& rng)
{
  std::vector<Ref> out;
  const int n = rng.below(3);
  for (int i = 0; i < n; ++i) out.push_back({ident(rng), {}});
  return out;
}

BtNode any_node(Rng& rng, int depth)
{
  BtNode n;
  if (depth >= 3 || rng.chance(40)) {
    n.kind = rng.chance(60) ? NodeKind::Task : NodeKind::Condition;
    static const char* const labels[] = {"Move", "Has Job?", "Pick \"up\"", "A", "Stop robot", "uni\xC3\xA9"};
    n.label = labels[rng.below(6)];
    n.sources = any_refs(rng);
    n.effects = any_refs(rng);
    if (rng.chance(30)) {
      const int ns = 1 + rng.below(2);
      for (int i = 0; i < ns; ++i) n.states.push_back({"s" + std::to_string(i), ValueType::Int, any_literal(rng), {}});
    }
    switch (rng.below(3)) {
      case 0: n.body = ExternBody{ident(rng)}; break;
      case 1: n.body = ExprBody{any_expr(rng, 3)}; break;
      default: {
        ScriptBody b;
        b.tail = rng.chance(50) ? ScriptTail::Loop : ScriptTail::Hold;
        const int steps = 1 + rng.below(3);
        for (int i = 0; i < steps; ++i) {
          ScriptStep st;
          const int ne = rng.below(3);
          for (int k = 0; k < ne; ++k) st.emits.push_back({ident(rng), any_expr(rng, 2), {}});
          const int nu = rng.below(2);
          for (int k = 0; k < nu; ++k) st.state_updates.push_back({ident(rng), any_expr(rng, 2), {}});
          const int s = rng.below(3);
          st.status = s == 0 ? Status::Success : s == 1 ? Status::Failure : Status::Running;
          b.steps.push_back(std::move(st));
        }
        n.body = std::move(b);
      }
    }
    return n;
  }
  const int k = rng.below(3);
  n.kind = k == 0 ? NodeKind::Sequence : k == 1 ? NodeKind::Fallback : NodeKind::Parallel;
  const int count = 1 + rng.below(4);
  for (int i = 0; i < count; ++i) n.children.push_back(any_node(rng, depth + 1));
  if (n.kind == NodeKind::Parallel) n.threshold = 1 + rng.below(count);
  const int nch = rng.below(3);
  for (int i = 0; i < nch; ++i) n.channels.push_back({ident(rng), any_type(rng), {}});
  return n;
}

}  // namespace

BtDef gen_random_syntax(std::uint64_t seed)
{
  Rng rng(seed);
  BtDef def;
  def.name = rng.chance(50) ? "AGVBehavior" : "T" + std::to_string(rng.below(100));
  const int np = rng.below(4);
  std::set<std::string> taken;
  for (int i = 0; i < np; ++i) {
    std::string name = ident(rng);
    if (!taken.insert(name).second) continue;
    def.ports.push_back({name, rng.chance(50) ? PortDirection::Input : PortDirection::Output, any_type(rng), {}});
  }
  def.root = any_node(rng, 0);
  return def;
}

}  // namespace btflow
