#include "btflow/translator.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include "btflow/check.hpp"

namespace btflow {

namespace {

constexpr std::int64_t kEndOfTag = std::int64_t{1} << 40;

struct ChannelUse
{
  std::vector<int> writers;  // leaf entries in execution order
  std::vector<int> readers;
};

class Builder
{
public:
  Builder(const BtDef& def, const TranslateOptions& options)
      : def_(def), options_(options), res_(Resolution::build(def))
  {
  }

  ReactorGraph build()
  {
    const auto& entries = res_.index.entries;
    g_.name = def_.name;
    g_.tree_ports = def_.ports;
    for (const auto& e : entries) g_.nodes.push_back({e.id, e.node->label, e.node->kind, e.enter, e.exit});

    block_.assign(entries.size(), -1);
    start_.assign(entries.size(), -1);
    success_.assign(entries.size(), -1);
    failure_.assign(entries.size(), -1);
    sources_.resize(entries.size());
    effects_.resize(entries.size());

    g_.tree_block = add_block(BlockKind::Tree, def_.name, -1, -1);
    g_.start_port = add_port(g_.tree_block, "start", PortDirection::Input, true, ValueType::Bool, PortRole::TreeInput);
    const int tree_success = add_port(g_.tree_block, "success", PortDirection::Output, true, ValueType::Bool);
    const int tree_failure = add_port(g_.tree_block, "failure", PortDirection::Output, true, ValueType::Bool);
    for (std::size_t i = 0; i < def_.ports.size(); ++i) {
      const auto& p = def_.ports[i];
      const bool in = p.direction == PortDirection::Input;
      const int port = add_port(g_.tree_block, p.name, p.direction, false, p.type,
                                in ? PortRole::TreeInput : PortRole::TreeOutput);
      g_.ports[static_cast<std::size_t>(port)].decl = static_cast<int>(i);
    }

    build_node(0, g_.tree_block);
    connect(g_.start_port, start_[0]);
    connect(success_[0], tree_success);
    connect(failure_[0], tree_failure);

    wire_inputs();
    wire_outputs();
    wire_channels();

    g_.top_order = topological_order(g_);
    return std::move(g_);
  }

private:
  const NodeEntry& entry(int e) const { return res_.index.entries[static_cast<std::size_t>(e)]; }

  int add_block(BlockKind kind, std::string name, int node, int parent)
  {
    GraphBlock b;
    b.kind = kind;
    b.name = std::move(name);
    b.node = node;
    b.node_id = node >= 0 ? entry(node).id : "";
    b.parent = parent;
    g_.blocks.push_back(std::move(b));
    return static_cast<int>(g_.blocks.size()) - 1;
  }

  int add_port(int block, std::string name, PortDirection dir, bool pure, ValueType type,
               PortRole role = PortRole::None, int node = -1)
  {
    GraphPort p;
    p.name = std::move(name);
    p.direction = dir;
    p.pure = pure;
    p.type = type;
    p.block = block;
    p.role = role;
    p.node = node;
    g_.ports.push_back(std::move(p));
    const int idx = static_cast<int>(g_.ports.size()) - 1;
    g_.blocks[static_cast<std::size_t>(block)].ports.push_back(idx);
    return idx;
  }

  void connect(int from, int to) { g_.connections.push_back({from, to}); }

  void add_reaction(int block, ReactionKind kind, std::vector<int> triggers, std::vector<int> sources,
                    std::vector<int> effects, EventKey priority)
  {
    g_.reactions.push_back({block, kind, std::move(triggers), std::move(sources), std::move(effects), priority});
  }

  /// Creates a merge block with `n` inputs inside `parent`; returns the block.
  int add_merge(int parent, std::string name, MergeMode mode, int n, bool pure, ValueType type, int node,
                EventKey priority, std::string channel = {})
  {
    const int b = add_block(BlockKind::Merge, std::move(name), node, parent);
    auto& blk = g_.blocks[static_cast<std::size_t>(b)];
    blk.mode = mode;
    blk.arity = n;
    blk.channel = std::move(channel);
    std::vector<int> ins;
    for (int i = 0; i < n; ++i) ins.push_back(add_port(b, "in" + std::to_string(i), PortDirection::Input, pure, type));
    const int out = add_port(b, "out", PortDirection::Output, pure, type);
    add_reaction(b, ReactionKind::Merge, ins, {}, {out}, priority);
    return b;
  }

  int merge_input(int merge, int i) const { return g_.blocks[static_cast<std::size_t>(merge)].ports[static_cast<std::size_t>(i)]; }
  int merge_output(int merge) const { return g_.blocks[static_cast<std::size_t>(merge)].ports.back(); }

  void build_node(int e, int parent_block)
  {
    const BtNode& n = *entry(e).node;
    const std::string& id = entry(e).id;
    std::string prefix;
    switch (n.kind) {
      case NodeKind::Task: prefix = "task_"; break;
      case NodeKind::Condition: prefix = "cond_"; break;
      case NodeKind::Sequence: prefix = "seq_"; break;
      case NodeKind::Fallback: prefix = "fb_"; break;
      case NodeKind::Parallel: prefix = "par_"; break;
    }
    const int b = add_block(n.leaf() ? BlockKind::Task : BlockKind::Composite, prefix + id, e, parent_block);
    block_[static_cast<std::size_t>(e)] = b;
    start_[static_cast<std::size_t>(e)] =
      add_port(b, "start", PortDirection::Input, true, ValueType::Bool, PortRole::NodeStart, e);
    success_[static_cast<std::size_t>(e)] =
      add_port(b, "success", PortDirection::Output, true, ValueType::Bool, PortRole::NodeSuccess, e);
    failure_[static_cast<std::size_t>(e)] =
      add_port(b, "failure", PortDirection::Output, true, ValueType::Bool, PortRole::NodeFailure, e);

    if (n.leaf()) {
      g_.blocks[static_cast<std::size_t>(b)].leaf = static_cast<int>(g_.leaves.size());
      g_.leaves.push_back(make_leaf_spec(entry(e), res_));
      const LeafSpec& spec = g_.leaves.back();
      std::vector<int> src_ports;
      std::vector<int> eff_ports{success_[static_cast<std::size_t>(e)], failure_[static_cast<std::size_t>(e)]};
      std::set<std::string> source_names;
      for (const auto& s : spec.sources) {
        const int p = add_port(b, s.name, PortDirection::Input, false, s.type);
        sources_[static_cast<std::size_t>(e)][s.name] = p;
        source_names.insert(s.name);
        src_ports.push_back(p);
      }
      for (const auto& s : spec.effects) {
        // A ref that is both read and written gets a primed output port.
        const std::string pname = source_names.count(s.name) != 0 ? s.name + "'" : s.name;
        const int p = add_port(b, pname, PortDirection::Output, false, s.type);
        effects_[static_cast<std::size_t>(e)][s.name] = p;
        eff_ports.push_back(p);
      }
      add_reaction(b, ReactionKind::TaskBody, {start_[static_cast<std::size_t>(e)]}, src_ports, eff_ports,
                   {entry(e).enter, 0});
      return;
    }
    for (int c : entry(e).children) build_node(c, b);
    wire_status(e);
  }

  void wire_status(int e)
  {
    const BtNode& n = *entry(e).node;
    const auto& kids = entry(e).children;
    const int count = static_cast<int>(kids.size());
    const int b = block_[static_cast<std::size_t>(e)];
    const auto at = [](const std::vector<int>& v, int i) { return v[static_cast<std::size_t>(i)]; };
    const EventKey after{entry(e).exit, 0};

    if (n.kind == NodeKind::Parallel) {
      for (int c : kids) connect(at(start_, e), at(start_, c));
      const int col = add_block(BlockKind::ParCollector, "collect_" + entry(e).id, e, b);
      auto& blk = g_.blocks[static_cast<std::size_t>(col)];
      blk.threshold = n.threshold;
      blk.arity = count;
      std::vector<int> ins;
      for (int i = 0; i < count; ++i) {
        const int s = add_port(col, "s" + std::to_string(i), PortDirection::Input, true, ValueType::Bool);
        const int f = add_port(col, "f" + std::to_string(i), PortDirection::Input, true, ValueType::Bool);
        connect(at(success_, at(kids, i)), s);
        connect(at(failure_, at(kids, i)), f);
        ins.push_back(s);
        ins.push_back(f);
      }
      const int s_out = add_port(col, "success", PortDirection::Output, true, ValueType::Bool);
      const int f_out = add_port(col, "failure", PortDirection::Output, true, ValueType::Bool);
      connect(s_out, at(success_, e));
      connect(f_out, at(failure_, e));
      add_reaction(col, ReactionKind::Collect, ins, {}, {s_out, f_out}, after);
      return;
    }

    // Sequence advances on success and fails on any failure; fallback is the
    // mirror image.
    bool advance_on_success = n.kind == NodeKind::Sequence;
    if (n.kind == NodeKind::Fallback && options_.fault == TranslateFault::SwapFallbackStatus) {
      advance_on_success = true;
    }
    const std::vector<int>& advance = advance_on_success ? success_ : failure_;
    const std::vector<int>& stop = advance_on_success ? failure_ : success_;
    const int done = advance_on_success ? at(success_, e) : at(failure_, e);
    const int halted = advance_on_success ? at(failure_, e) : at(success_, e);

    connect(at(start_, e), at(start_, at(kids, 0)));
    for (int i = 0; i < count; ++i) {
      const int c = at(kids, i);
      connect(at(advance, c), i + 1 < count ? at(start_, at(kids, i + 1)) : done);
    }
    const std::string mname = std::string(advance_on_success ? "fail_" : "succ_") + entry(e).id;
    const int m = add_merge(b, mname, MergeMode::AtMostOne, count, true, ValueType::Bool, e, after);
    for (int i = 0; i < count; ++i) connect(at(stop, at(kids, i)), merge_input(m, i));
    connect(merge_output(m), halted);
  }

  /// Ancestors of `leaf` strictly below `owner` (-1 = the tree), top-down.
  std::vector<int> chain_below(int owner, int leaf) const
  {
    std::vector<int> chain;
    for (int a = entry(leaf).parent; a >= 0 && a != owner; a = entry(a).parent) chain.push_back(a);
    std::reverse(chain.begin(), chain.end());
    return chain;
  }

  /// Forwards `from` down through the composites between `owner` and `leaf`
  /// into the leaf's source port. Shared routes reuse forwarded ports.
  void route_down(int from, int owner, int leaf, const std::string& ref, const std::string& name, ValueType type,
                  bool shared)
  {
    int prev = from;
    for (int a : chain_below(owner, leaf)) {
      const int b = block_[static_cast<std::size_t>(a)];
      const auto key = std::make_pair(b, name);
      if (shared) {
        if (auto it = forwarded_.find(key); it != forwarded_.end()) {
          prev = it->second;
          continue;
        }
      }
      const int p = add_port(b, name, PortDirection::Input, false, type);
      connect(prev, p);
      if (shared) forwarded_[key] = p;
      prev = p;
    }
    connect(prev, sources_[static_cast<std::size_t>(leaf)].at(ref));
  }

  /// Forwards a leaf's effect up to the child of `owner`; returns the
  /// outermost forwarded port.
  int route_up(int owner, int leaf, const std::string& ref, const std::string& name, ValueType type)
  {
    int prev = effects_[static_cast<std::size_t>(leaf)].at(ref);
    auto chain = chain_below(owner, leaf);
    std::reverse(chain.begin(), chain.end());
    for (int a : chain) {
      const int p = add_port(block_[static_cast<std::size_t>(a)], name, PortDirection::Output, false, type);
      connect(prev, p);
      prev = p;
    }
    return prev;
  }

  void wire_inputs()
  {
    for (int leaf : res_.index.leaves) {
      const auto& refs = res_.sources[static_cast<std::size_t>(leaf)];
      for (const auto& r : refs) {
        if (!r || r->kind != RefKind::InputPort) continue;
        route_down(g_.find_port(g_.tree_block, r->name), -1, leaf, r->name, r->name, r->type, true);
      }
    }
  }

  void wire_outputs()
  {
    for (const auto& p : def_.ports) {
      if (p.direction != PortDirection::Output) continue;
      std::vector<int> writers;
      for (int leaf : res_.index.leaves) {
        for (const auto& r : res_.effects[static_cast<std::size_t>(leaf)]) {
          if (r && r->kind == RefKind::OutputPort && r->name == p.name) writers.push_back(leaf);
        }
      }
      if (writers.empty()) continue;
      const int tree_port = g_.find_port(g_.tree_block, p.name);
      if (writers.size() == 1) {
        connect(route_up(-1, writers[0], p.name, p.name, p.type), tree_port);
        continue;
      }
      const int m = add_merge(g_.tree_block, "out_" + p.name, MergeMode::LatestWins, static_cast<int>(writers.size()),
                              false, p.type, -1, {kEndOfTag, 0}, p.name);
      // Latest writer in execution order has the highest priority.
      for (std::size_t i = 0; i < writers.size(); ++i) {
        const int w = writers[writers.size() - 1 - i];
        connect(route_up(-1, w, p.name, p.name + "<-" + entry(w).id, p.type), merge_input(m, static_cast<int>(i)));
      }
      connect(merge_output(m), tree_port);
    }
  }

  std::string pre_name(const std::string& channel, int owner) const
  {
    int same = 0;
    for (const auto& e : res_.index.entries) {
      for (const auto& c : e.node->channels) same += c.name == channel ? 1 : 0;
    }
    return same > 1 ? "Pre_" + channel + "@" + entry(owner).id : "Pre_" + channel;
  }

  void wire_channels()
  {
    for (std::size_t oi = 0; oi < res_.index.entries.size(); ++oi) {
      const int owner = static_cast<int>(oi);
      for (const auto& decl : entry(owner).node->channels) {
        ChannelUse use;
        for (int leaf : res_.index.leaves) {
          for (const auto& r : res_.effects[static_cast<std::size_t>(leaf)]) {
            if (r && r->kind == RefKind::Channel && r->owner == owner && r->name == decl.name) use.writers.push_back(leaf);
          }
          for (const auto& r : res_.sources[static_cast<std::size_t>(leaf)]) {
            if (r && r->kind == RefKind::Channel && r->owner == owner && r->name == decl.name) use.readers.push_back(leaf);
          }
        }
        wire_channel(owner, decl, use);
      }
    }
  }

  void wire_channel(int owner, const ChannelDecl& decl, const ChannelUse& use)
  {
    const auto order = [&](int leaf) { return entry(leaf).leaf_order; };
    const auto needs_backward = [&](int r) {
      return std::any_of(use.writers.begin(), use.writers.end(), [&](int w) { return order(w) >= order(r); });
    };
    const bool needs_pre = std::any_of(use.readers.begin(), use.readers.end(), needs_backward);
    const int ob = block_[static_cast<std::size_t>(owner)];
    const std::string key = "chan:" + entry(owner).id + ":" + decl.name;

    std::map<int, int> up;
    for (int w : use.writers) {
      const bool feeds_reader =
        std::any_of(use.readers.begin(), use.readers.end(), [&](int r) { return order(w) < order(r); });
      if (!feeds_reader && !needs_pre) continue;
      up[w] = route_up(owner, w, decl.name, decl.name + "<-" + entry(w).id, decl.type);
    }

    int pre_out = -1;
    if (needs_pre) {
      const int pre = add_block(BlockKind::Pre, pre_name(decl.name, owner), owner, ob);
      g_.blocks[static_cast<std::size_t>(pre)].channel = key;
      const int pstart = add_port(pre, "start", PortDirection::Input, true, ValueType::Bool);
      const int pin = add_port(pre, "in", PortDirection::Input, false, decl.type);
      pre_out = add_port(pre, "out", PortDirection::Output, false, decl.type);
      add_reaction(pre, ReactionKind::PreEmit, {pstart}, {}, {pre_out}, {entry(owner).enter, 0});
      add_reaction(pre, ReactionKind::PreStore, {pin}, {}, {}, {entry(owner).exit, 1});
      connect(start_[static_cast<std::size_t>(owner)], pstart);
      // The buffer takes the final value of the tag: latest writer wins.
      if (use.writers.size() == 1) {
        connect(up.at(use.writers[0]), pin);
      } else {
        const int m = add_merge(ob, "final_" + decl.name + "@" + entry(owner).id, MergeMode::LatestWins,
                                static_cast<int>(use.writers.size()), false, decl.type, owner, {entry(owner).exit, 0},
                                key);
        for (std::size_t i = 0; i < use.writers.size(); ++i) {
          connect(up.at(use.writers[use.writers.size() - 1 - i]), merge_input(m, static_cast<int>(i)));
        }
        connect(merge_output(m), pin);
      }
    }

    for (int r : use.readers) {
      std::vector<int> inputs;
      for (auto it = use.writers.rbegin(); it != use.writers.rend(); ++it) {
        if (order(*it) < order(r)) inputs.push_back(up.at(*it));
      }
      if (needs_backward(r)) inputs.push_back(pre_out);
      if (inputs.empty()) continue;
      int src = inputs[0];
      if (inputs.size() > 1) {
        const int m = add_merge(ob, "read_" + decl.name + "->" + entry(r).id, MergeMode::LatestWins,
                                static_cast<int>(inputs.size()), false, decl.type, r, {entry(r).enter, -1}, key);
        for (std::size_t i = 0; i < inputs.size(); ++i) connect(inputs[i], merge_input(m, static_cast<int>(i)));
        src = merge_output(m);
      }
      route_down(src, owner, r, decl.name, decl.name + "->" + entry(r).id, decl.type, false);
    }
  }

  const BtDef& def_;
  TranslateOptions options_;
  Resolution res_;
  ReactorGraph g_;
  std::vector<int> block_;
  std::vector<int> start_;
  std::vector<int> success_;
  std::vector<int> failure_;
  std::vector<std::map<std::string, int>> sources_;
  std::vector<std::map<std::string, int>> effects_;
  std::map<std::pair<int, std::string>, int> forwarded_;
};

}  // namespace

ReactorGraph translate(const BtDef& def, const TranslateOptions& options)
{
  const CheckReport report = validate(def);
  if (report.has_errors()) {
    std::string msg = "cannot translate '" + def.name + "':";
    for (const auto& i : report.items) {
      if (i.severity == Severity::Error) msg += "\n  " + i.node_path + ": " + i.message;
    }
    throw std::invalid_argument(msg);
  }
  return Builder(def, options).build();
}

std::vector<std::string> execution_order(const BtDef& def)
{
  const NodeIndex idx = NodeIndex::build(def);
  std::vector<std::string> out;
  for (int leaf : idx.leaves) out.push_back(idx.entries[static_cast<std::size_t>(leaf)].id);
  return out;
}

// ---------------------------------------------------------------------------
// DOT export

namespace {

std::string dot_quote(std::string_view s)
{
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out.push_back(c);
  }
  return out + "\"";
}

std::string record_escape(std::string_view s)
{
  std::string out;
  for (char c : s) {
    if (c == '{' || c == '}' || c == '|' || c == '<' || c == '>' || c == '"' || c == '\\' || c == ' ') {
      out.push_back('\\');
    }
    out.push_back(c);
  }
  return out;
}

std::string join_refs(const std::vector<Ref>& refs)
{
  std::string s;
  for (std::size_t i = 0; i < refs.size(); ++i) s += (i != 0 ? ", " : "") + refs[i].name;
  return s;
}

void dot_tree_node(std::string& out, const NodeIndex& idx, int e)
{
  const NodeEntry& en = idx.entries[static_cast<std::size_t>(e)];
  const BtNode& n = *en.node;
  std::string attrs;
  switch (n.kind) {
    case NodeKind::Task:
    case NodeKind::Condition: {
      std::string label = n.label;
      if (!n.sources.empty()) label += "\n(" + join_refs(n.sources) + ")";
      if (!n.effects.empty()) label += "\n-> (" + join_refs(n.effects) + ")";
      attrs = std::string("shape=") + (n.kind == NodeKind::Task ? "box" : "ellipse") + ", label=" + dot_quote(label);
      break;
    }
    case NodeKind::Sequence: attrs = "shape=box, style=filled, fillcolor=lightgrey, label=\"\xE2\x86\x92\""; break;
    case NodeKind::Fallback: attrs = "shape=box, style=filled, fillcolor=lightgrey, label=\"?\""; break;
    case NodeKind::Parallel:
      attrs = "shape=box, style=filled, fillcolor=lightgrey, label=" +
              dot_quote("\xE2\x87\x89 M=" + std::to_string(n.threshold));
      break;
  }
  if (!n.channels.empty()) {
    std::string ch;
    for (const auto& c : n.channels) ch += (ch.empty() ? "" : ", ") + c.name + ": " + std::string(type_name(c.type));
    attrs += ", xlabel=" + dot_quote("channels: " + ch);
  }
  out += "  " + dot_quote(en.id) + " [" + attrs + "];\n";
  for (int c : en.children) {
    dot_tree_node(out, idx, c);
    out += "  " + dot_quote(en.id) + " -> " + dot_quote(idx.entries[static_cast<std::size_t>(c)].id) + ";\n";
  }
}

void dot_block(std::string& out, const ReactorGraph& g, int b, const std::vector<std::vector<int>>& children,
               const std::string& indent)
{
  const GraphBlock& blk = g.blocks[static_cast<std::size_t>(b)];
  std::string ins;
  std::string outs;
  for (int p : blk.ports) {
    const GraphPort& port = g.ports[static_cast<std::size_t>(p)];
    std::string field = "<p" + std::to_string(p) + "> " + record_escape(port.name);
    auto& side = port.direction == PortDirection::Input ? ins : outs;
    side += (side.empty() ? "" : "|") + field;
  }
  std::string title = blk.name;
  if (blk.kind == BlockKind::ParCollector) {
    title += " M=" + std::to_string(blk.threshold) + "/" + std::to_string(blk.arity);
  } else if (blk.kind == BlockKind::Merge) {
    title += blk.mode == MergeMode::AtMostOne ? " (at-most-one)" : " (latest-wins)";
  } else if (blk.kind == BlockKind::Task) {
    title += " " + g.leaves[static_cast<std::size_t>(blk.leaf)].label;
  }
  const std::string label = "{{" + ins + "}|" + record_escape(title) + "|{" + outs + "}}";
  const auto& kids = children[static_cast<std::size_t>(b)];
  const bool cluster = blk.kind == BlockKind::Tree || blk.kind == BlockKind::Composite;
  if (cluster) {
    out += indent + "subgraph " + dot_quote("cluster_" + blk.name) + " {\n";
    out += indent + "  label=" + dot_quote(blk.name) + ";\n";
  }
  const std::string inner = cluster ? indent + "  " : indent;
  std::string shape = "record";
  // Record fields are already escaped for the record parser.
  out += inner + dot_quote(blk.name) + " [shape=" + shape + ", label=\"" + label + "\"];\n";
  for (int k : kids) dot_block(out, g, k, children, inner);
  if (cluster) out += indent + "}\n";
}

}  // namespace

std::string to_dot(const BtDef& def)
{
  const NodeIndex idx = NodeIndex::build(def);
  std::string out = "digraph " + dot_quote(def.name) + " {\n  rankdir=TB;\n";
  dot_tree_node(out, idx, 0);
  out += "}\n";
  return out;
}

std::string to_dot(const ReactorGraph& g)
{
  std::vector<std::vector<int>> children(g.blocks.size());
  for (std::size_t b = 0; b < g.blocks.size(); ++b) {
    if (g.blocks[b].parent >= 0) children[static_cast<std::size_t>(g.blocks[b].parent)].push_back(static_cast<int>(b));
  }
  std::string out = "digraph " + dot_quote(g.name + "_reactors") + " {\n  rankdir=LR;\n  compound=true;\n";
  out += "  node [fontsize=10];\n";
  dot_block(out, g, g.tree_block, children, "  ");
  for (const auto& c : g.connections) {
    const auto& from = g.ports[static_cast<std::size_t>(c.from)];
    const auto& to = g.ports[static_cast<std::size_t>(c.to)];
    out += "  " + dot_quote(g.blocks[static_cast<std::size_t>(from.block)].name) + ":p" + std::to_string(c.from) +
           " -> " + dot_quote(g.blocks[static_cast<std::size_t>(to.block)].name) + ":p" + std::to_string(c.to) + ";\n";
  }
  out += "}\n";
  return out;
}

}  // namespace btflow
