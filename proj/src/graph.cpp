#include "btflow/graph.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "json.hpp"

namespace btflow {

std::string_view block_kind_name(BlockKind k)
{
  switch (k) {
    case BlockKind::Tree: return "tree";
    case BlockKind::Composite: return "composite";
    case BlockKind::Task: return "task";
    case BlockKind::ParCollector: return "par-collector";
    case BlockKind::Merge: return "merge";
    case BlockKind::Pre: return "pre";
  }
  return "?";
}

std::string_view reaction_kind_name(ReactionKind k)
{
  switch (k) {
    case ReactionKind::TaskBody: return "body";
    case ReactionKind::Collect: return "collect";
    case ReactionKind::Merge: return "merge";
    case ReactionKind::PreEmit: return "emit";
    case ReactionKind::PreStore: return "store";
  }
  return "?";
}

int ReactorGraph::find_block(std::string_view n) const
{
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (blocks[i].name == n) return static_cast<int>(i);
  }
  return -1;
}

int ReactorGraph::find_port(int block, std::string_view n) const
{
  for (int p : blocks[static_cast<std::size_t>(block)].ports) {
    if (ports[static_cast<std::size_t>(p)].name == n) return p;
  }
  return -1;
}

std::string ReactorGraph::port_path(int port) const
{
  const GraphPort& p = ports[static_cast<std::size_t>(port)];
  return blocks[static_cast<std::size_t>(p.block)].name + "." + p.name;
}

std::size_t ReactorGraph::count_blocks(BlockKind k) const
{
  return static_cast<std::size_t>(
    std::count_if(blocks.begin(), blocks.end(), [k](const GraphBlock& b) { return b.kind == k; }));
}

std::string ReactorGraph::to_json() const
{
  using json = nlohmann::ordered_json;
  json j;
  j["name"] = name;
  j["blocks"] = json::array();
  for (const auto& b : blocks) {
    json jb;
    jb["name"] = b.name;
    jb["kind"] = block_kind_name(b.kind);
    jb["node"] = b.node_id;
    jb["parent"] = b.parent < 0 ? json(nullptr) : json(blocks[static_cast<std::size_t>(b.parent)].name);
    if (b.kind == BlockKind::ParCollector) {
      jb["threshold"] = b.threshold;
      jb["arity"] = b.arity;
    }
    if (b.kind == BlockKind::Merge) jb["mode"] = b.mode == MergeMode::AtMostOne ? "at-most-one" : "latest-wins";
    if (!b.channel.empty()) jb["channel"] = b.channel;
    jb["ports"] = json::array();
    for (int pi : b.ports) {
      const auto& p = ports[static_cast<std::size_t>(pi)];
      jb["ports"].push_back({{"name", p.name},
                             {"direction", p.direction == PortDirection::Input ? "in" : "out"},
                             {"type", p.pure ? std::string("event") : std::string(type_name(p.type))}});
    }
    j["blocks"].push_back(std::move(jb));
  }
  j["connections"] = json::array();
  for (const auto& c : connections) j["connections"].push_back({{"from", port_path(c.from)}, {"to", port_path(c.to)}});
  j["reactions"] = json::array();
  const auto paths = [&](const std::vector<int>& ps) {
    json a = json::array();
    for (int p : ps) a.push_back(port_path(p));
    return a;
  };
  for (const auto& r : reactions) {
    j["reactions"].push_back({{"block", blocks[static_cast<std::size_t>(r.block)].name},
                              {"kind", reaction_kind_name(r.kind)},
                              {"triggers", paths(r.triggers)},
                              {"sources", paths(r.sources)},
                              {"effects", paths(r.effects)}});
  }
  j["topOrder"] = top_order;
  return j.dump(2) + "\n";
}

namespace {

std::vector<std::vector<int>> reaction_edges(const ReactorGraph& g)
{
  std::vector<std::vector<int>> readers(g.ports.size());
  for (std::size_t r = 0; r < g.reactions.size(); ++r) {
    for (int p : g.reactions[r].triggers) readers[static_cast<std::size_t>(p)].push_back(static_cast<int>(r));
    for (int p : g.reactions[r].sources) readers[static_cast<std::size_t>(p)].push_back(static_cast<int>(r));
  }
  std::vector<std::vector<int>> fanout(g.ports.size());
  for (const auto& c : g.connections) fanout[static_cast<std::size_t>(c.from)].push_back(c.to);

  std::vector<std::set<int>> edges(g.reactions.size());
  for (std::size_t r = 0; r < g.reactions.size(); ++r) {
    std::vector<int> stack(g.reactions[r].effects.begin(), g.reactions[r].effects.end());
    std::set<int> seen;
    while (!stack.empty()) {
      const int p = stack.back();
      stack.pop_back();
      if (!seen.insert(p).second) continue;
      for (int rr : readers[static_cast<std::size_t>(p)]) edges[r].insert(rr);
      for (int q : fanout[static_cast<std::size_t>(p)]) stack.push_back(q);
    }
  }
  // Reactions of one block run in declaration order.
  std::vector<int> last_of_block(g.blocks.size(), -1);
  for (std::size_t r = 0; r < g.reactions.size(); ++r) {
    int& last = last_of_block[static_cast<std::size_t>(g.reactions[r].block)];
    if (last >= 0) edges[static_cast<std::size_t>(last)].insert(static_cast<int>(r));
    last = static_cast<int>(r);
  }
  std::vector<std::vector<int>> out(g.reactions.size());
  for (std::size_t r = 0; r < edges.size(); ++r) out[r].assign(edges[r].begin(), edges[r].end());
  return out;
}

}  // namespace

std::vector<int> topological_order(const ReactorGraph& g, TopoPolicy policy, std::uint64_t seed)
{
  const auto edges = reaction_edges(g);
  std::vector<int> indegree(g.reactions.size(), 0);
  for (const auto& es : edges) {
    for (int b : es) ++indegree[static_cast<std::size_t>(b)];
  }
  using Item = std::pair<EventKey, int>;
  std::set<Item> ready;
  for (std::size_t r = 0; r < g.reactions.size(); ++r) {
    if (indegree[r] == 0) ready.insert({g.reactions[r].priority, static_cast<int>(r)});
  }
  std::mt19937_64 rng(seed);
  std::vector<int> order;
  while (!ready.empty()) {
    auto it = ready.begin();
    if (policy == TopoPolicy::Reverse) {
      it = std::prev(ready.end());
    } else if (policy == TopoPolicy::Shuffled) {
      std::advance(it, static_cast<std::ptrdiff_t>(rng() % ready.size()));
    }
    const int r = it->second;
    ready.erase(it);
    order.push_back(r);
    for (int b : edges[static_cast<std::size_t>(r)]) {
      if (--indegree[static_cast<std::size_t>(b)] == 0) ready.insert({g.reactions[static_cast<std::size_t>(b)].priority, b});
    }
  }
  if (order.size() != g.reactions.size()) {
    throw RunError(RunErrorCode::InternalCycle, "", Tag{}, "causality cycle in compiled graph '" + g.name + "'");
  }
  return order;
}

bool is_valid_order(const ReactorGraph& g, const std::vector<int>& order)
{
  if (order.size() != g.reactions.size()) return false;
  std::vector<int> pos(g.reactions.size(), -1);
  for (std::size_t i = 0; i < order.size(); ++i) {
    const int r = order[i];
    if (r < 0 || static_cast<std::size_t>(r) >= g.reactions.size() || pos[static_cast<std::size_t>(r)] >= 0) return false;
    pos[static_cast<std::size_t>(r)] = static_cast<int>(i);
  }
  const auto edges = reaction_edges(g);
  for (std::size_t a = 0; a < edges.size(); ++a) {
    for (int b : edges[a]) {
      if (pos[a] >= pos[static_cast<std::size_t>(b)]) return false;
    }
  }
  return true;
}

}  // namespace btflow
