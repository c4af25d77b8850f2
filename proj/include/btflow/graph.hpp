#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "btflow/ast.hpp"
#include "btflow/exec.hpp"
#include "btflow/trace.hpp"

namespace btflow {

enum class BlockKind { Tree, Composite, Task, ParCollector, Merge, Pre };

std::string_view block_kind_name(BlockKind k);

enum class MergeMode {
  AtMostOne,   // two present inputs at one tag is a MergeConflict
  LatestWins,  // lowest input index (highest priority) wins
};

/// What observing a port means for the trace.
enum class PortRole { None, NodeStart, NodeSuccess, NodeFailure, TreeInput, TreeOutput };

struct GraphPort
{
  std::string name;
  PortDirection direction = PortDirection::Input;
  bool pure = false;  // event without payload: start/success/failure
  ValueType type = ValueType::Bool;
  int block = -1;
  PortRole role = PortRole::None;
  int node = -1;  // node entry for NodeStart/NodeSuccess/NodeFailure
  int decl = -1;  // tree port declaration index; -1 for the implicit start
};

struct GraphBlock
{
  BlockKind kind = BlockKind::Composite;
  std::string name;
  std::string node_id;  // BT node this block realizes or belongs to
  int node = -1;        // entry index of that node; -1 for the tree block
  int parent = -1;
  std::vector<int> ports;

  int leaf = -1;       // Task: index into ReactorGraph::leaves
  int threshold = 0;   // ParCollector: M
  int arity = 0;       // ParCollector: N; Merge: number of inputs
  MergeMode mode = MergeMode::LatestWins;
  std::string channel;  // Pre/Merge: channel or port the block serves
};

enum class ReactionKind { TaskBody, Collect, Merge, PreEmit, PreStore };

std::string_view reaction_kind_name(ReactionKind k);

struct Reaction
{
  int block = -1;
  ReactionKind kind = ReactionKind::TaskBody;
  std::vector<int> triggers;
  std::vector<int> sources;
  std::vector<int> effects;
  EventKey priority;  // tie-break for the canonical topological order
};

struct Connection
{
  int from = -1;
  int to = -1;
};

struct NodeInfo
{
  std::string id;
  std::string label;
  NodeKind kind = NodeKind::Task;
  int enter = 0;
  int exit = 0;
};

/// Compiled network of blocks. Self-contained: holds copies of everything
/// execution needs, so it may outlive the BtDef it came from.
struct ReactorGraph
{
  std::string name;
  std::vector<PortDecl> tree_ports;
  std::vector<NodeInfo> nodes;  // indexed like NodeIndex::entries
  std::vector<LeafSpec> leaves;
  std::vector<GraphBlock> blocks;
  std::vector<GraphPort> ports;
  std::vector<Connection> connections;
  std::vector<Reaction> reactions;
  std::vector<int> top_order;  // reaction indices
  int tree_block = 0;
  int start_port = -1;

  int find_block(std::string_view name) const;
  /// Port of `block` by name, or -1.
  int find_port(int block, std::string_view name) const;
  std::string port_path(int port) const;  // "block.port"
  std::size_t count_blocks(BlockKind k) const;

  /// Deterministic JSON export: blocks, ports, connections, reactions,
  /// topOrder.
  std::string to_json() const;
};

enum class TopoPolicy {
  Canonical,  // lowest priority first: matches depth-first tree order
  Reverse,    // highest priority first among ready reactions
  Shuffled,   // seeded random choice among ready reactions
};

/// A total order of reactions consistent with causality. Throws
/// RunError(InternalCycle) if the causality graph has a cycle.
std::vector<int> topological_order(const ReactorGraph& g, TopoPolicy policy = TopoPolicy::Canonical,
                                   std::uint64_t seed = 0);

/// True iff `order` is a permutation of all reactions respecting causality.
bool is_valid_order(const ReactorGraph& g, const std::vector<int>& order);

}  // namespace btflow
