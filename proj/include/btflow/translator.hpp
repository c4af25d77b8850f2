#pragma once

#include <string>
#include <vector>

#include "btflow/ast.hpp"
#include "btflow/graph.hpp"

namespace btflow {

/// Deliberate miscompilations, used only to show that differential testing
/// catches wiring mistakes.
enum class TranslateFault { None, SwapFallbackStatus };

struct TranslateOptions
{
  TranslateFault fault = TranslateFault::None;
};

/// Compiles a validated tree into a reactor network. Throws
/// std::invalid_argument if the tree does not validate and
/// RunError(InternalCycle) if the causality graph is cyclic.
ReactorGraph translate(const BtDef& def, const TranslateOptions& options = {});

/// Node ids of tasks/conditions in depth-first, left-to-right order.
std::vector<std::string> execution_order(const BtDef& def);

enum class DotView { Tree, Reactors };

/// Graphviz text for the tree view.
std::string to_dot(const BtDef& def);
/// Graphviz text for the compiled reactor view.
std::string to_dot(const ReactorGraph& graph);

}  // namespace btflow
