#pragma once

#include <cstdint>

#include "btflow/ast.hpp"
#include "btflow/scenario.hpp"

namespace btflow {

/// Seeded pseudorandom tree with scripted bodies and channels that passes
/// validate() without errors or warnings. Same arguments give the same tree.
/// Requires max_depth >= 1 and max_children >= 1.
BtDef gen_random_def(std::uint64_t seed, int max_depth = 4, int max_children = 5);

/// Start timer every 250 ms for `ticks` ticks plus random input injections
/// at tick times.
Scenario gen_random_scenario(const BtDef& def, std::uint64_t seed, int ticks);

/// Syntactically rich but not necessarily valid tree (every node kind, body
/// form, expression operator and literal type). Used for printer/parser
/// round trips.
BtDef gen_random_syntax(std::uint64_t seed);

}  // namespace btflow
