#include <set>

#include "btflow/generator.hpp"
#include "btflow/plant.hpp"
#include "btflow/translator.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace btflow;

namespace {

void check_wellformed(const ReactorGraph& g)
{
  std::vector<int> incoming(g.ports.size(), 0);
  for (const auto& c : g.connections) {
    ++incoming[static_cast<std::size_t>(c.to)];
    const auto& from = g.ports[static_cast<std::size_t>(c.from)];
    const auto& to = g.ports[static_cast<std::size_t>(c.to)];
    if (!from.pure && !to.pure) CHECK(from.type == to.type);
  }
  for (std::size_t p = 0; p < g.ports.size(); ++p) {
    CAPTURE(g.port_path(static_cast<int>(p)));
    CHECK(incoming[p] <= 1);
  }
  CHECK(is_valid_order(g, g.top_order));
}

}  // namespace

TEST_SUITE("translator")
{
  TEST_CASE("sequence of two tasks")
  {
    const ReactorGraph g = translate(testsupport::load_fixture("fixtures/valid/seq_demo.btlf"));
    CHECK(g.count_blocks(BlockKind::Tree) == 1);
    CHECK(g.count_blocks(BlockKind::Composite) == 1);
    CHECK(g.count_blocks(BlockKind::Task) == 2);
    CHECK(g.count_blocks(BlockKind::Merge) == 1);
    CHECK(g.count_blocks(BlockKind::Pre) == 0);
    CHECK(g.find_block("seq_r") >= 0);
    CHECK(g.find_block("task_r.0") >= 0);
    CHECK(g.find_block("fail_r") >= 0);
    for (const auto* p : {"start", "success", "failure"}) CHECK(g.find_port(g.find_block("seq_r"), p) >= 0);
    check_wellformed(g);
  }

  TEST_CASE("parallel gets a collector with its threshold")
  {
    const ReactorGraph g = translate(testsupport::load_fixture("fixtures/valid/parallel_mix.btlf"));
    const int c = g.find_block("collect_r");
    REQUIRE(c >= 0);
    CHECK(g.blocks[static_cast<std::size_t>(c)].threshold == 2);
    CHECK(g.blocks[static_cast<std::size_t>(c)].arity == 3);
    check_wellformed(g);
  }

  TEST_CASE("Pre only for backward reads")
  {
    const ReactorGraph fwd = translate(testsupport::load_fixture("fixtures/valid/channel_forward.btlf"));
    CHECK(fwd.count_blocks(BlockKind::Pre) == 0);
    const ReactorGraph bwd = translate(testsupport::load_fixture("fixtures/valid/channel_backward.btlf"));
    CHECK(bwd.count_blocks(BlockKind::Pre) == 1);
    CHECK(bwd.find_block("Pre_x") >= 0);
    check_wellformed(fwd);
    check_wellformed(bwd);
  }

  TEST_CASE("forward reader merges writers latest first")
  {
    const ReactorGraph g = translate(testsupport::load_fixture("fixtures/valid/channel_forward.btlf"));
    const int m = g.find_block("read_x->r.2");
    REQUIRE(m >= 0);
    CHECK(g.blocks[static_cast<std::size_t>(m)].mode == MergeMode::LatestWins);
    CHECK(g.blocks[static_cast<std::size_t>(m)].arity == 2);
  }

  TEST_CASE("plant and generated trees are well formed")
  {
    check_wellformed(translate(testsupport::parse_ok(bundled_plant().source)));
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      CAPTURE(seed);
      check_wellformed(translate(gen_random_def(seed)));
    }
  }

  TEST_CASE("alternative orders are valid too")
  {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const ReactorGraph g = translate(gen_random_def(seed));
      CHECK(is_valid_order(g, topological_order(g, TopoPolicy::Reverse)));
      CHECK(is_valid_order(g, topological_order(g, TopoPolicy::Shuffled, seed)));
      CHECK(topological_order(g) == g.top_order);
    }
  }

  TEST_CASE("is_valid_order rejects broken orders")
  {
    const ReactorGraph g = translate(testsupport::load_fixture("fixtures/valid/seq_demo.btlf"));
    auto order = g.top_order;
    std::reverse(order.begin(), order.end());
    CHECK_FALSE(is_valid_order(g, order));
    order.pop_back();
    CHECK_FALSE(is_valid_order(g, order));
  }

  TEST_CASE("invalid trees are refused")
  {
    CHECK_THROWS_AS(translate(testsupport::load_fixture("fixtures/check/parallel_writers.btlf")), std::invalid_argument);
  }

  TEST_CASE("JSON export is deterministic")
  {
    const BtDef def = testsupport::parse_ok(bundled_plant().source);
    const std::string a = translate(def).to_json();
    CHECK(a == translate(def).to_json());
    CHECK(a.find("\"topOrder\"") != std::string::npos);
    CHECK(a.find("\"par-collector\"") == std::string::npos);
  }

  TEST_CASE("execution order is depth first")
  {
    const BtDef def = testsupport::load_fixture("fixtures/valid/parallel_mix.btlf");
    CHECK(execution_order(def) == std::vector<std::string>{"r.0", "r.1", "r.2.0", "r.2.1"});
  }

  TEST_CASE("DOT views")
  {
    const BtDef def = testsupport::load_fixture("fixtures/valid/channel_backward.btlf");
    const std::string tree = to_dot(def);
    CHECK(tree.rfind("digraph", 0) == 0);
    CHECK(tree.find("shape=box") != std::string::npos);
    const std::string cond = to_dot(testsupport::load_fixture("fixtures/valid/extern_demo.btlf"));
    CHECK(cond.find("shape=ellipse") != std::string::npos);
    const std::string reactors = to_dot(translate(def));
    CHECK(reactors.find("Pre_x") != std::string::npos);
    CHECK(reactors.find("cluster_") != std::string::npos);
    CHECK(reactors.back() == '\n');
  }

  TEST_CASE("the fallback fault swaps wiring")
  {
    const BtDef def = testsupport::load_fixture("fixtures/valid/fallback_retry.btlf");
    CHECK(translate(def).to_json() != translate(def, {TranslateFault::SwapFallbackStatus}).to_json());
  }
}
