#include "btflow/generator.hpp"
#include "btflow/oracle.hpp"
#include "btflow/runtime.hpp"
#include "btflow/translator.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace btflow;

namespace {

Trace run_fixture(const std::string& name, int n_ticks, const ExternRegistry& externs = {})
{
  return run(translate(testsupport::load_fixture("fixtures/valid/" + name)), testsupport::ticks(n_ticks), externs);
}

ExternRegistry trivial_externs()
{
  ExternRegistry r;
  r.register_extern("alwaysSucceed", [](ExternCall&) { return ExternResult::succeed(); });
  return r;
}

}  // namespace

TEST_SUITE("runtime")
{
  TEST_CASE("sequence succeeds every tick")
  {
    const Trace t = run_fixture("seq_demo.btlf", 3);
    CHECK_FALSE(t.error);
    const auto s = testsupport::statuses_of(t, "r");
    REQUIRE(s.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(s[i].first == static_cast<std::int64_t>(250 * i));
      CHECK(s[i].second == "SUCCESS");
    }
    // Per tick: start, seq invoked, A invoked, A status, B invoked, B status, seq status.
    std::vector<TraceEvent> visible;
    for (const auto& e : t.events) {
      if (e.kind != TraceKind::BlockEvent) visible.push_back(e);
    }
    CHECK(visible.size() == 21);
    CHECK(visible[1].kind == TraceKind::NodeInvoked);
    CHECK(visible[1].payload == R"({"kind":"sequence"})");
    CHECK(visible[2].payload == R"({"kind":"task","label":"A"})");
  }

  TEST_CASE("running task blocks its successor")
  {
    const Trace t = run_fixture("running_task.btlf", 2);
    CHECK(testsupport::statuses_of(t, "r").empty());
    CHECK(testsupport::statuses_of(t, "r.0").empty());
    for (const auto& e : t.events) CHECK(e.subject != "r.1");
  }

  TEST_CASE("emitting both statuses aborts")
  {
    const Trace t = run_fixture("double_status.btlf", 3);
    REQUIRE(t.error);
    CHECK(t.error->code() == RunErrorCode::DoubleStatus);
    CHECK(t.error->node_id() == "r.1");
    CHECK(t.error->tag() == Tag{0, 0});
    CHECK(t.events.back().kind == TraceKind::Error);
    CHECK(t.events.back().payload.find("DoubleStatus") != std::string::npos);
    for (const auto& e : t.events) CHECK(e.tag == Tag{0, 0});
    // r.1 never reports a status and the parent never completes.
    CHECK(testsupport::statuses_of(t, "r.1").empty());
    CHECK(testsupport::statuses_of(t, "r").empty());
  }

  TEST_CASE("callback reporting both statuses aborts")
  {
    ExternRegistry ex;
    ex.register_extern("alwaysSucceed", [](ExternCall&) { return ExternResult{{}, true, true}; });
    const Trace t = run_fixture("extern_demo.btlf", 1, ex);
    REQUIRE(t.error);
    CHECK(t.error->code() == RunErrorCode::DoubleStatus);
    CHECK(t.error->node_id() == "r.0");
  }

  TEST_CASE("step carries the Pre buffer")
  {
    const ReactorGraph g = translate(testsupport::load_fixture("fixtures/valid/channel_backward.btlf"));
    const int seen = g.find_port(g.tree_block, "seen");
    const std::vector<InputEvent> start{{"start", {}}};
    const RuntimeState s0 = RuntimeState::initial(g);
    REQUIRE(s0.pre_buffers.size() == 1);
    CHECK_FALSE(s0.pre_buffers.begin()->second);

    const StepResult r0 = step(g, s0, {0, 0}, start, {});
    CHECK_FALSE(r0.error);
    REQUIRE(r0.ports[static_cast<std::size_t>(seen)]);
    CHECK(*r0.ports[static_cast<std::size_t>(seen)] == Value(std::int64_t{-1}));
    CHECK(*r0.state.pre_buffers.begin()->second == Value(std::int64_t{7}));
    CHECK(s0.pre_buffers.begin()->second == std::nullopt);

    const StepResult r1 = step(g, r0.state, {250, 0}, start, {});
    CHECK(*r1.ports[static_cast<std::size_t>(seen)] == Value(std::int64_t{7}));
    CHECK(*r1.state.pre_buffers.begin()->second == Value(std::int64_t{17}));
  }

  TEST_CASE("a tag without events changes nothing")
  {
    const ReactorGraph g = translate(testsupport::load_fixture("fixtures/valid/channel_backward.btlf"));
    const StepResult r0 = step(g, RuntimeState::initial(g), {0, 0}, {{"start", {}}}, {});
    const StepResult r1 = step(g, r0.state, {100, 0}, {}, {});
    CHECK(r1.events.empty());
    CHECK(r1.state.leaves == r0.state.leaves);
    CHECK(r1.state.pre_buffers == r0.state.pre_buffers);
  }

  TEST_CASE("tags must increase")
  {
    const ReactorGraph g = translate(testsupport::load_fixture("fixtures/valid/seq_demo.btlf"));
    const StepResult r0 = step(g, RuntimeState::initial(g), {250, 0}, {{"start", {}}}, {});
    const StepResult r1 = step(g, r0.state, {250, 0}, {{"start", {}}}, {});
    REQUIRE(r1.error);
    CHECK(r1.error->code() == RunErrorCode::NonMonotonicTag);
    CHECK(step(g, r0.state, {250, 1}, {{"start", {}}}, {}).error == std::nullopt);
  }

  TEST_CASE("unknown and mistyped input ports")
  {
    const ReactorGraph g = translate(testsupport::load_fixture("fixtures/valid/parallel_mix.btlf"));
    const StepResult bad = step(g, RuntimeState::initial(g), {0, 0}, {{"bogus", Value(std::int64_t{1})}}, {});
    REQUIRE(bad.error);
    CHECK(bad.error->code() == RunErrorCode::UnknownPort);
    const StepResult typed = step(g, RuntimeState::initial(g), {0, 0}, {{"speed", Value(std::string("fast"))}}, {});
    REQUIRE(typed.error);
    CHECK(typed.error->code() == RunErrorCode::TypeMismatch);
  }

  TEST_CASE("extern registry")
  {
    const ReactorGraph g = translate(testsupport::load_fixture("fixtures/valid/extern_demo.btlf"));
    try {
      (void)run(g, testsupport::ticks(1), {});
      FAIL("expected MissingExtern");
    } catch (const RunError& e) {
      CHECK(e.code() == RunErrorCode::MissingExtern);
      CHECK(e.node_id() == "r.0");
    }
    ExternRegistry ex = trivial_externs();
    CHECK_THROWS_AS(ex.register_extern("alwaysSucceed", [](ExternCall&) { return ExternResult::fail(); }), RunError);
    CHECK(ex.names() == std::vector<std::string>{"alwaysSucceed"});
  }

  TEST_CASE("extern and script bodies are interchangeable")
  {
    const Trace ext = run_fixture("extern_demo.btlf", 4, trivial_externs());
    const BtDef scripted = testsupport::parse_ok(R"(behaviortree ExternDemo {
  sequence {
    condition "Ready?" {= @script step { status success } loop =}
    task "Work" {= @script step { status success } loop =}
  }
})");
    CHECK(run(translate(scripted), testsupport::ticks(4), {}).to_jsonl() == ext.to_jsonl());
  }

  TEST_CASE("callbacks see sources, states, node and tag")
  {
    const BtDef def = testsupport::parse_ok(R"(behaviortree T {
  input v: int
  output o: int
  task "Echo" {
    state calls: int = 0
    reaction (v) -> (o) {= @extern echo =}
  }
})");
    ExternRegistry ex;
    std::vector<std::string> seen;
    ex.register_extern("echo", [&](ExternCall& c) {
      seen.push_back(std::string(c.node_id) + "/" + std::string(c.label) + "@" + std::to_string(c.tag.time_ms));
      const auto n = std::get<std::int64_t>(c.states.at("calls")) + 1;
      c.states["calls"] = Value(n);
      const Slot& v = c.sources.at("v");
      ExternResult r = ExternResult::succeed();
      r.emits.emplace_back("o", Value(v ? std::get<std::int64_t>(*v) * 100 + n : n));
      return r;
    });
    Scenario s = testsupport::ticks(2);
    s.injections.push_back({250, "v", Value(std::int64_t{3})});
    const Trace t = run(translate(def), s, ex);
    CHECK(seen == std::vector<std::string>{"r/Echo@0", "r/Echo@250"});
    std::vector<std::string> outs;
    for (const auto& e : t.events) {
      if (e.kind == TraceKind::PortEvent && e.subject == "o") outs.push_back(e.payload);
    }
    CHECK(outs == std::vector<std::string>{R"({"type":"int","value":1})", R"({"type":"int","value":302})"});
  }

  TEST_CASE("traces do not depend on the topological order")
  {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      CAPTURE(seed);
      const BtDef def = gen_random_def(seed);
      const ReactorGraph g = translate(def);
      const Scenario s = gen_random_scenario(def, seed, 30);
      const std::string canonical = run(g, s, {}).to_jsonl();
      CHECK(run(g, s, {}, {TopoPolicy::Reverse, 0}).to_jsonl() == canonical);
      CHECK(run(g, s, {}, {TopoPolicy::Shuffled, seed}).to_jsonl() == canonical);
    }
  }

  TEST_CASE("internal events are hidden by default")
  {
    const Trace t = run_fixture("channel_backward.btlf", 2);
    CHECK(t.to_jsonl().find("block-event") == std::string::npos);
    CHECK(t.to_jsonl(true).find("block-event") != std::string::npos);
  }
}
