#include "btflow/oracle.hpp"
#include "btflow/runtime.hpp"
#include "btflow/translator.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace btflow;
using testsupport::composite;
using testsupport::fixed_task;

namespace {

std::vector<BtNode> leaves_for(const std::vector<Status>& v)
{
  std::vector<BtNode> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(fixed_task("c" + std::to_string(i), v[i]));
  return out;
}

Status oracle_status(const BtDef& def)
{
  return tick(def, Interpreter(def).initial_env(), {0, 0}, {}).first;
}

std::vector<std::string> seen_values(const Trace& t)
{
  std::vector<std::string> out;
  for (const auto& e : t.events) {
    if (e.kind == TraceKind::PortEvent && e.subject == "seen") out.push_back(e.payload);
  }
  return out;
}

std::string int_json(std::int64_t v) { return R"({"type":"int","value":)" + std::to_string(v) + "}"; }

}  // namespace

TEST_SUITE("oracle")
{
  TEST_CASE("parallel examples")
  {
    using S = Status;
    struct Case
    {
      std::vector<S> v;
      int m;
      S expected;
    };
    const std::vector<Case> cases{
      {{S::Success, S::Success, S::Failure}, 2, S::Success},
      {{S::Success, S::Failure, S::Failure}, 2, S::Failure},
      {{S::Success, S::Running, S::Failure}, 2, S::Running},
      {{S::Running, S::Running, S::Running}, 1, S::Running},
      {{S::Failure, S::Failure, S::Running}, 3, S::Failure},
      {{S::Failure, S::Running}, 1, S::Running},
    };
    for (const auto& c : cases) {
      const BtDef def = testsupport::tree_of(composite(NodeKind::Parallel, leaves_for(c.v), c.m));
      CHECK(oracle_status(def) == c.expected);
      CHECK(testsupport::expected_parallel(c.v, c.m) == c.expected);
    }
  }

  TEST_CASE("single child composites are transparent")
  {
    for (auto s : {Status::Success, Status::Failure, Status::Running}) {
      for (auto k : {NodeKind::Sequence, NodeKind::Fallback, NodeKind::Parallel}) {
        CHECK(oracle_status(testsupport::tree_of(composite(k, leaves_for({s}), 1))) == s);
      }
    }
  }

  TEST_CASE("fallback is the dual of sequence")
  {
    for (int n = 1; n <= 3; ++n) {
      for (const auto& v : testsupport::all_status_vectors(n)) {
        std::vector<Status> flipped;
        for (auto s : v) flipped.push_back(testsupport::dual(s));
        const Status seq = oracle_status(testsupport::tree_of(composite(NodeKind::Sequence, leaves_for(v))));
        const Status fb = oracle_status(testsupport::tree_of(composite(NodeKind::Fallback, leaves_for(flipped))));
        CHECK(fb == testsupport::dual(seq));
        CHECK(seq == testsupport::expected_sequence(v));
      }
    }
  }

  TEST_CASE("parallel with all children succeeding")
  {
    for (int n = 1; n <= 4; ++n) {
      const std::vector<Status> v(static_cast<std::size_t>(n), Status::Success);
      for (int m = 1; m <= n; ++m) {
        CHECK(oracle_status(testsupport::tree_of(composite(NodeKind::Parallel, leaves_for(v), m))) == Status::Success);
      }
    }
  }

  TEST_CASE("ticking is a pure function of the environment")
  {
    const BtDef def = testsupport::load_fixture("fixtures/valid/channel_backward.btlf");
    const TickEnv env0 = Interpreter(def).initial_env();
    const auto [s1, env1] = tick(def, env0, {0, 0}, {});
    const auto [s1b, env1b] = tick(def, env0, {0, 0}, {});
    CHECK(s1 == Status::Success);
    CHECK(env1 == env1b);
    CHECK_FALSE(env1 == env0);
    CHECK(env1.channel_pre.at("chan:r:x") == Slot(Value(std::int64_t{7})));
  }

  TEST_CASE("forward channel: latest writer wins")
  {
    const BtDef def = testsupport::load_fixture("fixtures/valid/channel_forward.btlf");
    const Trace t = run_oracle(def, testsupport::ticks(3), {});
    CHECK(seen_values(t) == std::vector<std::string>(3, int_json(2)));
  }

  TEST_CASE("backward channel: one tick delay")
  {
    const BtDef def = testsupport::load_fixture("fixtures/valid/channel_backward.btlf");
    const Trace t = run_oracle(def, testsupport::ticks(4), {});
    CHECK(seen_values(t) == std::vector<std::string>{int_json(-1), int_json(7), int_json(17), int_json(27)});
  }

  TEST_CASE("a reader after the writer in a later branch sees nothing when the writer is skipped")
  {
    const BtDef def = testsupport::parse_ok(R"(behaviortree T {
  output seen: int
  sequence {
    channel x: int
    fallback {
      task "Skip" {= @script step { status success } loop =}
      task "W" () -> (x) {= @script step { emit x = 5; status success } loop =}
    }
    task "R" (x) -> (seen) {= @script step { emit seen = present(x) ? x : -1; status success } loop =}
  }
})");
    const Trace t = run_oracle(def, testsupport::ticks(2), {});
    CHECK(seen_values(t) == std::vector<std::string>(2, int_json(-1)));
    CHECK(run(translate(def), testsupport::ticks(2), {}).to_jsonl() == t.to_jsonl());
  }

  TEST_CASE("oracle rejects invalid trees")
  {
    CHECK_THROWS_AS(Interpreter(testsupport::load_fixture("fixtures/check/cross_branch.btlf")), std::invalid_argument);
  }

  TEST_CASE("fixtures agree with the compiled runtime")
  {
    ExternRegistry ex;
    ex.register_extern("alwaysSucceed", [](ExternCall&) { return ExternResult::succeed(); });
    ex.register_extern("alwaysRunning", [](ExternCall&) { return ExternResult::running(); });
    for (const auto* name : {"seq_demo", "channel_forward", "channel_backward", "running_task", "double_status",
                             "parallel_mix", "fallback_retry", "extern_demo", "mixed_types"}) {
      CAPTURE(name);
      const BtDef def = testsupport::load_fixture(std::string("fixtures/valid/") + name + ".btlf");
      const Scenario s = testsupport::ticks(8);
      CHECK(run(translate(def), s, ex).to_jsonl() == run_oracle(def, s, ex).to_jsonl());
    }
  }
}
