#include <filesystem>

#include "btflow/check.hpp"
#include "btflow/generator.hpp"
#include "btflow/plant.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace btflow;
namespace fs = std::filesystem;

namespace {

bool has_code(const CheckReport& r, const std::string& code, const std::string& path = "")
{
  for (const auto& i : r.items) {
    if (i.code == code && (path.empty() || i.node_path == path)) return true;
  }
  return false;
}

CheckReport check_text(const std::string& text) { return validate(testsupport::parse_ok(text)); }

}  // namespace

TEST_SUITE("check")
{
  TEST_CASE("valid fixtures and the plant are clean")
  {
    for (const auto& e : fs::directory_iterator(testsupport::source_dir() + "/fixtures/valid")) {
      if (e.path().extension() != ".btlf") continue;
      CAPTURE(e.path().string());
      CHECK(validate(testsupport::load_fixture("fixtures/valid/" + e.path().filename().string())).empty());
    }
    CHECK(validate(testsupport::parse_ok(bundled_plant().source)).empty());
  }

  TEST_CASE("parallel writers fixture")
  {
    const auto r = validate(testsupport::load_fixture("fixtures/check/parallel_writers.btlf"));
    CHECK(r.has_errors());
    CHECK(has_code(r, "ParallelWriters", "r.0.0"));
    const auto conflicts = parallel_writer_conflicts(testsupport::load_fixture("fixtures/check/parallel_writers.btlf"));
    REQUIRE(conflicts.size() == 1);
    CHECK(conflicts[0].name == "x");
    CHECK(conflicts[0].first == "r.0.0");
    CHECK(conflicts[0].second == "r.0.1");
  }

  TEST_CASE("cross-branch read/write fixture")
  {
    const auto r = validate(testsupport::load_fixture("fixtures/check/cross_branch.btlf"));
    CHECK(r.has_errors());
    CHECK(has_code(r, "ParallelReadWrite", "r.1.0"));
    bool names_writer = false;
    for (const auto& i : r.items) names_writer = names_writer || i.message.find("r.0.0") != std::string::npos;
    CHECK(names_writer);
  }

  TEST_CASE("parallel writers to an output port")
  {
    const auto r = check_text(R"(behaviortree T {
  output y: int
  parallel(2) {
    task "A" () -> (y) {= @script step { emit y = 1; status success } loop =}
    task "B" () -> (y) {= @script step { emit y = 2; status success } loop =}
  }
})");
    CHECK(has_code(r, "ParallelWriters"));
  }

  TEST_CASE("sequential writers are fine")
  {
    CHECK(validate(testsupport::load_fixture("fixtures/valid/channel_forward.btlf")).empty());
  }

  TEST_CASE("reserved names")
  {
    const auto port = parse("behaviortree T { input start: int task \"A\" {= @extern f =} }");
    CHECK_FALSE(port.ok());
    CHECK(port.diagnostics[0].message.find("reserved") != std::string::npos);
    CHECK(has_code(check_text("behaviortree T { sequence { channel failure: int task \"A\" () -> (failure) {= @extern f =} } }"),
                   "ReservedName"));
    CHECK(has_code(check_text("behaviortree T { task \"A\" { state running: int = 0 reaction {= @extern f =} } }"),
                   "ReservedName"));
  }

  TEST_CASE("reference resolution")
  {
    CHECK(has_code(check_text("behaviortree T { task \"A\" (nope) {= @extern f =} }"), "UnresolvedRef"));
    CHECK(has_code(check_text("behaviortree T { output o: int task \"A\" (o) {= @extern f =} }"), "SourceNotReadable"));
    CHECK(has_code(check_text("behaviortree T { input i: int task \"A\" () -> (i) {= @extern f =} }"), "EffectNotWritable"));
    // Channels are only visible inside their owner.
    CHECK(has_code(check_text(R"(behaviortree T {
  sequence {
    sequence { channel x: int task "W" () -> (x) {= @script step { emit x = 1; status success } loop =} }
    task "R" (x) {= @extern f =}
  }
})"),
                   "UnresolvedRef"));
  }

  TEST_CASE("body checks")
  {
    CHECK(has_code(check_text("behaviortree T { task \"A\" {= @expr true =} }"), "ExprOnTask"));
    CHECK(has_code(check_text("behaviortree T { task \"A\" {= @script step { emit z = 1; status success } loop =} }"),
                   "UndeclaredEffect"));
    CHECK(has_code(check_text("behaviortree T { task \"A\" {= @script step { state z = 1; status success } loop =} }"),
                   "UndeclaredState"));
    CHECK(has_code(check_text("behaviortree T { condition \"A\" {= @expr q > 1 =} }"), "UnknownIdentifier"));
    CHECK(has_code(check_text("behaviortree T { task \"A\" { state s: int = \"x\" reaction {= @script step { status success } loop =} } }"),
                   "TypeMismatch"));
  }

  TEST_CASE("channel usage warnings")
  {
    const auto unused = check_text("behaviortree T { sequence { channel x: int task \"A\" {= @extern f =} } }");
    CHECK(has_code(unused, "ChannelUnused"));
    CHECK_FALSE(unused.has_errors());
    CHECK(has_code(check_text("behaviortree T { sequence { channel x: int task \"A\" (x) {= @extern f =} } }"),
                   "ChannelUnwritten"));
  }

  TEST_CASE("condition scripted to run is a warning")
  {
    const auto r = check_text("behaviortree T { condition \"A\" {= @script step { status running } loop =} }");
    CHECK(has_code(r, "ConditionRunning"));
    CHECK_FALSE(r.has_errors());
  }

  TEST_CASE("threshold range")
  {
    CHECK(has_code(check_text("behaviortree T { parallel(3) { task \"A\" {= @extern f =} task \"B\" {= @extern f =} } }"),
                   "ThresholdRange"));
  }

  TEST_CASE("JSON report lines")
  {
    const auto r = validate(testsupport::load_fixture("fixtures/check/parallel_writers.btlf"));
    const std::string j = r.to_jsonl();
    CHECK(j.find("\"code\":\"ParallelWriters\"") != std::string::npos);
    CHECK(j.find("\"nodePath\":\"r.0.0\"") != std::string::npos);
  }

  TEST_CASE("generated trees validate")
  {
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
      CAPTURE(seed);
      const auto r = validate(gen_random_def(seed));
      CHECK(r.empty());
    }
  }

  TEST_CASE("least common ancestor agrees with path prefixes")
  {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const BtDef def = gen_random_def(seed);
      const NodeIndex idx = NodeIndex::build(def);
      const auto n = static_cast<int>(idx.entries.size());
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
          const auto& pa = idx.entries[static_cast<std::size_t>(a)].path;
          const auto& pb = idx.entries[static_cast<std::size_t>(b)].path;
          std::size_t k = 0;
          while (k < pa.size() && k < pb.size() && pa[k] == pb[k]) ++k;
          const NodePath prefix(pa.begin(), pa.begin() + static_cast<std::ptrdiff_t>(k));
          const int l = idx.lca(a, b);
          CHECK(idx.entries[static_cast<std::size_t>(l)].path == prefix);
          CHECK(idx.is_ancestor(l, a));
          CHECK(idx.is_ancestor(l, b));
        }
      }
    }
  }
}
