#include <filesystem>

#include "btflow/fuzz.hpp"
#include "btflow/generator.hpp"
#include "btflow/parser.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace btflow;
namespace fs = std::filesystem;

namespace {

int count_nodes(const BtNode& n)
{
  int c = 1;
  for (const auto& ch : n.children) c += count_nodes(ch);
  return c;
}

}  // namespace

TEST_SUITE("fuzz")
{
  TEST_CASE("case seeds are distinct and stable")
  {
    CHECK(case_seed(0, 0) == case_seed(0, 0));
    CHECK(case_seed(0, 0) != case_seed(0, 1));
    CHECK(case_seed(0, 0) != case_seed(1, 0));
  }

  TEST_CASE("generated scenarios are deterministic and bounded")
  {
    const BtDef def = gen_random_def(3);
    const Scenario a = gen_random_scenario(def, 3, 100);
    CHECK(scenario_to_json(a) == scenario_to_json(gen_random_scenario(def, 3, 100)));
    CHECK(expand_schedule(a).size() == 100);
  }

  TEST_CASE("a short campaign is clean")
  {
    const FuzzReport r = run_fuzz({50, 99, 4, 5, 50, {}, ""});
    CHECK(r.total == 50);
    CHECK(r.equivalent == 50);
    CHECK_FALSE(r.divergence);
    CHECK(r.summary() == "50/50 equivalent\n");
  }

  TEST_CASE("a miscompiled fallback is caught and minimized")
  {
    const std::string dir = (fs::temp_directory_path() / "btflow-fuzz-test").string();
    fs::create_directories(dir);
    FuzzOptions opts{200, 42, 4, 5, 100, {TranslateFault::SwapFallbackStatus}, dir};
    const FuzzReport r = run_fuzz(opts);
    REQUIRE(r.divergence);
    const Divergence& d = *r.divergence;
    CHECK(r.equivalent < r.total);
    // Still a real divergence after shrinking, and small.
    CHECK(compare(d.def, d.scenario, {}, opts.translate).has_value());
    CHECK_FALSE(compare(d.def, d.scenario, {}).has_value());
    CHECK(count_nodes(d.def.root) <= 4);
    CHECK(d.line >= 1);
    CHECK(d.compiled_line != d.oracle_line);
    CHECK(fs::exists(r.repro_file));
    CHECK(parse(testsupport::read_file(r.repro_file)).ok());
    const std::string s = r.summary();
    CHECK(s.find("divergence in case seed " + std::to_string(d.case_seed)) != std::string::npos);
    CHECK(s.find("--- compiled:") != std::string::npos);
    fs::remove_all(dir);
  }

  TEST_CASE("compare reports the first differing line")
  {
    const BtDef def = testsupport::load_fixture("fixtures/valid/fallback_retry.btlf");
    ExternRegistry ex;
    ex.register_extern("alwaysRunning", [](ExternCall&) { return ExternResult::running(); });
    const auto d = compare(def, testsupport::ticks(3), ex, {TranslateFault::SwapFallbackStatus});
    REQUIRE(d);
    CHECK(d->tag == Tag{0, 0});
  }
}
