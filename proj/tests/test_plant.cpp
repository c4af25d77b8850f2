#include <set>

#include "btflow/oracle.hpp"
#include "btflow/plant.hpp"
#include "btflow/runtime.hpp"
#include "btflow/translator.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace btflow;

namespace {

struct PlantRun
{
  BtDef def;
  Scenario scenario;
  Trace compiled;
};

const PlantRun& plant_run()
{
  static const PlantRun r = [] {
    PlantRun p{testsupport::parse_ok(bundled_plant().source), parse_scenario(bundled_plant().scenario), {}};
    p.compiled = run(translate(p.def), p.scenario, plant_externs());
    return p;
  }();
  return r;
}

std::set<std::string> invoked_at(const Trace& t, std::int64_t time)
{
  std::set<std::string> out;
  for (const auto& e : t.events) {
    if (e.tag.time_ms == time && e.kind == TraceKind::NodeInvoked) out.insert(e.subject);
  }
  return out;
}

std::vector<std::int64_t> injection_times(const Scenario& s, const std::string& port, bool value)
{
  std::vector<std::int64_t> out;
  for (const auto& i : s.injections) {
    if (i.port == port && i.value == Slot(Value(value))) out.push_back(i.time_ms);
  }
  return out;
}

constexpr const char* kMoveToPickup = "r.2.1.0";
constexpr const char* kMoveToDelivery = "r.3.1.0";
constexpr const char* kStop = "r.1.1";
constexpr const char* kWait = "r.0.1";

}  // namespace

TEST_SUITE("plant")
{
  TEST_CASE("compiled trace matches the golden trace")
  {
    const std::string golden = testsupport::read_file(testsupport::source_dir() + "/tests/golden/plant.jsonl");
    CHECK(plant_run().compiled.to_jsonl() == golden);
  }

  TEST_CASE("compiled and interpreted plant agree")
  {
    const PlantRun& p = plant_run();
    CHECK(run_oracle(p.def, p.scenario, plant_externs()).to_jsonl() == p.compiled.to_jsonl());
  }

  TEST_CASE("job count and horizon")
  {
    const PlantRun& p = plant_run();
    CHECK_FALSE(p.compiled.error);
    CHECK(completed_jobs(p.compiled) == 7);
    REQUIRE(p.scenario.horizon_ms);
    CHECK(*p.scenario.horizon_ms == 30000);
    CHECK(expand_schedule(p.scenario).size() == 120);
    for (const auto& e : p.compiled.events) CHECK(e.tag.time_ms < 30000);
  }

  TEST_CASE("jobs finish in order, each once")
  {
    std::vector<std::string> done;
    for (const auto& e : plant_run().compiled.events) {
      if (e.kind == TraceKind::PortEvent && e.subject == "jobDone") done.push_back(e.payload);
    }
    REQUIRE(done.size() == 7);
    for (std::size_t i = 0; i < done.size(); ++i) {
      CHECK(done[i] == R"({"type":"int","value":)" + std::to_string(i + 1) + "}");
    }
  }

  TEST_CASE("a detected human stops the vehicle at that tag")
  {
    const PlantRun& p = plant_run();
    const auto times = injection_times(p.scenario, "humanDetected", true);
    REQUIRE_FALSE(times.empty());
    for (auto t : times) {
      CAPTURE(t);
      const auto inv = invoked_at(p.compiled, t);
      CHECK(inv.count(kStop) == 1);
      CHECK(inv.count(kMoveToPickup) == 0);
      CHECK(inv.count(kMoveToDelivery) == 0);
    }
    for (auto t : injection_times(p.scenario, "agvDetected", true)) {
      const auto inv = invoked_at(p.compiled, t);
      CHECK(inv.count(kStop) == 1);
      CHECK(inv.count(kMoveToPickup) + inv.count(kMoveToDelivery) == 0);
    }
  }

  TEST_CASE("movement happens when nobody is around")
  {
    const PlantRun& p = plant_run();
    int moving_ticks = 0;
    for (const auto& st : expand_schedule(p.scenario)) {
      const auto inv = invoked_at(p.compiled, st.tag.time_ms);
      moving_ticks += inv.count(kMoveToPickup) + inv.count(kMoveToDelivery) > 0 ? 1 : 0;
    }
    CHECK(moving_ticks > 20);
  }

  TEST_CASE("without a job the vehicle waits")
  {
    const auto inv = invoked_at(plant_run().compiled, 0);
    CHECK(inv.count(kWait) == 1);
    CHECK(inv.count("r.1") == 0);
    CHECK(testsupport::statuses_of(plant_run().compiled, "r.0.0").front().second == "FAILURE");
  }

  TEST_CASE("stubs follow their latencies")
  {
    ExternRegistry ex = plant_externs();
    const ExternFn* move = ex.find("moveTo");
    REQUIRE(move);
    SourceMap sources{{"pickupAt", Value(std::int64_t{2})}};
    StateMap states{{"target", Value(std::int64_t{0})}, {"elapsed", Value(std::int64_t{0})}};
    int ticks = 0;
    for (bool done = false; !done && ticks < 10; ++ticks) {
      ExternCall call{"r", "Move", Tag{}, sources, states};
      done = (*move)(call).success;
    }
    CHECK(ticks == kMoveTicks);
    const ExternFn* load = ex.find("requestLoad");
    SourceMap job{{"jobId", Value(std::int64_t{4})}};
    StateMap w{{"waited", Value(std::int64_t{0})}};
    ExternCall c1{"r", "Load", Tag{}, job, w};
    CHECK_FALSE((*load)(c1).success);
    ExternCall c2{"r", "Load", Tag{}, job, w};
    const ExternResult r2 = (*load)(c2);
    CHECK(r2.success);
    REQUIRE(r2.emits.size() == 1);
    CHECK(r2.emits[0].first == "loadedJob");
    CHECK(kTransferTicks == 2);
  }
}
