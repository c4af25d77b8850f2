#include <filesystem>
#include <sstream>

#include "commands.hpp"
#include "doctest.h"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace btflow::cli;

namespace {

struct Result
{
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args)
{
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(args, {out, err, false});
  return {code, out.str(), err.str()};
}

std::string fixture(const std::string& rel) { return testsupport::source_dir() + "/fixtures/" + rel; }

fs::path scratch_dir()
{
  const fs::path d = fs::temp_directory_path() / "btflow-cli-test";
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_SUITE("cli")
{
  TEST_CASE("check accepts every valid fixture")
  {
    for (const auto& e : fs::directory_iterator(fixture("valid"))) {
      if (e.path().extension() != ".btlf") continue;
      CAPTURE(e.path().string());
      const auto r = cli({"check", e.path().string()});
      CHECK(r.code == kOk);
      CHECK(r.err.empty());
    }
    CHECK(cli({"check", fixture("plant/agv.btlf")}).code == kOk);
  }

  TEST_CASE("check rejects the static-violation fixtures")
  {
    const auto pw = cli({"check", fixture("check/parallel_writers.btlf")});
    CHECK(pw.code == kDiagnostics);
    CHECK(pw.err.find("r.0.0: parallel writers on channel x: r.0.0 and r.0.1 [ParallelWriters]") != std::string::npos);
    const auto cb = cli({"check", fixture("check/cross_branch.btlf")});
    CHECK(cb.code == kDiagnostics);
    CHECK(cb.err.find("r.1.0:") != std::string::npos);
    CHECK(cb.err.find("[ParallelReadWrite]") != std::string::npos);
    CHECK(cb.err.rfind(fixture("check/cross_branch.btlf") + ":", 0) == 0);
  }

  TEST_CASE("check --json")
  {
    const auto r = cli({"check", "--json", fixture("check/parallel_writers.btlf")});
    CHECK(r.code == kDiagnostics);
    CHECK(r.out.find("\"nodePath\":\"r.0.0\"") != std::string::npos);
    CHECK(cli({"check", "--json", fixture("valid/seq_demo.btlf")}).out.empty());
  }

  TEST_CASE("syntax errors exit 1 and missing files exit 2")
  {
    const fs::path bad = scratch_dir() / "bad.btlf";
    testsupport::write_file(bad.string(), "behaviortree T {\n  sequence { }\n}\n");
    const auto r = cli({"check", bad.string()});
    CHECK(r.code == kDiagnostics);
    CHECK(r.err.find("bad.btlf:2:") != std::string::npos);
    CHECK(cli({"check", (scratch_dir() / "missing.btlf").string()}).code == kUsage);
  }

  TEST_CASE("usage errors exit 2")
  {
    CHECK(cli({}).code == kUsage);
    CHECK(cli({"frobnicate"}).code == kUsage);
    CHECK(cli({"run", fixture("valid/seq_demo.btlf")}).code == kUsage);
    CHECK(cli({"fuzz", "--depth", "0"}).code == kUsage);
    CHECK(cli({"fuzz", "--count", "1", "--mutate", "nonsense"}).code == kUsage);
    CHECK(cli({"--help"}).code == kOk);
  }

  TEST_CASE("dot writes both views")
  {
    const auto bt = cli({"dot", fixture("valid/channel_backward.btlf")});
    CHECK(bt.code == kOk);
    CHECK(bt.out.rfind("digraph", 0) == 0);
    const fs::path out = scratch_dir() / "reactors.dot";
    CHECK(cli({"dot", "--view", "reactors", "-o", out.string(), fixture("valid/channel_backward.btlf")}).code == kOk);
    CHECK(testsupport::read_file(out.string()).find("Pre_x") != std::string::npos);
    CHECK(cli({"dot", "--view", "reactors", fixture("check/cross_branch.btlf")}).code == kDiagnostics);
  }

  TEST_CASE("run: compiled and interpreted traces match")
  {
    const fs::path a = scratch_dir() / "a.jsonl";
    const fs::path b = scratch_dir() / "b.jsonl";
    for (const auto* name : {"seq_demo", "mixed_types", "parallel_mix", "channel_backward"}) {
      CAPTURE(name);
      const std::string tree = fixture(std::string("valid/") + name + ".btlf");
      const std::string sc = fixture(std::string("valid/") + name + ".json");
      CHECK(cli({"run", tree, "--scenario", sc, "--trace", a.string()}).code == kOk);
      CHECK(cli({"run", tree, "--scenario", sc, "--trace", b.string(), "--oracle"}).code == kOk);
      CHECK(testsupport::read_file(a.string()) == testsupport::read_file(b.string()));
    }
    const auto stdout_run = cli({"run", fixture("valid/seq_demo.btlf"), "--scenario", fixture("valid/seq_demo.json")});
    CHECK(stdout_run.out.find("\"status-emitted\"") != std::string::npos);
  }

  TEST_CASE("run: runtime errors exit 1")
  {
    const auto r = cli({"run", fixture("valid/double_status.btlf"), "--scenario", fixture("valid/default.json")});
    CHECK(r.code == kDiagnostics);
    CHECK(r.err.find("error: DoubleStatus:") != std::string::npos);
    CHECK(r.out.find("\"kind\":\"error\"") != std::string::npos);
  }

  TEST_CASE("run: bad scenarios exit 1")
  {
    const fs::path sc = scratch_dir() / "bad.json";
    testsupport::write_file(sc.string(), R"({"timers": [{"offset_ms": 0, "period_ms": 100}], "injections": [{"time_ms": 0, "port": "nope", "value": 1}], "horizon_ms": 300})");
    const auto r = cli({"run", fixture("valid/seq_demo.btlf"), "--scenario", sc.string()});
    CHECK(r.code == kDiagnostics);
    CHECK(r.err.find("UnknownPort") != std::string::npos);
  }

  TEST_CASE("fuzz reports")
  {
    const auto ok = cli({"fuzz", "--count", "20", "--seed", "5", "--ticks", "30"});
    CHECK(ok.code == kOk);
    CHECK(ok.out == "20/20 equivalent\n");
    const auto bad = cli({"fuzz", "--count", "200", "--seed", "42", "--mutate", "fallback-swap", "--repro-dir",
                          scratch_dir().string()});
    CHECK(bad.code == kDiagnostics);
    CHECK(bad.out.find("divergence in case seed") != std::string::npos);
    CHECK(bad.out.find("reproduction written to") != std::string::npos);
  }

  TEST_CASE("plant summary")
  {
    const auto r = cli({"plant"});
    CHECK(r.code == kOk);
    CHECK(r.out.find("AGVBehavior: ") == 0);
    CHECK(r.out.find("(compiled)") != std::string::npos);
  }
}
