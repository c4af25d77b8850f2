#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace btflow::cli {

enum ExitCode { kOk = 0, kDiagnostics = 1, kUsage = 2 };

struct Io
{
  std::ostream& out;
  std::ostream& err;
  bool color = false;
};

int cmd_check(const std::string& file, bool json, Io io);
int cmd_dot(const std::string& file, const std::string& view, const std::string& output, Io io);
int cmd_run(const std::string& file, const std::string& scenario, const std::string& trace, bool oracle,
            bool internal, Io io);

struct FuzzArgs
{
  int count = 10;
  std::uint64_t seed = 0;
  int depth = 4;
  int children = 5;
  int ticks = 100;
  std::string mutate;  // "" or "fallback-swap"
  std::string repro_dir = ".";
};

int cmd_fuzz(const FuzzArgs& args, Io io);
int cmd_plant(const std::string& trace, bool oracle, const std::string& write_golden, Io io);

/// Full command line: parses arguments and dispatches.
int run_cli(const std::vector<std::string>& args, Io io);

}  // namespace btflow::cli
