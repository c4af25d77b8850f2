#include "commands.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "btflow/check.hpp"
#include "btflow/fuzz.hpp"
#include "btflow/oracle.hpp"
#include "btflow/parser.hpp"
#include "btflow/plant.hpp"
#include "btflow/runtime.hpp"
#include "btflow/translator.hpp"

namespace btflow::cli {

namespace {

bool read_file(const std::string& path, std::string& text, Io io)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    io.err << "error: cannot read '" << path << "'\n";
    return false;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  text = ss.str();
  return true;
}

bool write_output(const std::string& path, const std::string& text, Io io)
{
  if (path.empty() || path == "-") {
    io.out << text;
    return true;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) {
    io.err << "error: cannot write '" << path << "'\n";
    return false;
  }
  return true;
}

/// Parses and validates; prints diagnostics. Returns the tree only if it
/// has no errors.
std::optional<BtDef> load_tree(const std::string& text, const std::string& file, Io io, int& status)
{
  ParseResult pr = parse(text, file);
  for (const auto& d : pr.diagnostics) io.err << format_diagnostic(d, io.color) << "\n";
  if (!pr.ok()) {
    status = kDiagnostics;
    return std::nullopt;
  }
  const CheckReport report = validate(*pr.def);
  for (const auto& item : report.items) {
    const Diagnostic d{item.severity, item.node_path + ": " + item.message + " [" + item.code + "]", item.span};
    io.err << format_diagnostic(d, io.color) << "\n";
  }
  if (report.has_errors()) {
    status = kDiagnostics;
    return std::nullopt;
  }
  status = kOk;
  return std::move(pr.def);
}

/// Host callbacks available to `run`: the plant stubs plus trivial ones.
ExternRegistry default_externs()
{
  ExternRegistry reg = plant_externs();
  reg.register_extern("alwaysSucceed", [](ExternCall&) { return ExternResult::succeed(); });
  reg.register_extern("alwaysFail", [](ExternCall&) { return ExternResult::fail(); });
  reg.register_extern("alwaysRunning", [](ExternCall&) { return ExternResult::running(); });
  return reg;
}

std::string error_line(const RunError& e)
{
  std::string s = "error: " + std::string(run_error_name(e.code())) + ": " + e.what();
  return s;
}

}  // namespace

int cmd_check(const std::string& file, bool json, Io io)
{
  std::string text;
  if (!read_file(file, text, io)) return kUsage;
  ParseResult pr = parse(text, file);
  for (const auto& d : pr.diagnostics) io.err << format_diagnostic(d, io.color) << "\n";
  if (!pr.ok()) return kDiagnostics;
  const CheckReport report = validate(*pr.def);
  if (json) {
    io.out << report.to_jsonl();
  } else {
    for (const auto& item : report.items) {
      const Diagnostic d{item.severity, item.node_path + ": " + item.message + " [" + item.code + "]", item.span};
      io.err << format_diagnostic(d, io.color) << "\n";
    }
  }
  return report.has_errors() ? kDiagnostics : kOk;
}

int cmd_dot(const std::string& file, const std::string& view, const std::string& output, Io io)
{
  std::string text;
  if (!read_file(file, text, io)) return kUsage;
  int status = kOk;
  if (view == "bt") {
    ParseResult pr = parse(text, file);
    for (const auto& d : pr.diagnostics) io.err << format_diagnostic(d, io.color) << "\n";
    if (!pr.ok()) return kDiagnostics;
    return write_output(output, to_dot(*pr.def), io) ? kOk : kUsage;
  }
  auto def = load_tree(text, file, io, status);
  if (!def) return status;
  return write_output(output, to_dot(translate(*def)), io) ? kOk : kUsage;
}

int cmd_run(const std::string& file, const std::string& scenario, const std::string& trace, bool oracle,
            bool internal, Io io)
{
  std::string text;
  std::string scenario_text;
  if (!read_file(file, text, io) || !read_file(scenario, scenario_text, io)) return kUsage;
  int status = kOk;
  auto def = load_tree(text, file, io, status);
  if (!def) return status;
  try {
    const Scenario sc = parse_scenario(scenario_text);
    const ExternRegistry externs = default_externs();
    const Trace tr = oracle ? run_oracle(*def, sc, externs) : run(translate(*def), sc, externs);
    if (!write_output(trace, tr.to_jsonl(internal && !oracle), io)) return kUsage;
    if (tr.error) {
      io.err << error_line(*tr.error) << "\n";
      return kDiagnostics;
    }
  } catch (const RunError& e) {
    io.err << error_line(e) << "\n";
    return kDiagnostics;
  }
  return kOk;
}

int cmd_fuzz(const FuzzArgs& args, Io io)
{
  FuzzOptions opts;
  opts.count = args.count;
  opts.seed = args.seed;
  opts.depth = args.depth;
  opts.children = args.children;
  opts.ticks = args.ticks;
  opts.repro_dir = args.repro_dir;
  if (args.mutate == "fallback-swap") {
    opts.translate.fault = TranslateFault::SwapFallbackStatus;
  } else if (!args.mutate.empty()) {
    io.err << "error: unknown mutation '" << args.mutate << "'\n";
    return kUsage;
  }
  const FuzzReport report = run_fuzz(opts);
  io.out << report.summary();
  return report.divergence ? kDiagnostics : kOk;
}

int cmd_plant(const std::string& trace, bool oracle, const std::string& write_golden, Io io)
{
  const Plant& plant = bundled_plant();
  const ParseResult pr = parse(plant.source, "agv.btlf");
  const Scenario sc = parse_scenario(plant.scenario);
  const ExternRegistry externs = plant_externs();
  const Trace tr = oracle ? run_oracle(*pr.def, sc, externs) : run(translate(*pr.def), sc, externs);
  if (!write_golden.empty()) {
    // Goldens always come from the interpreter.
    const Trace golden = oracle ? tr : run_oracle(*pr.def, sc, externs);
    if (!write_output(write_golden, golden.to_jsonl(), io)) return kUsage;
  }
  if (!trace.empty() && !write_output(trace, tr.to_jsonl(), io)) return kUsage;
  std::int64_t ticks = 0;
  for (const auto& e : tr.events) ticks += e.kind == TraceKind::PortEvent && e.subject == "start" ? 1 : 0;
  std::ostream& summary = trace == "-" ? io.err : io.out;
  summary << "AGVBehavior: " << completed_jobs(tr) << " jobs completed in " << ticks << " ticks ("
          << (oracle ? "interpreted" : "compiled") << ")\n";
  return tr.error ? kDiagnostics : kOk;
}

int run_cli(const std::vector<std::string>& args, Io io)
{
  CLI::App app{"Behavior trees compiled to deterministic reactor networks", "btflow"};
  app.require_subcommand(1);

  std::string file;
  bool json = false;
  auto* check = app.add_subcommand("check", "Parse and validate a tree");
  check->add_option("file", file, "Tree source (.btlf)")->required();
  check->add_flag("--json", json, "Print the check report as JSON lines on stdout");

  std::string view = "bt";
  std::string output;
  auto* dot = app.add_subcommand("dot", "Export a Graphviz view");
  dot->add_option("file", file, "Tree source (.btlf)")->required();
  dot->add_option("--view", view, "bt or reactors")->check(CLI::IsMember({"bt", "reactors"}));
  dot->add_option("-o,--output", output, "Output file (default: stdout)");

  std::string scenario;
  std::string trace;
  bool oracle = false;
  bool internal = false;
  auto* runc = app.add_subcommand("run", "Execute a tree on a scenario");
  runc->add_option("file", file, "Tree source (.btlf)")->required();
  runc->add_option("--scenario", scenario, "Scenario (.json)")->required();
  runc->add_option("--trace", trace, "Trace output (.jsonl, default: stdout)");
  runc->add_flag("--oracle", oracle, "Use the reference interpreter instead of the compiled network");
  runc->add_flag("--internal", internal, "Include block-level events");

  FuzzArgs fa;
  auto* fuzz = app.add_subcommand("fuzz", "Differential test: compiled network vs interpreter");
  fuzz->add_option("--count", fa.count, "Number of random trees")->check(CLI::NonNegativeNumber);
  fuzz->add_option("--seed", fa.seed, "Base seed");
  fuzz->add_option("--depth", fa.depth, "Maximum tree depth")->check(CLI::Range(1, 12));
  fuzz->add_option("--children", fa.children, "Maximum children per composite")->check(CLI::Range(1, 12));
  fuzz->add_option("--ticks", fa.ticks, "Ticks per scenario")->check(CLI::Range(1, 100000));
  fuzz->add_option("--mutate", fa.mutate, "Deliberate miscompilation: fallback-swap");
  fuzz->add_option("--repro-dir", fa.repro_dir, "Where to write a minimized reproduction");

  std::string golden;
  auto* plant = app.add_subcommand("plant", "Run the bundled AGV plant scenario");
  plant->add_option("--trace", trace, "Trace output (.jsonl)");
  plant->add_flag("--oracle", oracle, "Use the reference interpreter");
  plant->add_option("--write-golden", golden, "Regenerate the golden trace at this path");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    io.out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    io.out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    io.err << "error: " << e.what() << "\n";
    return kUsage;
  }

  if (check->parsed()) return cmd_check(file, json, io);
  if (dot->parsed()) return cmd_dot(file, view, output, io);
  if (runc->parsed()) return cmd_run(file, scenario, trace, oracle, internal, io);
  if (fuzz->parsed()) return cmd_fuzz(fa, io);
  if (plant->parsed()) return cmd_plant(trace, oracle, golden, io);
  return kUsage;
}

}  // namespace btflow::cli
