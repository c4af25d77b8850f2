#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "btflow/check.hpp"
#include "btflow/fuzz.hpp"
#include "btflow/generator.hpp"
#include "btflow/oracle.hpp"
#include "btflow/parser.hpp"
#include "btflow/plant.hpp"
#include "btflow/runtime.hpp"
#include "btflow/translator.hpp"

namespace py = pybind11;
using namespace btflow;

namespace {

BtDef parse_or_throw(const std::string& source, const std::string& file)
{
  ParseResult pr = parse(source, file);
  if (!pr.ok()) {
    std::string msg;
    for (const auto& d : pr.diagnostics) msg += format_diagnostic(d) + "\n";
    throw py::value_error(msg);
  }
  return std::move(*pr.def);
}

py::object to_py(const Slot& s)
{
  if (!s) return py::none();
  return std::visit([](const auto& v) -> py::object { return py::cast(v); }, *s);
}

Value from_py(const py::handle& h)
{
  // bool first: Python bools are ints.
  if (py::isinstance<py::bool_>(h)) return Value(h.cast<bool>());
  if (py::isinstance<py::int_>(h)) return Value(h.cast<std::int64_t>());
  if (py::isinstance<py::float_>(h)) return Value(h.cast<double>());
  if (py::isinstance<py::str>(h)) return Value(h.cast<std::string>());
  throw py::type_error("extern values must be bool, int, float or str");
}

/// Wraps a Python callable as a host callback. The callable receives a dict
/// {node, label, time, sources, states} and returns a dict with "status"
/// ("success" | "failure" | "running"), optional "emits" and "states".
ExternFn wrap_callable(py::function fn)
{
  return [fn](ExternCall& call) {
    py::gil_scoped_acquire gil;
    py::dict srcs;
    for (const auto& [k, v] : call.sources) srcs[py::str(k)] = to_py(v);
    py::dict states;
    for (const auto& [k, v] : call.states) states[py::str(k)] = to_py(v);
    py::dict arg;
    arg["node"] = std::string(call.node_id);
    arg["label"] = std::string(call.label);
    arg["time"] = call.tag.time_ms;
    arg["sources"] = srcs;
    arg["states"] = states;
    py::dict res = fn(arg);
    ExternResult out;
    const std::string status = res.contains("status") ? res["status"].cast<std::string>() : "running";
    out.success = status == "success" || status == "both";
    out.failure = status == "failure" || status == "both";
    if (res.contains("emits")) {
      for (auto item : res["emits"].cast<py::dict>()) out.emits.emplace_back(item.first.cast<std::string>(), from_py(item.second));
    }
    if (res.contains("states")) {
      for (auto item : res["states"].cast<py::dict>()) {
        call.states.insert_or_assign(item.first.cast<std::string>(), from_py(item.second));
      }
    }
    return out;
  };
}

ExternRegistry make_registry(const py::dict& externs, bool with_plant)
{
  ExternRegistry reg = with_plant ? plant_externs() : ExternRegistry{};
  for (auto item : externs) reg.register_extern(item.first.cast<std::string>(), wrap_callable(item.second.cast<py::function>()));
  return reg;
}

}  // namespace

PYBIND11_MODULE(_btflow, m)
{
  m.doc() = "Behavior trees compiled to deterministic reactor networks";

  py::register_exception<RunError>(m, "RunError");

  m.def(
    "check",
    [](const std::string& source, const std::string& file) {
      ParseResult pr = parse(source, file);
      py::list items;
      for (const auto& d : pr.diagnostics) {
        py::dict i;
        i["severity"] = std::string(severity_name(d.severity));
        i["code"] = "Syntax";
        i["node_path"] = "";
        i["message"] = d.message;
        i["line"] = d.span.start_line;
        i["col"] = d.span.start_col;
        items.append(i);
      }
      if (pr.ok()) {
        for (const auto& c : validate(*pr.def).items) {
          py::dict i;
          i["severity"] = std::string(severity_name(c.severity));
          i["code"] = c.code;
          i["node_path"] = c.node_path;
          i["message"] = c.message;
          i["line"] = c.span.start_line;
          i["col"] = c.span.start_col;
          items.append(i);
        }
      }
      return items;
    },
    py::arg("source"), py::arg("file") = "<input>", "Parse and validate; returns a list of diagnostics.");

  m.def(
    "pretty_print", [](const std::string& source) { return pretty_print(parse_or_throw(source, "<input>")); },
    py::arg("source"), "Canonical text of a tree.");

  m.def(
    "execution_order", [](const std::string& source) { return execution_order(parse_or_throw(source, "<input>")); },
    py::arg("source"));

  m.def(
    "translate",
    [](const std::string& source) {
      try {
        return translate(parse_or_throw(source, "<input>")).to_json();
      } catch (const std::invalid_argument& e) {
        throw py::value_error(e.what());
      }
    },
    py::arg("source"), "Compiled reactor network as JSON text.");

  m.def(
    "to_dot",
    [](const std::string& source, const std::string& view) {
      const BtDef def = parse_or_throw(source, "<input>");
      if (view == "bt") return to_dot(def);
      if (view != "reactors") throw py::value_error("view must be 'bt' or 'reactors'");
      try {
        return to_dot(translate(def));
      } catch (const std::invalid_argument& e) {
        throw py::value_error(e.what());
      }
    },
    py::arg("source"), py::arg("view") = "bt");

  m.def(
    "run",
    [](const std::string& source, const std::string& scenario, bool oracle, const py::dict& externs,
       bool plant_callbacks) {
      const BtDef def = parse_or_throw(source, "<input>");
      const Scenario sc = parse_scenario(scenario);
      const ExternRegistry reg = make_registry(externs, plant_callbacks);
      Trace tr;
      try {
        tr = oracle ? run_oracle(def, sc, reg) : run(translate(def), sc, reg);
      } catch (const std::invalid_argument& e) {
        throw py::value_error(e.what());
      }
      py::dict out;
      out["trace"] = tr.to_jsonl();
      out["error"] = tr.error ? py::object(py::str(std::string(run_error_name(tr.error->code())))) : py::none();
      out["error_node"] = tr.error ? py::object(py::str(tr.error->node_id())) : py::none();
      return out;
    },
    py::arg("source"), py::arg("scenario"), py::arg("oracle") = false, py::arg("externs") = py::dict(),
    py::arg("plant_callbacks") = true,
    "Runs a scenario; returns {'trace': jsonl, 'error': code or None, 'error_node': id or None}.");

  m.def(
    "fuzz",
    [](int count, std::uint64_t seed, int depth, int children, int ticks, bool mutate) {
      FuzzOptions o;
      o.count = count;
      o.seed = seed;
      o.depth = depth;
      o.children = children;
      o.ticks = ticks;
      if (mutate) o.translate.fault = TranslateFault::SwapFallbackStatus;
      FuzzReport r;
      {
        py::gil_scoped_release nogil;
        r = run_fuzz(o);
      }
      py::dict out;
      out["total"] = r.total;
      out["equivalent"] = r.equivalent;
      out["summary"] = r.summary();
      return out;
    },
    py::arg("count") = 10, py::arg("seed") = 0, py::arg("depth") = 4, py::arg("children") = 5, py::arg("ticks") = 100,
    py::arg("mutate") = false);

  m.def(
    "generate", [](std::uint64_t seed, int depth, int children) { return pretty_print(gen_random_def(seed, depth, children)); },
    py::arg("seed"), py::arg("depth") = 4, py::arg("children") = 5, "Source text of a random valid tree.");

  m.def("plant", [](bool oracle) {
    const Plant& p = bundled_plant();
    const BtDef def = parse_or_throw(p.source, "agv.btlf");
    const Scenario sc = parse_scenario(p.scenario);
    const Trace tr = oracle ? run_oracle(def, sc, plant_externs()) : run(translate(def), sc, plant_externs());
    py::dict out;
    out["source"] = p.source;
    out["scenario"] = p.scenario;
    out["jobs"] = completed_jobs(tr);
    out["trace"] = tr.to_jsonl();
    return out;
  }, py::arg("oracle") = false);
}
