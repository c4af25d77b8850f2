#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "btflow/ast.hpp"
#include "btflow/parser.hpp"
#include "btflow/scenario.hpp"
#include "btflow/trace.hpp"

namespace testsupport {

inline std::string source_dir() { return BTFLOW_SOURCE_DIR; }

inline std::string read_file(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text)
{
  std::ofstream(path, std::ios::binary) << text;
}

inline btflow::BtDef parse_ok(const std::string& text, const std::string& file = "<test>")
{
  auto r = btflow::parse(text, file);
  if (!r.ok()) {
    std::string msg;
    for (const auto& d : r.diagnostics) msg += btflow::format_diagnostic(d) + "\n";
    throw std::runtime_error("parse failed:\n" + msg);
  }
  return *r.def;
}

inline btflow::BtDef load_fixture(const std::string& rel)
{
  return parse_ok(read_file(source_dir() + "/" + rel), rel);
}

/// Task whose script always yields `s`.
inline btflow::BtNode fixed_task(const std::string& label, btflow::Status s)
{
  btflow::BtNode n;
  n.kind = btflow::NodeKind::Task;
  n.label = label;
  btflow::ScriptStep step;
  step.status = s;
  n.body = btflow::ScriptBody{{step}, btflow::ScriptTail::Loop};
  return n;
}

inline btflow::BtDef tree_of(btflow::BtNode root, const std::string& name = "T")
{
  btflow::BtDef def;
  def.name = name;
  def.root = std::move(root);
  return def;
}

inline btflow::BtNode composite(btflow::NodeKind kind, std::vector<btflow::BtNode> children, int threshold = 0)
{
  btflow::BtNode n;
  n.kind = kind;
  n.children = std::move(children);
  n.threshold = threshold != 0 ? threshold : static_cast<int>(n.children.size());
  return n;
}

inline btflow::Scenario ticks(int count, std::int64_t period = 250)
{
  btflow::Scenario s;
  s.timers.push_back({0, period, "start"});
  s.horizon_ms = period * count;
  return s;
}

/// Status events of one node id, as "SUCCESS"/"FAILURE" per tick time.
inline std::vector<std::pair<std::int64_t, std::string>> statuses_of(const btflow::Trace& t, const std::string& id)
{
  std::vector<std::pair<std::int64_t, std::string>> out;
  for (const auto& e : t.events) {
    if (e.kind != btflow::TraceKind::StatusEmitted || e.subject != id) continue;
    out.emplace_back(e.tag.time_ms, e.payload.find("SUCCESS") != std::string::npos ? "SUCCESS" : "FAILURE");
  }
  return out;
}

/// The status of `id` at the single tick of `t`: SUCCESS, FAILURE or RUNNING.
inline btflow::Status single_status(const btflow::Trace& t, const std::string& id)
{
  const auto s = statuses_of(t, id);
  if (s.empty()) return btflow::Status::Running;
  return s.front().second == "SUCCESS" ? btflow::Status::Success : btflow::Status::Failure;
}

inline std::vector<std::vector<btflow::Status>> all_status_vectors(int n)
{
  std::vector<std::vector<btflow::Status>> out{{}};
  for (int i = 0; i < n; ++i) {
    std::vector<std::vector<btflow::Status>> next;
    for (const auto& v : out) {
      for (auto s : {btflow::Status::Success, btflow::Status::Failure, btflow::Status::Running}) {
        auto w = v;
        w.push_back(s);
        next.push_back(std::move(w));
      }
    }
    out = std::move(next);
  }
  return out;
}

/// Reference semantics of the composites, written independently of both
/// executors.
inline btflow::Status expected_parallel(const std::vector<btflow::Status>& v, int m)
{
  int s = 0;
  int f = 0;
  for (auto x : v) {
    s += x == btflow::Status::Success ? 1 : 0;
    f += x == btflow::Status::Failure ? 1 : 0;
  }
  const int n = static_cast<int>(v.size());
  if (s >= m) return btflow::Status::Success;
  if (f >= n - m + 1) return btflow::Status::Failure;
  return btflow::Status::Running;
}

inline btflow::Status expected_sequence(const std::vector<btflow::Status>& v)
{
  for (auto x : v) {
    if (x != btflow::Status::Success) return x;
  }
  return btflow::Status::Success;
}

inline btflow::Status expected_fallback(const std::vector<btflow::Status>& v)
{
  for (auto x : v) {
    if (x != btflow::Status::Failure) return x;
  }
  return btflow::Status::Failure;
}

inline btflow::Status dual(btflow::Status s)
{
  if (s == btflow::Status::Success) return btflow::Status::Failure;
  if (s == btflow::Status::Failure) return btflow::Status::Success;
  return s;
}

}  // namespace testsupport
