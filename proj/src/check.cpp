#include "btflow/check.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "btflow/expr.hpp"

namespace btflow {

std::string_view severity_name(Severity s) { return s == Severity::Error ? "error" : "warning"; }

bool CheckReport::has_errors() const
{
  return std::any_of(items.begin(), items.end(), [](const CheckItem& i) { return i.severity == Severity::Error; });
}

std::string CheckReport::to_jsonl() const
{
  std::string out;
  for (const auto& i : items) {
    out += "{\"severity\":" + json_quote(severity_name(i.severity)) + ",\"code\":" + json_quote(i.code) +
           ",\"nodePath\":" + json_quote(i.node_path) + ",\"message\":" + json_quote(i.message) + "}\n";
  }
  return out;
}

std::string ResolvedRef::key(const NodeIndex& index) const
{
  if (kind == RefKind::Channel) return "chan:" + index.entries[static_cast<std::size_t>(owner)].id + ":" + name;
  return "port:" + name;
}

namespace {

struct VisibleChannel
{
  std::string name;
  ValueType type;
  int owner;
};

class Resolver
{
public:
  Resolver(const BtDef& def, Resolution& res, CheckReport* report) : def_(def), res_(res), report_(report) {}

  void run()
  {
    for (const auto& p : def_.ports) {
      ports_.emplace(p.name, &p);
    }
    std::vector<VisibleChannel> scope;
    visit(0, scope);
  }

private:
  void error(const NodeEntry& e, std::string code, std::string msg, const SourceSpan& span)
  {
    if (report_ != nullptr) report_->items.push_back({Severity::Error, std::move(code), e.id, std::move(msg), span});
  }

  std::optional<ResolvedRef> lookup(const std::vector<VisibleChannel>& scope, const std::string& name) const
  {
    for (auto it = scope.rbegin(); it != scope.rend(); ++it) {
      if (it->name == name) return ResolvedRef{RefKind::Channel, name, it->type, it->owner};
    }
    auto p = ports_.find(name);
    if (p != ports_.end()) {
      const PortDecl& decl = *p->second;
      return ResolvedRef{decl.direction == PortDirection::Input ? RefKind::InputPort : RefKind::OutputPort, name,
                         decl.type, -1};
    }
    return std::nullopt;
  }

  void visit(int entry, std::vector<VisibleChannel>& scope)
  {
    const NodeEntry& e = res_.index.entries[static_cast<std::size_t>(entry)];
    const BtNode& n = *e.node;
    const std::size_t mark = scope.size();
    for (const auto& c : n.channels) {
      if (is_reserved_name(c.name)) {
        error(e, "ReservedName", "'" + c.name + "' is reserved and cannot name a channel", c.span);
      } else if (lookup(scope, c.name) ||
                 std::any_of(scope.begin() + static_cast<std::ptrdiff_t>(mark), scope.end(),
                             [&](const VisibleChannel& v) { return v.name == c.name; })) {
        error(e, "DuplicateChannel", "channel '" + c.name + "' clashes with a visible port or channel", c.span);
      }
      scope.push_back({c.name, c.type, entry});
    }
    if (n.leaf()) {
      auto& srcs = res_.sources[static_cast<std::size_t>(entry)];
      auto& effs = res_.effects[static_cast<std::size_t>(entry)];
      for (const auto& r : n.sources) {
        auto rr = lookup(scope, r.name);
        if (!rr) {
          error(e, "UnresolvedRef", "source '" + r.name + "' does not name a visible port or channel", r.span);
        } else if (rr->kind == RefKind::OutputPort) {
          error(e, "SourceNotReadable", "source '" + r.name + "' is an output port", r.span);
          rr.reset();
        }
        srcs.push_back(rr);
      }
      for (const auto& r : n.effects) {
        auto rr = lookup(scope, r.name);
        if (!rr) {
          error(e, "UnresolvedRef", "effect '" + r.name + "' does not name a visible port or channel", r.span);
        } else if (rr->kind == RefKind::InputPort) {
          error(e, "EffectNotWritable", "effect '" + r.name + "' is an input port", r.span);
          rr.reset();
        }
        effs.push_back(rr);
      }
    }
    for (int c : e.children) visit(c, scope);
    scope.resize(mark);
  }

  const BtDef& def_;
  Resolution& res_;
  CheckReport* report_;
  std::map<std::string, const PortDecl*> ports_;
};

struct Access
{
  int entry;
  std::string key;
  std::string name;
  bool is_port;
};

void collect_access(const Resolution& res, std::vector<Access>& writers, std::vector<Access>& readers)
{
  for (int leaf : res.index.leaves) {
    const auto idx = static_cast<std::size_t>(leaf);
    for (const auto& r : res.effects[idx]) {
      if (r) writers.push_back({leaf, r->key(res.index), r->name, r->kind != RefKind::Channel});
    }
    for (const auto& r : res.sources[idx]) {
      if (r && r->kind == RefKind::Channel) readers.push_back({leaf, r->key(res.index), r->name, false});
    }
  }
}

bool lca_is_parallel(const NodeIndex& index, int a, int b)
{
  const int l = index.lca(a, b);
  return index.entries[static_cast<std::size_t>(l)].node->kind == NodeKind::Parallel;
}

std::vector<WriterConflict> writer_conflicts(const Resolution& res)
{
  std::vector<Access> writers;
  std::vector<Access> readers;
  collect_access(res, writers, readers);
  std::vector<WriterConflict> out;
  for (std::size_t i = 0; i < writers.size(); ++i) {
    for (std::size_t j = i + 1; j < writers.size(); ++j) {
      const auto& a = writers[i];
      const auto& b = writers[j];
      if (a.key != b.key || a.entry == b.entry) continue;
      if (!lca_is_parallel(res.index, a.entry, b.entry)) continue;
      out.push_back({a.name, a.is_port, res.index.entries[static_cast<std::size_t>(a.entry)].id,
                     res.index.entries[static_cast<std::size_t>(b.entry)].id});
    }
  }
  // Writers were collected in leaf order, which is node-path order.
  return out;
}

void check_body(const NodeEntry& e, const Resolution& res, CheckReport& report)
{
  const BtNode& n = *e.node;
  auto err = [&](std::string code, std::string msg, const SourceSpan& span) {
    report.items.push_back({Severity::Error, std::move(code), e.id, std::move(msg), span});
  };

  std::set<std::string> sources;
  std::set<std::string> effects;
  std::set<std::string> states;
  for (const auto& r : n.sources) {
    if (!sources.insert(r.name).second) err("DuplicateRef", "source '" + r.name + "' listed twice", r.span);
  }
  for (const auto& r : n.effects) {
    if (!effects.insert(r.name).second) err("DuplicateRef", "effect '" + r.name + "' listed twice", r.span);
  }
  for (const auto& s : n.states) {
    if (is_reserved_name(s.name)) {
      err("ReservedName", "'" + s.name + "' is reserved and cannot name a state variable", s.span);
    } else if (!states.insert(s.name).second) {
      err("DuplicateState", "state '" + s.name + "' declared twice", s.span);
    } else if (sources.count(s.name) != 0 || effects.count(s.name) != 0) {
      err("StateNameClash", "state '" + s.name + "' shadows a source or effect", s.span);
    }
    if (type_of(s.initial) != s.type && !coerce(s.initial, s.type)) {
      err("TypeMismatch", "initial value of state '" + s.name + "' is not " + std::string(type_name(s.type)),
          s.span);
    }
  }

  auto check_expr = [&](const Expr& x, const SourceSpan& span) {
    std::vector<const Expr*> stack{&x};
    while (!stack.empty()) {
      const Expr* cur = stack.back();
      stack.pop_back();
      if (cur->op == ExprOp::Present && sources.count(cur->name) == 0) {
        err("UnknownIdentifier", "present(" + cur->name + ") requires a declared source", span);
      } else if (cur->op == ExprOp::Ref && sources.count(cur->name) == 0 && states.count(cur->name) == 0) {
        err("UnknownIdentifier", "'" + cur->name + "' is neither a source nor a state variable", span);
      }
      for (const auto& a : cur->args) stack.push_back(&a);
    }
  };

  if (const auto* eb = std::get_if<ExprBody>(&n.body)) {
    if (n.kind == NodeKind::Task) {
      err("ExprOnTask", "@expr bodies are only allowed on conditions", n.span);
    }
    check_expr(eb->condition, n.span);
  } else if (const auto* sb = std::get_if<ScriptBody>(&n.body)) {
    if (sb->steps.empty()) err("EmptyScript", "@script requires at least one step", n.span);
    for (const auto& step : sb->steps) {
      std::set<std::string> emitted;
      for (const auto& a : step.emits) {
        const bool implicit = a.target == "success" || a.target == "failure";
        if (!implicit && effects.count(a.target) == 0) {
          err("UndeclaredEffect", "emit to '" + a.target + "' which is not a declared effect", a.span);
        }
        if (!emitted.insert(a.target).second) err("DuplicateEmit", "'" + a.target + "' emitted twice in one step", a.span);
        check_expr(a.value, a.span);
      }
      std::set<std::string> assigned;
      for (const auto& a : step.state_updates) {
        if (states.count(a.target) == 0) err("UndeclaredState", "'" + a.target + "' is not a state variable", a.span);
        if (!assigned.insert(a.target).second) err("DuplicateAssign", "state '" + a.target + "' assigned twice", a.span);
        check_expr(a.value, a.span);
      }
      if (n.kind == NodeKind::Condition && step.status == Status::Running) {
        report.items.push_back({Severity::Warning, "ConditionRunning", e.id,
                                "condition step yields running; conditions are not expected to run", step.span});
      }
    }
  } else if (std::get<ExternBody>(n.body).callback.empty()) {
    err("EmptyExtern", "@extern requires a callback name", n.span);
  }
  (void)res;
}

}  // namespace

Resolution Resolution::build(const BtDef& def, CheckReport* report)
{
  Resolution res;
  res.index = NodeIndex::build(def);
  res.sources.resize(res.index.entries.size());
  res.effects.resize(res.index.entries.size());
  Resolver(def, res, report).run();
  return res;
}

std::vector<WriterConflict> parallel_writer_conflicts(const BtDef& def)
{
  return writer_conflicts(Resolution::build(def));
}

CheckReport validate(const BtDef& def)
{
  CheckReport report;

  std::set<std::string> port_names;
  for (const auto& p : def.ports) {
    if (is_reserved_name(p.name)) {
      report.items.push_back({Severity::Error, "ReservedName",
                              "r", "'" + p.name + "' is reserved and cannot name a port", p.span});
    } else if (!port_names.insert(p.name).second) {
      report.items.push_back({Severity::Error, "DuplicatePort", "r", "port '" + p.name + "' declared twice", p.span});
    }
  }

  const Resolution res = Resolution::build(def, &report);

  for (const auto& e : res.index.entries) {
    const BtNode& n = *e.node;
    if (n.leaf()) {
      check_body(e, res, report);
      continue;
    }
    if (n.children.empty()) {
      report.items.push_back({Severity::Error, "EmptyComposite",
                              e.id, std::string(node_kind_name(n.kind)) + " requires at least one child", n.span});
    }
    if (n.kind == NodeKind::Parallel) {
      const int count = static_cast<int>(n.children.size());
      if (n.threshold < 1 || n.threshold > count) {
        report.items.push_back({Severity::Error, "ThresholdRange", e.id,
                                "parallel threshold " + std::to_string(n.threshold) + " outside 1.." +
                                  std::to_string(count),
                                n.span});
      }
    }
  }

  for (const auto& c : writer_conflicts(res)) {
    const int a = res.index.find(c.first);
    report.items.push_back({Severity::Error, "ParallelWriters", c.first,
                            "parallel writers on " + std::string(c.is_port ? "port " : "channel ") + c.name + ": " +
                              c.first + " and " + c.second,
                            res.index.entries[static_cast<std::size_t>(a)].node->span});
  }

  std::vector<Access> writers;
  std::vector<Access> readers;
  collect_access(res, writers, readers);
  for (const auto& r : readers) {
    for (const auto& w : writers) {
      if (r.key != w.key || r.entry == w.entry) continue;
      if (!lca_is_parallel(res.index, r.entry, w.entry)) continue;
      const auto& rid = res.index.entries[static_cast<std::size_t>(r.entry)].id;
      const auto& wid = res.index.entries[static_cast<std::size_t>(w.entry)].id;
      report.items.push_back({Severity::Error, "ParallelReadWrite", rid,
                              "channel " + r.name + " read by " + rid + " and written by " + wid +
                                " in concurrent branches of a parallel",
                              res.index.entries[static_cast<std::size_t>(r.entry)].node->span});
    }
  }

  // Channel usage warnings.
  for (const auto& e : res.index.entries) {
    for (const auto& c : e.node->channels) {
      const std::string key = "chan:" + e.id + ":" + c.name;
      const bool written = std::any_of(writers.begin(), writers.end(), [&](const Access& a) { return a.key == key; });
      const bool read = std::any_of(readers.begin(), readers.end(), [&](const Access& a) { return a.key == key; });
      if (!written && !read) {
        report.items.push_back({Severity::Warning, "ChannelUnused", e.id, "channel '" + c.name + "' is never used",
                                c.span});
      } else if (!written) {
        report.items.push_back({Severity::Warning, "ChannelUnwritten", e.id,
                                "channel '" + c.name + "' is read but never written", c.span});
      }
    }
  }
  return report;
}

}  // namespace btflow
