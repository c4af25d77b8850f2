#include "btflow/fuzz.hpp"

#include <fstream>
#include <sstream>

#include "btflow/check.hpp"
#include "btflow/generator.hpp"
#include "btflow/oracle.hpp"
#include "btflow/parser.hpp"
#include "btflow/runtime.hpp"

namespace btflow {

std::uint64_t case_seed(std::uint64_t seed, int i)
{
  // splitmix64 over (seed, i)
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(i) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string compiled_trace(const BtDef& def, const Scenario& s, const ExternRegistry& externs,
                           const TranslateOptions& opts)
{
  try {
    return run(translate(def, opts), s, externs).to_jsonl();
  } catch (const std::exception& e) {
    return std::string("exception: ") + e.what() + "\n";
  }
}

std::string oracle_trace(const BtDef& def, const Scenario& s, const ExternRegistry& externs)
{
  try {
    return run_oracle(def, s, externs).to_jsonl();
  } catch (const std::exception& e) {
    return std::string("exception: ") + e.what() + "\n";
  }
}

namespace {

std::vector<std::string> split_lines(const std::string& s)
{
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

Tag tag_of_line(const std::string& line)
{
  Tag t;
  const auto tp = line.find("\"time\":");
  const auto mp = line.find("\"microstep\":");
  if (tp != std::string::npos) t.time_ms = std::stoll(line.substr(tp + 7));
  if (mp != std::string::npos) t.microstep = static_cast<std::uint32_t>(std::stoul(line.substr(mp + 12)));
  return t;
}

bool still_diverges(const BtDef& def, const Scenario& s, const ExternRegistry& externs, const TranslateOptions& opts)
{
  if (validate(def).has_errors()) return false;
  return compare(def, s, externs, opts).has_value();
}

/// Every composite node path, parents before children.
void composite_paths(const BtNode& n, NodePath& path, std::vector<NodePath>& out)
{
  if (n.leaf()) return;
  out.push_back(path);
  for (std::size_t i = 0; i < n.children.size(); ++i) {
    path.push_back(static_cast<int>(i));
    composite_paths(n.children[i], path, out);
    path.pop_back();
  }
}

BtNode& node_at(BtDef& def, const NodePath& path)
{
  BtNode* n = &def.root;
  for (int i : path) n = &n->children[static_cast<std::size_t>(i)];
  return *n;
}

/// One successful shrinking step of the tree, or false.
bool shrink_tree(BtDef& def, const Scenario& s, const ExternRegistry& externs, const TranslateOptions& opts)
{
  std::vector<NodePath> composites;
  NodePath path;
  composite_paths(def.root, path, composites);
  for (const auto& p : composites) {
    const std::size_t count = node_at(def, p).children.size();
    // Replace the composite by one of its children.
    for (std::size_t i = 0; i < count; ++i) {
      BtDef cand = def;
      BtNode& target = node_at(cand, p);
      BtNode child = target.children[i];
      for (const auto& c : target.channels) child.channels.insert(child.channels.begin(), c);
      if (child.leaf() && !child.channels.empty()) continue;
      target = std::move(child);
      if (still_diverges(cand, s, externs, opts)) {
        def = std::move(cand);
        return true;
      }
    }
    // Remove one child.
    for (std::size_t i = 0; count > 1 && i < count; ++i) {
      BtDef cand = def;
      BtNode& target = node_at(cand, p);
      target.children.erase(target.children.begin() + static_cast<std::ptrdiff_t>(i));
      if (target.kind == NodeKind::Parallel) {
        target.threshold = std::min(target.threshold, static_cast<int>(target.children.size()));
      }
      if (still_diverges(cand, s, externs, opts)) {
        def = std::move(cand);
        return true;
      }
    }
  }
  return false;
}

}  // namespace

std::optional<Divergence> compare(const BtDef& def, const Scenario& s, const ExternRegistry& externs,
                                  const TranslateOptions& opts)
{
  const std::string a = compiled_trace(def, s, externs, opts);
  const std::string b = oracle_trace(def, s, externs);
  if (a == b) return std::nullopt;
  const auto la = split_lines(a);
  const auto lb = split_lines(b);
  std::size_t i = 0;
  while (i < la.size() && i < lb.size() && la[i] == lb[i]) ++i;
  Divergence d;
  d.def = def;
  d.scenario = s;
  d.line = i + 1;
  d.compiled_line = i < la.size() ? la[i] : "";
  d.oracle_line = i < lb.size() ? lb[i] : "";
  d.tag = tag_of_line(!d.compiled_line.empty() ? d.compiled_line : d.oracle_line);
  return d;
}

Divergence minimize(const Divergence& d, const ExternRegistry& externs, const TranslateOptions& opts)
{
  Divergence best = d;
  BtDef def = d.def;
  Scenario s = d.scenario;

  Scenario cut = s;
  cut.horizon_ms = d.tag.time_ms + 1;
  std::erase_if(cut.injections, [&](const Injection& inj) { return inj.time_ms > d.tag.time_ms; });
  if (still_diverges(def, cut, externs, opts)) s = std::move(cut);

  for (std::size_t i = s.injections.size(); i-- > 0;) {
    Scenario cand = s;
    cand.injections.erase(cand.injections.begin() + static_cast<std::ptrdiff_t>(i));
    if (still_diverges(def, cand, externs, opts)) s = std::move(cand);
  }
  while (shrink_tree(def, s, externs, opts)) {
  }
  for (std::size_t i = def.ports.size(); i-- > 0;) {
    BtDef cand = def;
    const std::string name = cand.ports[i].name;
    cand.ports.erase(cand.ports.begin() + static_cast<std::ptrdiff_t>(i));
    Scenario sc = s;
    std::erase_if(sc.injections, [&](const Injection& inj) { return inj.port == name; });
    if (still_diverges(cand, sc, externs, opts)) {
      def = std::move(cand);
      s = std::move(sc);
    }
  }
  if (auto r = compare(def, s, externs, opts)) {
    best = std::move(*r);
    best.case_seed = d.case_seed;
  }
  return best;
}

std::string FuzzReport::summary() const
{
  std::ostringstream out;
  if (!divergence) {
    out << equivalent << "/" << total << " equivalent\n";
    return out.str();
  }
  const Divergence& d = *divergence;
  out << "divergence in case seed " << d.case_seed << " at " << tag_string(d.tag) << ", trace line " << d.line
      << " (" << equivalent << "/" << total << " equivalent before it)\n";
  out << "--- minimized tree\n" << pretty_print(d.def);
  out << "--- scenario\n" << scenario_to_json(d.scenario);
  out << "--- compiled: " << (d.compiled_line.empty() ? "<end of trace>" : d.compiled_line) << "\n";
  out << "+++ oracle:   " << (d.oracle_line.empty() ? "<end of trace>" : d.oracle_line) << "\n";
  if (!repro_file.empty()) out << "reproduction written to " << repro_file << "\n";
  return out.str();
}

FuzzReport run_fuzz(const FuzzOptions& options, const ExternRegistry& externs)
{
  FuzzReport report;
  for (int i = 0; i < options.count; ++i) {
    const std::uint64_t cs = case_seed(options.seed, i);
    const BtDef def = gen_random_def(cs, options.depth, options.children);
    const Scenario sc = gen_random_scenario(def, cs, options.ticks);
    ++report.total;
    auto d = compare(def, sc, externs, options.translate);
    if (!d) {
      ++report.equivalent;
      continue;
    }
    d->case_seed = cs;
    report.divergence = minimize(*d, externs, options.translate);
    if (!options.repro_dir.empty()) {
      const std::string base = options.repro_dir + "/fuzz-repro-" + std::to_string(cs);
      std::ofstream(base + ".btlf") << pretty_print(report.divergence->def);
      std::ofstream(base + ".json") << scenario_to_json(report.divergence->scenario);
      report.repro_file = base + ".btlf";
    }
    break;
  }
  return report;
}

}  // namespace btflow
