#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "btflow/ast.hpp"
#include "btflow/exec.hpp"
#include "btflow/scenario.hpp"
#include "btflow/translator.hpp"

namespace btflow {

struct FuzzOptions
{
  int count = 10;
  std::uint64_t seed = 0;
  int depth = 4;
  int children = 5;
  int ticks = 100;
  TranslateOptions translate;
  std::string repro_dir;  // empty: do not write reproduction files
};

struct Divergence
{
  std::uint64_t case_seed = 0;
  BtDef def;
  Scenario scenario;
  Tag tag;                     // tag of the first differing event
  std::size_t line = 0;        // 1-based line of the first difference
  std::string compiled_line;   // empty if the compiled trace ended first
  std::string oracle_line;
};

struct FuzzReport
{
  int total = 0;
  int equivalent = 0;
  std::optional<Divergence> divergence;  // first one, minimized
  std::string repro_file;

  /// "N/N equivalent" or a description of the first divergence.
  std::string summary() const;
};

/// Seed of case `i` of a fuzz run started with `seed`.
std::uint64_t case_seed(std::uint64_t seed, int i);

/// Compiled and interpreted traces (comparable subset) for one input.
/// Exceptions from either side are rendered into the text.
std::string compiled_trace(const BtDef& def, const Scenario& s, const ExternRegistry& externs,
                           const TranslateOptions& opts = {});
std::string oracle_trace(const BtDef& def, const Scenario& s, const ExternRegistry& externs);

/// First difference between the two executions, if any.
std::optional<Divergence> compare(const BtDef& def, const Scenario& s, const ExternRegistry& externs,
                                  const TranslateOptions& opts = {});

/// Shrinks a divergence: shorter horizon, fewer injections, smaller tree.
Divergence minimize(const Divergence& d, const ExternRegistry& externs, const TranslateOptions& opts = {});

FuzzReport run_fuzz(const FuzzOptions& options, const ExternRegistry& externs = {});

}  // namespace btflow
