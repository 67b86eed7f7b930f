#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fsfmb/config.hpp"
#include "fsfmb/report.hpp"

namespace fsfmb {

/// Subcommands in the order they are documented.
const std::vector<std::string>& command_names();

/// Output of one stage before it is written to disk.
struct StageResult {
  std::string command;
  Json result;
  Table table;
  Table plot;
  std::vector<std::string> lines;     // human-readable summary for stdout
  std::vector<std::string> warnings;
  std::vector<std::string> inputs;    // files read
};

/// Base factors plus the generated candidate terms.
struct Universe {
  FactorPanel panel;
  IndexSet base;
  IndexSet candidates;
};

Universe build_universe(const FactorPanel& factor_file, const RunConfig& config);

/// Generic names for `n` base factors: A, B, ..., Z, AA, AB, ...
std::vector<std::string> generic_base_names(std::size_t n);

StageResult run_expand(const std::vector<std::string>& base_names, const ExpansionMode& mode);

/// Runs one subcommand (including `expand`, which takes its base names from
/// the config or the factor file header). Errors propagate as fsfmb::Error.
StageResult run_stage(const std::string& command, const RunConfig& config);

/// The report document: command, version, config and result. Contains no
/// timestamps, so identical inputs give identical bytes.
Json report_document(const StageResult& stage, const RunConfig& config);

/// Writes <command>.json, <command>.csv, <command>_plot.csv and manifest.json
/// under `dir`; returns the paths written.
std::vector<std::filesystem::path> write_artifacts(const StageResult& stage, const RunConfig& config,
                                                   const std::filesystem::path& dir);

}  // namespace fsfmb
