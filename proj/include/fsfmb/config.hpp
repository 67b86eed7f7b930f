#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fsfmb/debias.hpp"
#include "fsfmb/evaluation.hpp"
#include "fsfmb/factor_terms.hpp"
#include "fsfmb/io.hpp"
#include "fsfmb/selection.hpp"

namespace fsfmb {

using Json = nlohmann::ordered_json;

struct DataConfig {
  std::optional<PanelFile> returns;
  std::optional<PanelFile> factors;
  std::optional<PanelFile> zoo;
  std::optional<PanelFile> macro;
  std::optional<PanelFile> regimes;  // 0/1 columns, one per regime
};

struct NamedModel {
  std::string name;
  std::vector<std::string> factors;
};

/// Everything a run needs. Mirrors the TOML layout section by section.
struct RunConfig {
  DataConfig data;

  // [model]
  std::vector<std::string> base_factors;  // empty: every column of the factor file
  std::vector<std::string> tradable;      // restricted fit in `estimate` when non-empty
  ExpansionMode expansion;
  bool include_other_factors = false;     // non-base factor columns join the candidate pool
  bool with_intercept = true;
  Objective objective = Objective::AdjR2;
  ScanMethod scan = ScanMethod::Refit;
  HacSpec hac = HacSpec::rule();

  // [stop]
  StopRule stop = StopRule::min_gain(0.01, Objective::AdjR2);

  // [run]
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::string output = "fsfmb-out";

  // [estimate]
  std::vector<std::string> estimate_factors;  // empty: the selected set

  // [debias]
  std::vector<std::string> debias_coordinates;  // empty: every column
  ResidualMethod residual = ResidualMethod::Auto;
  bool sdf_from_expanded_set = false;
  double confidence_z = 1.96;

  // [cv]
  std::size_t cv_folds = 5;

  // [oos]
  SplitSpec::Kind oos_split = SplitSpec::Kind::FirstHalf;
  std::size_t oos_reps = 1000;
  std::vector<NamedModel> oos_models;  // empty: base and selected

  // [zoo]
  double critical_value = 1.96;

  // [simulate]
  std::size_t sim_candidates = 57;
  std::size_t sim_count = 1000;
  std::string sim_sigma_reference;  // empty: first base factor
  double sim_epsilon = 0.01;
  std::size_t sim_budget_cap = 7;
  std::size_t sim_append_count = 7;
  double sim_reference_r2 = 0.59;

  // [macro]
  double macro_tail = 0.10;
  std::vector<std::string> macro_factors;  // empty: the selected higher-order terms
};

/// Parses TOML text. Relative data paths resolve against `base_dir`.
/// Throws Config on unknown keys, wrong types or invalid values.
RunConfig parse_config(const std::string& toml_text, const std::filesystem::path& base_dir = {});
/// Throws Io when the file cannot be read.
RunConfig load_config(const std::filesystem::path& path);

/// Checks cross-field constraints and that `command` has the inputs it needs.
void validate(const RunConfig& config, const std::string& command);

Json config_to_json(const RunConfig& config);

std::string to_string(ScanMethod scan);
std::string to_string(ResidualMethod method);
std::string to_string(SplitSpec::Kind kind);

}  // namespace fsfmb
