#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fsfmb/config.hpp"
#include "fsfmb/error.hpp"
#include "fsfmb/pipeline.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::optional<std::string> output;
  std::optional<double> stop_eps;
  std::optional<std::size_t> stop_count;
  std::optional<int> degree;
  std::optional<std::string> mode;
  std::optional<std::size_t> hac_lag;
  bool hac_auto = false;
  std::optional<std::string> objective;
  std::optional<bool> intercept;
  std::optional<std::string> base;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "TOML run configuration");
  cmd->add_option("--seed", o.seed, "Random seed");
  cmd->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--output", o.output, "Output directory");
  cmd->add_option("--stop-eps", o.stop_eps, "Stop when the gain is at most this value");
  cmd->add_option("--stop-count", o.stop_count, "Select exactly this many factors");
  cmd->add_option("--degree", o.degree, "Maximum term degree (2, 3 or 4)");
  cmd->add_option("--mode", o.mode, "Expansion mode: full, powers, interactions");
  auto* lag = cmd->add_option("--hac-lag", o.hac_lag, "Newey-West lag");
  auto* automatic = cmd->add_flag("--hac-auto", o.hac_auto, "Newey-West lag floor(4(T/100)^(2/9))");
  lag->excludes(automatic);
  cmd->add_option("--objective", o.objective, "Selection objective: r2 or adj_r2");
  cmd->add_option("--intercept", o.intercept, "Cross-sectional intercept (true/false)");
}

fsfmb::RunConfig build_config(const Overrides& o) {
  fsfmb::RunConfig c = o.config.empty() ? fsfmb::RunConfig{} : fsfmb::load_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.threads) c.threads = *o.threads;
  if (o.output) c.output = *o.output;
  if (o.stop_eps && o.stop_count) throw fsfmb::Error(fsfmb::ErrorCode::Config, "--stop-eps and --stop-count conflict");
  if (o.stop_eps) c.stop = fsfmb::StopRule::min_gain(*o.stop_eps, c.stop.kind == fsfmb::StopRule::Kind::MinGain ? c.stop.on : fsfmb::Objective::AdjR2);
  if (o.stop_count) c.stop = fsfmb::StopRule::fixed_count(*o.stop_count);
  if (o.degree) c.expansion.max_degree = *o.degree;
  if (o.mode) {
    try {
      c.expansion.kind = fsfmb::parse_expansion_kind(*o.mode);
    } catch (const fsfmb::Error& e) {
      throw fsfmb::Error(fsfmb::ErrorCode::Config, e.what());
    }
  }
  if (o.hac_lag) c.hac = fsfmb::HacSpec::fixed(*o.hac_lag);
  if (o.hac_auto) c.hac = fsfmb::HacSpec::rule();
  if (o.objective) c.objective = fsfmb::parse_objective(*o.objective);
  if (o.intercept) c.with_intercept = *o.intercept;
  return c;
}

std::vector<std::string> base_names(const std::string& spec) {
  const bool numeric = !spec.empty() && spec.find_first_not_of("0123456789") == std::string::npos;
  if (numeric) return fsfmb::generic_base_names(std::stoul(spec));
  std::vector<std::string> names;
  std::string item;
  for (char ch : spec + ",") {
    if (ch == ',') {
      if (!item.empty()) names.push_back(item);
      item.clear();
    } else {
      item += ch;
    }
  }
  return names;
}

int run(const std::string& command, const Overrides& o) {
  const fsfmb::RunConfig config = build_config(o);
  fsfmb::StageResult stage;
  bool write = command != "expand" || o.output || !o.config.empty();
  if (command == "expand" && o.base) {
    fsfmb::validate(config, "expand");
    stage = fsfmb::run_expand(base_names(*o.base), config.expansion);
  } else {
    stage = fsfmb::run_stage(command, config);
  }
  for (const auto& w : stage.warnings) std::cerr << "warning: " << w << "\n";
  for (const auto& line : stage.lines) std::cout << line << "\n";
  if (write) {
    for (const auto& path : fsfmb::write_artifacts(stage, config, config.output)) {
      std::cerr << "wrote " << path.string() << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Forward-selection Fama-MacBeth estimation of high-dimensional SDF models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", fsfmb::version());

  Overrides o;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"expand", "List higher-order candidate terms"},
      {"select", "Forward selection on the cross-sectional fit"},
      {"estimate", "SDF loadings, risk premia and t-statistics"},
      {"debias", "Debiased loadings with standard errors"},
      {"cv", "Selection scored by k-fold cross-validation over assets"},
      {"oos", "Out-of-sample fit on split time periods"},
      {"zoo", "Factor zoo culling and spanning regressions"},
      {"simulate", "Random-factor null distribution of the selection gain"},
      {"macro", "Correlations and exposures against macro series"}};
  for (const auto& [name, help] : commands) {
    auto* cmd = app.add_subcommand(name, help);
    add_common(cmd, o);
    if (name == "expand") cmd->add_option("--base", o.base, "Number of base factors, or comma-separated names");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, o);
  } catch (const fsfmb::Error& e) {
    std::cerr << "fsfmb " << command << ": " << e.what() << "\n";
    return fsfmb::is_io_error(e.code()) ? 2 : 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "fsfmb " << command << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "fsfmb " << command << ": " << e.what() << "\n";
    return 1;
  }
}
