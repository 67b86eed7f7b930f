#include "fsfmb/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "fsfmb/error.hpp"

namespace fsfmb {

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::Config, what); }

void check_keys(const toml::table& table, const std::string& section, std::set<std::string> allowed) {
  for (const auto& [key, _] : table) {
    if (!allowed.count(std::string(key.str()))) bad("unknown key '" + std::string(key.str()) + "' in [" + section + "]");
  }
}

const toml::table* sub_table(const toml::table& root, const std::string& name) {
  const auto* node = root.get(name);
  if (!node) return nullptr;
  if (!node->is_table()) bad("'" + name + "' must be a table");
  return node->as_table();
}

template <typename T>
std::optional<T> get(const toml::table& t, const std::string& section, const std::string& key) {
  const auto* node = t.get(key);
  if (!node) return std::nullopt;
  if constexpr (std::is_same_v<T, double>) {
    if (auto v = node->value<double>()) return *v;
  } else if constexpr (std::is_same_v<T, bool>) {
    if (node->is_boolean()) return node->as_boolean()->get();
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (node->is_string()) return node->as_string()->get();
  } else {
    if (node->is_integer()) {
      const auto v = node->as_integer()->get();
      if (v < 0) bad("[" + section + "] " + key + " must be non-negative");
      return static_cast<T>(v);
    }
  }
  bad("[" + section + "] " + key + " has the wrong type");
}

std::vector<std::string> get_strings(const toml::table& t, const std::string& section, const std::string& key) {
  std::vector<std::string> out;
  const auto* node = t.get(key);
  if (!node) return out;
  const auto* arr = node->as_array();
  if (!arr) bad("[" + section + "] " + key + " must be an array of strings");
  for (const auto& item : *arr) {
    if (!item.is_string()) bad("[" + section + "] " + key + " must be an array of strings");
    out.push_back(item.as_string()->get());
  }
  return out;
}

std::string resolve(const std::filesystem::path& base, const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_relative() && !base.empty()) p = base / p;
  return p.lexically_normal().string();
}

std::optional<PanelFile> parse_file(const toml::table& data, const std::string& key, PanelKind kind,
                                    const std::string& default_date, bool default_percent,
                                    const std::filesystem::path& base) {
  const auto* node = data.get(key);
  if (!node) return std::nullopt;
  PanelFile file;
  file.kind = kind;
  file.date_column = default_date;
  file.percent_scale = default_percent;
  if (node->is_string()) {
    file.path = resolve(base, node->as_string()->get());
    return file;
  }
  if (!node->is_table()) bad("[data] " + key + " must be a path or a table");
  const auto& t = *node->as_table();
  const std::string section = "data." + key;
  check_keys(t, section, {"path", "date_column", "columns", "percent_scale"});
  auto path = get<std::string>(t, section, "path");
  if (!path) bad("[" + section + "] needs a path");
  file.path = resolve(base, *path);
  if (auto v = get<std::string>(t, section, "date_column")) file.date_column = *v;
  if (auto v = get<bool>(t, section, "percent_scale")) file.percent_scale = *v;
  file.value_columns = get_strings(t, section, "columns");
  return file;
}

ExpansionMode parse_mode(const std::string& kind, int degree) {
  ExpansionMode mode;
  try {
    mode.kind = parse_expansion_kind(kind);
  } catch (const Error& e) {
    bad(e.what());
  }
  mode.max_degree = degree;
  return mode;
}

SplitSpec::Kind parse_split(const std::string& text) {
  if (text == "first_half") return SplitSpec::Kind::FirstHalf;
  if (text == "random") return SplitSpec::Kind::Random;
  bad("unknown split '" + text + "' (first_half, random)");
}

ResidualMethod parse_residual(const std::string& text) {
  if (text == "auto") return ResidualMethod::Auto;
  if (text == "ols") return ResidualMethod::Ols;
  if (text == "lasso") return ResidualMethod::Lasso;
  bad("unknown residual method '" + text + "' (auto, ols, lasso)");
}

ScanMethod parse_scan(const std::string& text) {
  if (text == "refit") return ScanMethod::Refit;
  if (text == "incremental") return ScanMethod::Incremental;
  bad("unknown scan '" + text + "' (refit, incremental)");
}

Objective objective_from(const std::string& text) {
  try {
    return parse_objective(text);
  } catch (const Error& e) {
    bad(e.what());
  }
}

Json panel_json(const std::optional<PanelFile>& f) {
  if (!f) return nullptr;
  Json j;
  j["path"] = f->path;
  j["date_column"] = f->date_column;
  j["columns"] = f->value_columns;
  j["percent_scale"] = f->percent_scale;
  return j;
}

}  // namespace

std::string to_string(ScanMethod scan) { return scan == ScanMethod::Refit ? "refit" : "incremental"; }

std::string to_string(ResidualMethod method) {
  switch (method) {
    case ResidualMethod::Auto: return "auto";
    case ResidualMethod::Ols: return "ols";
    case ResidualMethod::Lasso: return "lasso";
  }
  return "auto";
}

std::string to_string(SplitSpec::Kind kind) { return kind == SplitSpec::Kind::FirstHalf ? "first_half" : "random"; }

RunConfig parse_config(const std::string& toml_text, const std::filesystem::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "TOML syntax error at line " << e.source().begin.line << ": " << e.description();
    bad(msg.str());
  }
  check_keys(root, "root", {"data", "model", "stop", "hac", "run", "estimate", "debias", "cv", "oos", "zoo", "simulate", "macro"});

  RunConfig c;
  if (const auto* t = sub_table(root, "data")) {
    check_keys(*t, "data", {"returns", "factors", "zoo", "macro", "regimes", "date_column", "percent_scale"});
    const std::string date = get<std::string>(*t, "data", "date_column").value_or("date");
    const bool pct = get<bool>(*t, "data", "percent_scale").value_or(false);
    c.data.returns = parse_file(*t, "returns", PanelKind::Returns, date, pct, base_dir);
    c.data.factors = parse_file(*t, "factors", PanelKind::Factors, date, pct, base_dir);
    c.data.zoo = parse_file(*t, "zoo", PanelKind::Zoo, date, pct, base_dir);
    c.data.macro = parse_file(*t, "macro", PanelKind::Macro, date, false, base_dir);
    c.data.regimes = parse_file(*t, "regimes", PanelKind::RegimeMask, date, false, base_dir);
  }
  if (const auto* t = sub_table(root, "model")) {
    check_keys(*t, "model", {"base_factors", "tradable", "mode", "degree", "include_other_factors", "intercept",
                             "objective", "scan"});
    c.base_factors = get_strings(*t, "model", "base_factors");
    c.tradable = get_strings(*t, "model", "tradable");
    const int degree = static_cast<int>(get<std::size_t>(*t, "model", "degree").value_or(3));
    c.expansion = parse_mode(get<std::string>(*t, "model", "mode").value_or("full"), degree);
    c.include_other_factors = get<bool>(*t, "model", "include_other_factors").value_or(false);
    c.with_intercept = get<bool>(*t, "model", "intercept").value_or(true);
    if (auto v = get<std::string>(*t, "model", "objective")) c.objective = objective_from(*v);
    if (auto v = get<std::string>(*t, "model", "scan")) c.scan = parse_scan(*v);
  }
  if (const auto* t = sub_table(root, "stop")) {
    check_keys(*t, "stop", {"rule", "epsilon", "on", "count", "max_steps"});
    const std::string rule = get<std::string>(*t, "stop", "rule").value_or("min_gain");
    if (rule == "min_gain") {
      const Objective on = objective_from(get<std::string>(*t, "stop", "on").value_or("adj_r2"));
      c.stop = StopRule::min_gain(get<double>(*t, "stop", "epsilon").value_or(0.01), on,
                                  get<std::size_t>(*t, "stop", "max_steps"));
    } else if (rule == "fixed_count") {
      auto count = get<std::size_t>(*t, "stop", "count");
      if (!count) bad("[stop] fixed_count needs count");
      c.stop = StopRule::fixed_count(*count);
    } else {
      bad("unknown stop rule '" + rule + "' (min_gain, fixed_count)");
    }
  }
  if (const auto* t = sub_table(root, "hac")) {
    check_keys(*t, "hac", {"lag"});
    if (const auto* node = t->get("lag")) {
      if (node->is_string() && node->as_string()->get() == "auto") {
        c.hac = HacSpec::rule();
      } else if (auto v = get<std::size_t>(*t, "hac", "lag")) {
        c.hac = HacSpec::fixed(*v);
      }
    }
  }
  if (const auto* t = sub_table(root, "run")) {
    check_keys(*t, "run", {"seed", "threads", "output"});
    c.seed = get<std::uint64_t>(*t, "run", "seed").value_or(0);
    c.threads = get<std::size_t>(*t, "run", "threads").value_or(1);
    if (auto v = get<std::string>(*t, "run", "output")) c.output = resolve(base_dir, *v);
  }
  if (const auto* t = sub_table(root, "estimate")) {
    check_keys(*t, "estimate", {"factors"});
    c.estimate_factors = get_strings(*t, "estimate", "factors");
  }
  if (const auto* t = sub_table(root, "debias")) {
    check_keys(*t, "debias", {"coordinates", "residual", "sdf_from_expanded_set", "confidence_z"});
    c.debias_coordinates = get_strings(*t, "debias", "coordinates");
    if (auto v = get<std::string>(*t, "debias", "residual")) c.residual = parse_residual(*v);
    c.sdf_from_expanded_set = get<bool>(*t, "debias", "sdf_from_expanded_set").value_or(false);
    c.confidence_z = get<double>(*t, "debias", "confidence_z").value_or(1.96);
  }
  if (const auto* t = sub_table(root, "cv")) {
    check_keys(*t, "cv", {"folds"});
    c.cv_folds = get<std::size_t>(*t, "cv", "folds").value_or(5);
  }
  if (const auto* t = sub_table(root, "oos")) {
    check_keys(*t, "oos", {"split", "reps", "models"});
    if (auto v = get<std::string>(*t, "oos", "split")) c.oos_split = parse_split(*v);
    c.oos_reps = get<std::size_t>(*t, "oos", "reps").value_or(1000);
    if (const auto* node = t->get("models")) {
      const auto* arr = node->as_array();
      if (!arr) bad("[oos] models must be an array of tables");
      for (const auto& item : *arr) {
        if (!item.is_table()) bad("[oos] models must be an array of tables");
        const auto& mt = *item.as_table();
        check_keys(mt, "oos.models", {"name", "factors"});
        NamedModel m;
        m.name = get<std::string>(mt, "oos.models", "name").value_or("");
        if (m.name.empty()) bad("[oos.models] entries need a name");
        m.factors = get_strings(mt, "oos.models", "factors");
        c.oos_models.push_back(std::move(m));
      }
    }
  }
  if (const auto* t = sub_table(root, "zoo")) {
    check_keys(*t, "zoo", {"critical_value"});
    c.critical_value = get<double>(*t, "zoo", "critical_value").value_or(1.96);
  }
  if (const auto* t = sub_table(root, "simulate")) {
    check_keys(*t, "simulate", {"n_candidates", "n_sims", "sigma_reference", "epsilon", "budget_cap", "append_count",
                                "reference_r2"});
    c.sim_candidates = get<std::size_t>(*t, "simulate", "n_candidates").value_or(57);
    c.sim_count = get<std::size_t>(*t, "simulate", "n_sims").value_or(1000);
    c.sim_sigma_reference = get<std::string>(*t, "simulate", "sigma_reference").value_or("");
    c.sim_epsilon = get<double>(*t, "simulate", "epsilon").value_or(0.01);
    c.sim_budget_cap = get<std::size_t>(*t, "simulate", "budget_cap").value_or(7);
    c.sim_append_count = get<std::size_t>(*t, "simulate", "append_count").value_or(7);
    c.sim_reference_r2 = get<double>(*t, "simulate", "reference_r2").value_or(0.59);
  }
  if (const auto* t = sub_table(root, "macro")) {
    check_keys(*t, "macro", {"tail", "factors"});
    c.macro_tail = get<double>(*t, "macro", "tail").value_or(0.10);
    c.macro_factors = get_strings(*t, "macro", "factors");
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open config file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.parent_path());
}

void validate(const RunConfig& c, const std::string& command) {
  if (c.expansion.max_degree < 2 || c.expansion.max_degree > 4) bad("degree must be 2, 3 or 4");
  if (c.threads == 0) bad("threads must be at least 1");
  if (c.stop.kind == StopRule::Kind::MinGain && !(c.stop.epsilon >= 0.0)) bad("stop epsilon must be non-negative");
  if (c.stop.kind == StopRule::Kind::FixedCount && c.stop.count == 0) bad("stop count must be positive");
  if (!(c.macro_tail > 0.0 && c.macro_tail < 0.5)) bad("macro tail must lie in (0, 0.5)");
  if (!(c.critical_value > 0.0)) bad("critical value must be positive");
  if (!(c.confidence_z > 0.0)) bad("confidence z must be positive");
  if (c.cv_folds < 2) bad("cv folds must be at least 2");
  if (c.oos_reps == 0) bad("oos reps must be positive");
  if (c.sim_append_count > c.sim_candidates) bad("simulate append_count exceeds n_candidates");

  if (command == "expand") return;
  if (!c.data.factors) bad("command '" + command + "' needs [data] factors");
  if (command != "macro" || c.macro_factors.empty()) {
    if (!c.data.returns) bad("command '" + command + "' needs [data] returns");
  }
  if (command == "zoo" && !c.data.zoo) bad("command 'zoo' needs [data] zoo");
  if (command == "macro" && !c.data.macro) bad("command 'macro' needs [data] macro");
}

Json config_to_json(const RunConfig& c) {
  Json j;
  j["data"] = {{"returns", panel_json(c.data.returns)},
               {"factors", panel_json(c.data.factors)},
               {"zoo", panel_json(c.data.zoo)},
               {"macro", panel_json(c.data.macro)},
               {"regimes", panel_json(c.data.regimes)}};
  j["model"] = {{"base_factors", c.base_factors},
                {"tradable", c.tradable},
                {"mode", to_string(c.expansion.kind)},
                {"degree", c.expansion.max_degree},
                {"include_other_factors", c.include_other_factors},
                {"intercept", c.with_intercept},
                {"objective", to_string(c.objective)},
                {"scan", to_string(c.scan)}};
  Json stop;
  if (c.stop.kind == StopRule::Kind::FixedCount) {
    stop = {{"rule", "fixed_count"}, {"count", c.stop.count}};
  } else {
    stop = {{"rule", "min_gain"}, {"epsilon", c.stop.epsilon}, {"on", to_string(c.stop.on)}};
    stop["max_steps"] = c.stop.max_steps ? Json(*c.stop.max_steps) : Json(nullptr);
  }
  j["stop"] = stop;
  j["hac"] = {{"lag", c.hac.automatic ? Json("auto") : Json(c.hac.lag)}};
  j["run"] = {{"seed", c.seed}, {"threads", c.threads}, {"output", c.output}};
  j["estimate"] = {{"factors", c.estimate_factors}};
  j["debias"] = {{"coordinates", c.debias_coordinates},
                 {"residual", to_string(c.residual)},
                 {"sdf_from_expanded_set", c.sdf_from_expanded_set},
                 {"confidence_z", c.confidence_z}};
  j["cv"] = {{"folds", c.cv_folds}};
  Json models = Json::array();
  for (const auto& m : c.oos_models) models.push_back({{"name", m.name}, {"factors", m.factors}});
  j["oos"] = {{"split", to_string(c.oos_split)}, {"reps", c.oos_reps}, {"models", models}};
  j["zoo"] = {{"critical_value", c.critical_value}};
  j["simulate"] = {{"n_candidates", c.sim_candidates}, {"n_sims", c.sim_count},
                   {"sigma_reference", c.sim_sigma_reference}, {"epsilon", c.sim_epsilon},
                   {"budget_cap", c.sim_budget_cap}, {"append_count", c.sim_append_count},
                   {"reference_r2", c.sim_reference_r2}};
  j["macro"] = {{"tail", c.macro_tail}, {"factors", c.macro_factors}};
  return j;
}

}  // namespace fsfmb
