#include "fsfmb/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <openssl/evp.h>

#include "fsfmb/error.hpp"

#ifndef FSFMB_VERSION
#define FSFMB_VERSION "0.0.0"
#endif

namespace fsfmb {

namespace {

Json opt(const std::optional<double>& v) { return v ? num(*v) : Json(nullptr); }
std::optional<double> opt_from(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return num_from(j);
}

Json indices(const IndexSet& s) { return Json(s); }
IndexSet indices_from(const Json& j) { return j.get<IndexSet>(); }

Json sets_json(const DebiasSets& s) {
  return {{"selected", indices(s.selected)}, {"auxiliary", indices(s.auxiliary)}, {"combined", indices(s.combined)}};
}

Json mode_json(const SimulationMode& m) {
  Json values = Json::array();
  for (double v : m.adj_r2) values.push_back(num(v));
  return {{"name", m.name},
          {"adj_r2", values},
          {"n_selected", m.n_selected},
          {"max_adj_r2", num(m.max_adj_r2)},
          {"exceedance", num(m.exceedance)}};
}

SimulationMode mode_from(const Json& j) {
  SimulationMode m;
  m.name = j.at("name").get<std::string>();
  for (const auto& v : j.at("adj_r2")) m.adj_r2.push_back(num_from(v));
  m.n_selected = j.at("n_selected").get<std::vector<std::size_t>>();
  m.max_adj_r2 = num_from(j.at("max_adj_r2"));
  m.exceedance = num_from(j.at("exceedance"));
  return m;
}

}  // namespace

std::string version() { return FSFMB_VERSION; }

Json num(double v) {
  if (std::isnan(v)) return "NaN";
  if (std::isinf(v)) return v > 0 ? "Infinity" : "-Infinity";
  return v;
}

double num_from(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s == "NaN") return std::numeric_limits<double>::quiet_NaN();
    if (s == "Infinity") return std::numeric_limits<double>::infinity();
    if (s == "-Infinity") return -std::numeric_limits<double>::infinity();
  }
  throw Error(ErrorCode::ParseError, "expected a number, got " + j.dump());
}

Json vec(const VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(num(v(i)));
  return out;
}

VectorXd vec_from(const Json& j) {
  VectorXd out(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) out(static_cast<Eigen::Index>(i)) = num_from(j[i]);
  return out;
}

// --- selection ---------------------------------------------------------------

Json to_json(const SelectionResult& r) {
  Json steps = Json::array();
  for (const auto& s : r.steps) {
    steps.push_back({{"index", s.index}, {"r2", num(s.r2)}, {"adj_r2", num(s.adj_r2)}, {"alpha", opt(s.alpha)},
                     {"alpha_t", opt(s.alpha_t)}});
  }
  return {{"base_set", indices(r.base_set)},
          {"base_r2", num(r.base_r2)},
          {"base_adj_r2", num(r.base_adj_r2)},
          {"steps", steps},
          {"final_set", indices(r.final_set)}};
}

template <>
SelectionResult from_json<SelectionResult>(const Json& j) {
  SelectionResult r;
  r.base_set = indices_from(j.at("base_set"));
  r.base_r2 = num_from(j.at("base_r2"));
  r.base_adj_r2 = num_from(j.at("base_adj_r2"));
  for (const auto& s : j.at("steps")) {
    r.steps.push_back(SelectionStep{s.at("index").get<std::size_t>(), num_from(s.at("r2")), num_from(s.at("adj_r2")),
                                    opt_from(s.at("alpha")), opt_from(s.at("alpha_t"))});
  }
  r.final_set = indices_from(j.at("final_set"));
  return r;
}

Json to_json(const EstimateSummary& r) {
  return {{"factors", r.factors},   {"indices", indices(r.indices)},
          {"psi", vec(r.psi)},      {"psi_t", vec(r.psi_t)},
          {"gamma", vec(r.gamma)},  {"alpha", opt(r.alpha)},
          {"alpha_t", opt(r.alpha_t)}, {"r2", num(r.r2)},
          {"adj_r2", num(r.adj_r2)}, {"equivalence_gap", num(r.equivalence_gap)},
          {"gram_singular", r.gram_singular}, {"collinear", r.collinear}};
}

template <>
EstimateSummary from_json<EstimateSummary>(const Json& j) {
  EstimateSummary r;
  r.factors = j.at("factors").get<std::vector<std::string>>();
  r.indices = indices_from(j.at("indices"));
  r.psi = vec_from(j.at("psi"));
  r.psi_t = vec_from(j.at("psi_t"));
  r.gamma = vec_from(j.at("gamma"));
  r.alpha = opt_from(j.at("alpha"));
  r.alpha_t = opt_from(j.at("alpha_t"));
  r.r2 = num_from(j.at("r2"));
  r.adj_r2 = num_from(j.at("adj_r2"));
  r.equivalence_gap = num_from(j.at("equivalence_gap"));
  r.gram_singular = j.at("gram_singular").get<bool>();
  r.collinear = j.at("collinear").get<bool>();
  return r;
}

// --- debias ------------------------------------------------------------------

Json to_json(const DebiasedLoading& r) {
  return {{"j", r.j},
          {"psi_d", num(r.psi_d)},
          {"sigma_psi", num(r.sigma_psi)},
          {"t_stat", num(r.t_stat)},
          {"periods", r.periods},
          {"sets", sets_json(r.sets)}};
}

template <>
DebiasedLoading from_json<DebiasedLoading>(const Json& j) {
  DebiasedLoading r;
  r.j = j.at("j").get<std::size_t>();
  r.psi_d = num_from(j.at("psi_d"));
  r.sigma_psi = num_from(j.at("sigma_psi"));
  r.t_stat = num_from(j.at("t_stat"));
  r.periods = j.at("periods").get<std::size_t>();
  const auto& s = j.at("sets");
  r.sets.selected = indices_from(s.at("selected"));
  r.sets.auxiliary = indices_from(s.at("auxiliary"));
  r.sets.combined = indices_from(s.at("combined"));
  return r;
}

Json to_json(const DebiasRun& r) {
  Json loadings = Json::array();
  for (const auto& l : r.loadings) loadings.push_back(to_json(l));
  return {{"loadings", loadings}, {"skipped", indices(r.skipped)}};
}

template <>
DebiasRun from_json<DebiasRun>(const Json& j) {
  DebiasRun r;
  for (const auto& l : j.at("loadings")) r.loadings.push_back(from_json<DebiasedLoading>(l));
  r.skipped = indices_from(j.at("skipped"));
  return r;
}

// --- evaluation --------------------------------------------------------------

Json to_json(const CvReport& r) {
  Json steps = Json::array();
  for (const auto& s : r.steps) {
    steps.push_back({{"index", s.index}, {"in_sample_adj_r2", num(s.in_sample_adj_r2)}, {"cv_adj_r2", num(s.cv_adj_r2)}});
  }
  return {{"seed", r.seed},
          {"base_set", indices(r.base_set)},
          {"base_in_sample_adj_r2", num(r.base_in_sample_adj_r2)},
          {"base_cv_adj_r2", num(r.base_cv_adj_r2)},
          {"steps", steps},
          {"folds", r.folds}};
}

template <>
CvReport from_json<CvReport>(const Json& j) {
  CvReport r;
  r.seed = j.at("seed").get<std::uint64_t>();
  r.base_set = indices_from(j.at("base_set"));
  r.base_in_sample_adj_r2 = num_from(j.at("base_in_sample_adj_r2"));
  r.base_cv_adj_r2 = num_from(j.at("base_cv_adj_r2"));
  for (const auto& s : j.at("steps")) {
    r.steps.push_back(CvStep{s.at("index").get<std::size_t>(), num_from(s.at("in_sample_adj_r2")),
                             num_from(s.at("cv_adj_r2"))});
  }
  r.folds = j.at("folds").get<std::vector<std::vector<std::size_t>>>();
  return r;
}

Json to_json(const OosReport& r) {
  Json models = Json::array();
  for (const auto& m : r.models) {
    models.push_back({{"name", m.name}, {"r2_train", num(m.r2_train)}, {"r2_oos", num(m.r2_oos)}});
  }
  return {{"split", r.split.kind == SplitSpec::Kind::FirstHalf ? "first_half" : "random"},
          {"seed", r.split.seed},
          {"reps", r.split.reps},
          {"recentered", r.recentered},
          {"models", models}};
}

template <>
OosReport from_json<OosReport>(const Json& j) {
  OosReport r;
  r.split.kind = j.at("split").get<std::string>() == "random" ? SplitSpec::Kind::Random : SplitSpec::Kind::FirstHalf;
  r.split.seed = j.at("seed").get<std::uint64_t>();
  r.split.reps = j.at("reps").get<std::size_t>();
  r.recentered = j.at("recentered").get<bool>();
  for (const auto& m : j.at("models")) {
    r.models.push_back(OosEntry{m.at("name").get<std::string>(), num_from(m.at("r2_train")), num_from(m.at("r2_oos"))});
  }
  return r;
}

Json to_json(const RestrictedFitReport& r) {
  return {{"tradable_premia", vec(r.tradable_premia)},
          {"nontradable_premia", vec(r.nontradable_premia)},
          {"alpha", num(r.alpha)},
          {"alpha_t", num(r.alpha_t)},
          {"r2", num(r.r2)},
          {"adj_r2", num(r.adj_r2)},
          {"n_assets", r.n_assets}};
}

template <>
RestrictedFitReport from_json<RestrictedFitReport>(const Json& j) {
  RestrictedFitReport r;
  r.tradable_premia = vec_from(j.at("tradable_premia"));
  r.nontradable_premia = vec_from(j.at("nontradable_premia"));
  r.alpha = num_from(j.at("alpha"));
  r.alpha_t = num_from(j.at("alpha_t"));
  r.r2 = num_from(j.at("r2"));
  r.adj_r2 = num_from(j.at("adj_r2"));
  r.n_assets = j.at("n_assets").get<std::size_t>();
  return r;
}

Json to_json(const ZooCullReport& r) {
  Json sets = Json::array();
  for (const auto& c : r.control_sets) {
    Json entries = Json::array();
    for (const auto& e : c.entries) {
      entries.push_back({{"name", e.name}, {"lambda", num(e.lambda)}, {"t_lambda", num(e.t_lambda)},
                         {"alpha", num(e.alpha)}, {"t_alpha", num(e.t_alpha)}, {"collinear", e.collinear}});
    }
    sets.push_back({{"control_set", c.control_set},
                    {"median_abs_t_lambda", num(c.median_abs_t_lambda)},
                    {"median_abs_t_alpha", num(c.median_abs_t_alpha)},
                    {"frac_significant_lambda", num(c.frac_significant_lambda)},
                    {"frac_significant_alpha", num(c.frac_significant_alpha)},
                    {"n_significant_lambda", c.n_significant_lambda},
                    {"entries", entries}});
  }
  return {{"critical_value", num(r.critical_value)}, {"control_sets", sets}};
}

template <>
ZooCullReport from_json<ZooCullReport>(const Json& j) {
  ZooCullReport r;
  r.critical_value = num_from(j.at("critical_value"));
  for (const auto& c : j.at("control_sets")) {
    ZooControlSummary s;
    s.control_set = c.at("control_set").get<std::string>();
    s.median_abs_t_lambda = num_from(c.at("median_abs_t_lambda"));
    s.median_abs_t_alpha = num_from(c.at("median_abs_t_alpha"));
    s.frac_significant_lambda = num_from(c.at("frac_significant_lambda"));
    s.frac_significant_alpha = num_from(c.at("frac_significant_alpha"));
    s.n_significant_lambda = c.at("n_significant_lambda").get<std::size_t>();
    for (const auto& e : c.at("entries")) {
      s.entries.push_back(ZooEntry{e.at("name").get<std::string>(), num_from(e.at("lambda")), num_from(e.at("t_lambda")),
                                   num_from(e.at("alpha")), num_from(e.at("t_alpha")), e.at("collinear").get<bool>()});
    }
    r.control_sets.push_back(std::move(s));
  }
  return r;
}

Json to_json(const SpanningReport& r) {
  Json entries = Json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"name", e.name}, {"alpha", num(e.alpha)}, {"t_alpha", num(e.t_alpha)},
                       {"annualized_abs_alpha_pp", num(e.annualized_abs_alpha_pp)}, {"loadings", vec(e.loadings)},
                       {"loading_t", vec(e.loading_t)}, {"collinear", e.collinear}});
  }
  return {{"control_names", r.control_names},
          {"median_abs_t_alpha", num(r.median_abs_t_alpha)},
          {"median_abs_alpha_pp", num(r.median_abs_alpha_pp)},
          {"loading_significance", vec(r.loading_significance)},
          {"entries", entries}};
}

template <>
SpanningReport from_json<SpanningReport>(const Json& j) {
  SpanningReport r;
  r.control_names = j.at("control_names").get<std::vector<std::string>>();
  r.median_abs_t_alpha = num_from(j.at("median_abs_t_alpha"));
  r.median_abs_alpha_pp = num_from(j.at("median_abs_alpha_pp"));
  r.loading_significance = vec_from(j.at("loading_significance"));
  for (const auto& e : j.at("entries")) {
    SpanningEntry s;
    s.name = e.at("name").get<std::string>();
    s.alpha = num_from(e.at("alpha"));
    s.t_alpha = num_from(e.at("t_alpha"));
    s.annualized_abs_alpha_pp = num_from(e.at("annualized_abs_alpha_pp"));
    s.loadings = vec_from(e.at("loadings"));
    s.loading_t = vec_from(e.at("loading_t"));
    s.collinear = e.at("collinear").get<bool>();
    r.entries.push_back(std::move(s));
  }
  return r;
}

Json to_json(const SimulationReport& r) {
  return {{"seed", r.seed},
          {"n_sims", r.n_sims},
          {"sigma", num(r.sigma)},
          {"reference_r2", num(r.reference_r2)},
          {"base_adj_r2", num(r.base_adj_r2)},
          {"unconstrained", mode_json(r.unconstrained)},
          {"capped", mode_json(r.capped)},
          {"appended", mode_json(r.appended)}};
}

template <>
SimulationReport from_json<SimulationReport>(const Json& j) {
  SimulationReport r;
  r.seed = j.at("seed").get<std::uint64_t>();
  r.n_sims = j.at("n_sims").get<std::size_t>();
  r.sigma = num_from(j.at("sigma"));
  r.reference_r2 = num_from(j.at("reference_r2"));
  r.base_adj_r2 = num_from(j.at("base_adj_r2"));
  r.unconstrained = mode_from(j.at("unconstrained"));
  r.capped = mode_from(j.at("capped"));
  r.appended = mode_from(j.at("appended"));
  return r;
}

Json to_json(const MacroReport& r) {
  Json corr = Json::array();
  for (const auto& c : r.correlations) {
    corr.push_back({{"factor", c.factor}, {"macro", c.macro}, {"regime", c.regime},
                    {"correlation", num(c.correlation)}, {"n", c.n}});
  }
  Json expo = Json::array();
  for (const auto& e : r.exposures) {
    expo.push_back({{"factor", e.factor}, {"alpha", num(e.alpha)}, {"alpha_t", num(e.alpha_t)},
                    {"coefficients", vec(e.coefficients)}, {"t_stats", vec(e.t_stats)}, {"adj_r2", num(e.adj_r2)}});
  }
  return {{"macro_names", r.macro_names}, {"correlations", corr}, {"exposures", expo}};
}

template <>
MacroReport from_json<MacroReport>(const Json& j) {
  MacroReport r;
  r.macro_names = j.at("macro_names").get<std::vector<std::string>>();
  for (const auto& c : j.at("correlations")) {
    r.correlations.push_back(CorrelationRow{c.at("factor").get<std::string>(), c.at("macro").get<std::string>(),
                                            c.at("regime").get<std::string>(), num_from(c.at("correlation")),
                                            c.at("n").get<std::size_t>()});
  }
  for (const auto& e : j.at("exposures")) {
    ExposureRow row;
    row.factor = e.at("factor").get<std::string>();
    row.alpha = num_from(e.at("alpha"));
    row.alpha_t = num_from(e.at("alpha_t"));
    row.coefficients = vec_from(e.at("coefficients"));
    row.t_stats = vec_from(e.at("t_stats"));
    row.adj_r2 = num_from(e.at("adj_r2"));
    r.exposures.push_back(std::move(row));
  }
  return r;
}

// --- text output -------------------------------------------------------------

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::string format_double(double v) {
  if (std::isnan(v)) return "NaN";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string Table::to_csv() const {
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
  };
  std::string out;
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t k = 0; k < row.size(); ++k) out += (k ? "," : "") + quote(row[k]);
    out += "\n";
  };
  emit(header);
  for (const auto& r : rows) emit(r);
  return out;
}

Table histogram(const std::vector<double>& values, double lo, double hi, double width, const std::string& group,
                const std::string& group_value) {
  const auto bins = static_cast<std::size_t>(std::ceil((hi - lo) / width - 1e-9));
  std::vector<std::size_t> counts(bins + 2, 0);
  for (double v : values) {
    if (std::isnan(v)) continue;
    if (v < lo) ++counts[0];
    else if (v >= hi) ++counts[bins + 1];
    else counts[1 + std::min(bins - 1, static_cast<std::size_t>((v - lo) / width))]++;
  }
  Table t;
  if (!group.empty()) t.header.push_back(group);
  t.header.insert(t.header.end(), {"bin_lo", "bin_hi", "count"});
  auto row = [&](const std::string& a, const std::string& b, std::size_t c) {
    std::vector<std::string> r;
    if (!group.empty()) r.push_back(group_value);
    r.insert(r.end(), {a, b, std::to_string(c)});
    t.rows.push_back(std::move(r));
  };
  row("-Inf", format_double(lo), counts[0]);
  for (std::size_t b = 0; b < bins; ++b) {
    row(format_double(lo + static_cast<double>(b) * width), format_double(lo + static_cast<double>(b + 1) * width),
        counts[b + 1]);
  }
  row(format_double(hi), "Inf", counts[bins + 1]);
  return t;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::Io, "SHA-256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return sha256_hex(buffer.str());
}

void write_text(const std::filesystem::path& path, const std::string& contents) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  out << contents;
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

}  // namespace fsfmb
