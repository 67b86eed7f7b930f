#include "fsfmb/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <map>
#include <numeric>

#include "fsfmb/error.hpp"
#include "fsfmb/factor_terms.hpp"
#include "fsfmb/fmb.hpp"

namespace fsfmb {

namespace {

using Row = std::vector<std::string>;

std::string fmt(double v) { return format_double(v); }
std::string fmt(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

struct MainData {
  ReturnsPanel returns;
  FactorPanel factors;
  std::optional<FactorPanel> zoo;
  std::vector<std::string> warnings;
  std::vector<std::string> inputs;
};

MainData load_main(const RunConfig& config, bool with_zoo) {
  std::vector<RawPanel> raw{read_panel_csv(*config.data.returns), read_panel_csv(*config.data.factors)};
  if (with_zoo) raw.push_back(read_panel_csv(*config.data.zoo));
  MainData out;
  for (const auto& r : raw) out.inputs.push_back(r.path);
  JoinedPanels joined = inner_join(std::move(raw));
  out.warnings = joined.warnings;
  out.returns = to_returns_panel(joined.panels[0]);
  out.factors = to_factor_panel(joined.panels[1]);
  if (with_zoo) out.zoo = to_factor_panel(joined.panels[2]);
  if (out.returns.assets() == 0) throw Error(ErrorCode::EmptyIntersection, "no complete return series remain");
  return out;
}

IndexSet resolve_names(const FactorPanel& panel, const std::vector<std::string>& names) {
  IndexSet out;
  for (const auto& n : names) out.push_back(panel.require_index(n));
  return out;
}

std::vector<std::string> names_of(const FactorPanel& panel, const IndexSet& S) {
  std::vector<std::string> out;
  for (auto j : S) out.push_back(panel.names[j]);
  return out;
}

ObjectiveConfig objective_config(const RunConfig& c) {
  ObjectiveConfig oc;
  oc.objective = c.objective;
  oc.with_intercept = c.with_intercept;
  oc.hac = c.hac;
  oc.scan = c.scan;
  oc.threads = c.threads;
  return oc;
}

SelectionResult select_on(const ReturnsPanel& returns, const Universe& u, const RunConfig& c) {
  return fs_fmb(returns, u.panel, u.base, u.candidates, c.stop, objective_config(c));
}

Json selection_json(const SelectionResult& sel, const FactorPanel& panel) {
  Json j = to_json(sel);
  j["final_factors"] = names_of(panel, sel.final_set);
  j["added_factors"] = names_of(panel, sel.added());
  return j;
}

EstimateSummary summarize(const ReturnsPanel& returns, const FactorPanel& panel, const IndexSet& S,
                          const RunConfig& c) {
  const SdfEstimate est = estimate_sdf_loadings(returns, panel, S, c.with_intercept);
  EstimateSummary s;
  s.factors = names_of(panel, S);
  s.indices = S;
  s.psi = est.psi_selected();
  s.alpha = est.alpha;
  s.r2 = est.fit.r2;
  s.adj_r2 = est.fit.adj_r2;
  s.equivalence_gap = est.equivalence_gap;
  s.gram_singular = est.gram_singular;
  s.psi_t = VectorXd::Constant(static_cast<Eigen::Index>(S.size()), std::numeric_limits<double>::quiet_NaN());
  s.gamma = S.empty() ? VectorXd(VectorXd::Zero(0)) : VectorXd(factor_covariance(panel, S) * s.psi);
  const MatrixXd cov = S.empty() ? MatrixXd(MatrixXd::Zero(static_cast<Eigen::Index>(returns.assets()), 0))
                                 : sample_covariances(returns, panel, S).values;
  const CrossSectionalFit cs = cross_sectional_fit(returns.average_returns(), cov, c.with_intercept, c.hac);
  s.collinear = cs.collinear;
  for (std::size_t k = 0; k < S.size(); ++k) s.psi_t(static_cast<Eigen::Index>(k)) = cs.tstats.slope_t(k, c.with_intercept);
  s.alpha_t = cs.alpha_t;
  return s;
}

Table actual_vs_predicted(const ReturnsPanel& returns, const FactorPanel& panel, const EstimateSummary& s) {
  const VectorXd rbar = returns.average_returns();
  VectorXd pred = VectorXd::Constant(rbar.size(), s.alpha.value_or(0.0));
  if (!s.indices.empty()) pred += sample_covariances(returns, panel, s.indices).values * s.psi;
  Table t;
  t.header = {"asset", "actual", "predicted"};
  for (Eigen::Index i = 0; i < rbar.size(); ++i) {
    t.rows.push_back({returns.asset_ids[static_cast<std::size_t>(i)], fmt(rbar(i)), fmt(pred(i))});
  }
  return t;
}

void append(Table& into, const Table& more) {
  if (into.header.empty()) into.header = more.header;
  into.rows.insert(into.rows.end(), more.rows.begin(), more.rows.end());
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// --- stages ------------------------------------------------------------------

StageResult stage_select(const RunConfig& c) {
  MainData d = load_main(c, false);
  const Universe u = build_universe(d.factors, c);
  const SelectionResult sel = select_on(d.returns, u, c);
  const EstimateSummary est = summarize(d.returns, u.panel, sel.final_set, c);

  StageResult out;
  out.warnings = d.warnings;
  out.inputs = d.inputs;
  out.result = {{"periods", d.returns.periods()},
                {"assets", d.returns.assets()},
                {"universe", u.panel.names},
                {"base_set", u.base},
                {"candidates", u.candidates},
                {"selection", selection_json(sel, u.panel)},
                {"estimate", to_json(est)}};

  out.table.header = {"step", "factor", "r2", "adj_r2", "alpha", "t_alpha"};
  out.table.rows.push_back({"0", "base", fmt(sel.base_r2), fmt(sel.base_adj_r2), "", ""});
  out.lines.push_back("base adj R2 " + fmt(sel.base_adj_r2));
  for (std::size_t k = 0; k < sel.steps.size(); ++k) {
    const auto& s = sel.steps[k];
    out.table.rows.push_back({std::to_string(k + 1), u.panel.names[s.index], fmt(s.r2), fmt(s.adj_r2), fmt(s.alpha),
                              fmt(s.alpha_t)});
    out.lines.push_back(std::to_string(k + 1) + " " + u.panel.names[s.index] + " adj R2 " + fmt(s.adj_r2));
  }
  out.plot = actual_vs_predicted(d.returns, u.panel, est);
  return out;
}

StageResult stage_estimate(const RunConfig& c) {
  MainData d = load_main(c, false);
  const Universe u = build_universe(d.factors, c);
  StageResult out;
  out.warnings = d.warnings;
  out.inputs = d.inputs;

  IndexSet S;
  if (c.estimate_factors.empty()) {
    const SelectionResult sel = select_on(d.returns, u, c);
    S = sel.final_set;
    out.result["selection"] = selection_json(sel, u.panel);
  } else {
    S = resolve_names(u.panel, c.estimate_factors);
  }
  const EstimateSummary est = summarize(d.returns, u.panel, S, c);
  out.result["estimate"] = to_json(est);
  if (!c.tradable.empty()) {
    const IndexSet tradable = resolve_names(u.panel, c.tradable);
    IndexSet nontradable;
    for (auto j : S) {
      if (std::find(tradable.begin(), tradable.end(), j) == tradable.end()) nontradable.push_back(j);
    }
    const RestrictedFitReport restricted = restricted_fit(d.returns, u.panel, tradable, nontradable, c.hac);
    Json r = to_json(restricted);
    r["tradable"] = names_of(u.panel, tradable);
    r["nontradable"] = names_of(u.panel, nontradable);
    out.result["restricted"] = r;
    out.lines.push_back("restricted adj R2 " + fmt(restricted.adj_r2));
  }

  out.table.header = {"factor", "psi", "t_psi", "gamma"};
  for (std::size_t k = 0; k < S.size(); ++k) {
    const auto e = static_cast<Eigen::Index>(k);
    out.table.rows.push_back({est.factors[k], fmt(est.psi(e)), fmt(est.psi_t(e)), fmt(est.gamma(e))});
    out.lines.push_back(est.factors[k] + " psi " + fmt(est.psi(e)) + " t " + fmt(est.psi_t(e)));
  }
  out.lines.push_back("adj R2 " + fmt(est.adj_r2));
  out.plot = actual_vs_predicted(d.returns, u.panel, est);
  return out;
}

StageResult stage_debias(const RunConfig& c) {
  MainData d = load_main(c, false);
  const Universe u = build_universe(d.factors, c);
  const SelectionResult sel = select_on(d.returns, u, c);
  const IndexSet coords = c.debias_coordinates.empty() ? all_indices(u.panel.size())
                                                       : resolve_names(u.panel, c.debias_coordinates);
  DebiasOptions opts;
  opts.with_intercept = c.with_intercept;
  opts.hac = c.hac;
  opts.residual.method = c.residual;
  opts.sdf_from_expanded_set = c.sdf_from_expanded_set;
  const DebiasRun run = debias_all(d.returns, u.panel, sel, coords, c.stop, opts, c.threads);
  const SdfEstimate base = estimate_sdf_loadings(d.returns, u.panel, sel.final_set, c.with_intercept);

  StageResult out;
  out.warnings = d.warnings;
  out.inputs = d.inputs;
  Json rows = Json::array();
  out.table.header = {"factor", "selected", "psi_hat", "psi_d", "se", "t_stat", "ci_lo", "ci_hi", "n_auxiliary",
                      "n_combined"};
  std::vector<double> tstats;
  for (const auto& l : run.loadings) {
    const bool selected = std::find(sel.final_set.begin(), sel.final_set.end(), l.j) != sel.final_set.end();
    const auto [lo, hi] = l.confidence_interval(c.confidence_z);
    const double psi_hat = base.psi(static_cast<Eigen::Index>(l.j));
    rows.push_back({{"factor", u.panel.names[l.j]}, {"selected", selected}, {"psi_hat", num(psi_hat)},
                    {"psi_d", num(l.psi_d)}, {"se", num(l.standard_error())}, {"t_stat", num(l.t_stat)},
                    {"ci_lo", num(lo)}, {"ci_hi", num(hi)}});
    out.table.rows.push_back({u.panel.names[l.j], selected ? "1" : "0", fmt(psi_hat), fmt(l.psi_d),
                              fmt(l.standard_error()), fmt(l.t_stat), fmt(lo), fmt(hi),
                              std::to_string(l.sets.auxiliary.size()), std::to_string(l.sets.combined.size())});
    tstats.push_back(l.t_stat);
    if (std::abs(l.t_stat) > c.critical_value) out.lines.push_back(u.panel.names[l.j] + " t " + fmt(l.t_stat));
  }
  for (auto j : run.skipped) out.warnings.push_back("skipped '" + u.panel.names[j] + "': spanned by the other factors");
  out.lines.push_back(std::to_string(run.loadings.size()) + " coordinates debiased, " +
                      std::to_string(run.skipped.size()) + " skipped");
  out.result = {{"selection", selection_json(sel, u.panel)}, {"debias", to_json(run)}, {"rows", rows}};
  out.plot = histogram(tstats, -6.0, 6.0, 0.5);
  return out;
}

StageResult stage_cv(const RunConfig& c) {
  MainData d = load_main(c, false);
  const Universe u = build_universe(d.factors, c);
  const CvReport cv = asset_kfold_cv(d.returns, u.panel, u.base, u.candidates, c.cv_folds, c.stop, c.seed, c.threads);

  StageResult out;
  out.warnings = d.warnings;
  out.inputs = d.inputs;
  Json j = to_json(cv);
  j["final_factors"] = names_of(u.panel, cv.final_set());
  out.result = {{"cv", j}};
  out.table.header = {"step", "factor", "in_sample_adj_r2", "cv_adj_r2"};
  out.table.rows.push_back({"0", "base", fmt(cv.base_in_sample_adj_r2), fmt(cv.base_cv_adj_r2)});
  for (std::size_t k = 0; k < cv.steps.size(); ++k) {
    const auto& s = cv.steps[k];
    out.table.rows.push_back({std::to_string(k + 1), u.panel.names[s.index], fmt(s.in_sample_adj_r2), fmt(s.cv_adj_r2)});
    out.lines.push_back(std::to_string(k + 1) + " " + u.panel.names[s.index] + " cv adj R2 " + fmt(s.cv_adj_r2));
  }
  out.plot = out.table;
  return out;
}

StageResult stage_oos(const RunConfig& c) {
  MainData d = load_main(c, false);
  const Universe u = build_universe(d.factors, c);
  StageResult out;
  out.warnings = d.warnings;
  out.inputs = d.inputs;

  std::vector<OosModel> models;
  if (c.oos_models.empty()) {
    const SelectionResult sel = select_on(d.returns, u, c);
    out.result["selection"] = selection_json(sel, u.panel);
    models.push_back({"base", u.base});
    models.push_back({"selected", sel.final_set});
  } else {
    for (const auto& m : c.oos_models) models.push_back({m.name, resolve_names(u.panel, m.factors)});
  }
  SplitSpec split;
  split.kind = c.oos_split;
  split.seed = c.seed;
  split.reps = c.oos_reps;
  const OosReport centered = time_split_oos(d.returns, u.panel, models, split, true, c.with_intercept, c.threads);
  const OosReport raw = time_split_oos(d.returns, u.panel, models, split, false, c.with_intercept, c.threads);
  Json model_names = Json::array();
  for (const auto& m : models) model_names.push_back({{"name", m.name}, {"factors", names_of(u.panel, m.factors)}});
  out.result["models"] = model_names;
  out.result["recentered"] = to_json(centered);
  out.result["raw"] = to_json(raw);

  out.table.header = {"model", "n_factors", "r2_train", "r2_oos_recentered", "r2_oos_raw"};
  for (std::size_t k = 0; k < models.size(); ++k) {
    out.table.rows.push_back({models[k].name, std::to_string(models[k].factors.size()), fmt(centered.models[k].r2_train),
                              fmt(centered.models[k].r2_oos), fmt(raw.models[k].r2_oos)});
    out.lines.push_back(models[k].name + " oos R2 " + fmt(centered.models[k].r2_oos) + " (raw " +
                        fmt(raw.models[k].r2_oos) + ")");
  }

  // Held-out pairs on the chronological split, for plotting.
  const auto T = d.returns.periods();
  std::vector<std::size_t> train(T / 2), test(T - T / 2);
  std::iota(train.begin(), train.end(), std::size_t{0});
  std::iota(test.begin(), test.end(), T / 2);
  const ReturnsPanel r_test = select_rows(d.returns, test);
  const FactorPanel f_test = u.panel.rows(test);
  const VectorXd actual = r_test.average_returns();
  out.plot.header = {"model", "asset", "actual", "predicted"};
  for (const auto& m : models) {
    const SdfEstimate est = estimate_sdf_loadings(select_rows(d.returns, train), u.panel.rows(train), m.factors,
                                                  c.with_intercept);
    VectorXd pred = VectorXd::Constant(actual.size(), est.alpha.value_or(0.0));
    if (!m.factors.empty()) pred += sample_covariances(r_test, f_test, m.factors).values * est.psi_selected();
    pred.array() += actual.mean() - pred.mean();
    for (Eigen::Index i = 0; i < actual.size(); ++i) {
      out.plot.rows.push_back({m.name, d.returns.asset_ids[static_cast<std::size_t>(i)], fmt(actual(i)), fmt(pred(i))});
    }
  }
  return out;
}

StageResult stage_zoo(const RunConfig& c) {
  MainData d = load_main(c, true);
  const Universe u = build_universe(d.factors, c);
  const SelectionResult sel = select_on(d.returns, u, c);
  const FactorPanel& zoo = *d.zoo;
  if (zoo.size() == 0) throw Error(ErrorCode::EmptyIntersection, "zoo file has no complete columns");

  const FactorPanel base = u.panel.select(u.base);
  const FactorPanel selected = u.panel.select(sel.final_set);
  FactorPanel none = base.select({});
  const std::vector<ControlSet> controls{{"none", none}, {"base", base}, {"selected", selected}};
  const ZooCullReport cull = zoo_cull_cross_sectional(d.returns, controls, zoo, c.hac, c.critical_value);

  // Mimicking portfolios of the selected higher-order terms on the zoo.
  FactorPanel mimicking = none;
  Json mimic = Json::array();
  for (auto j : sel.added()) {
    const MimickingPortfolio mp = mimicking_portfolio(u.panel.values.col(static_cast<Eigen::Index>(j)), zoo);
    FactorPanel col = make_factor_panel(MatrixXd(mp.fitted), {u.panel.names[j] + "_mimicking"});
    col.dates = zoo.dates;
    mimicking = mimicking.concat(col);
    mimic.push_back({{"factor", u.panel.names[j]}, {"adj_r2", num(mp.adj_r2)}});
  }
  const SpanningReport span_none = spanning_regressions(zoo, none, c.hac, c.critical_value);
  const SpanningReport span_base = spanning_regressions(zoo, base, c.hac, c.critical_value);
  const SpanningReport span_mimic = spanning_regressions(zoo, base.concat(mimicking), c.hac, c.critical_value);

  StageResult out;
  out.warnings = d.warnings;
  out.inputs = d.inputs;
  out.result = {{"selection", selection_json(sel, u.panel)},
                {"cull", to_json(cull)},
                {"mimicking", mimic},
                {"spanning", {{"none", to_json(span_none)}, {"base", to_json(span_base)},
                              {"base_mimicking", to_json(span_mimic)}}}};

  out.table.header = {"control_set", "factor", "lambda", "t_lambda", "alpha", "t_alpha", "collinear"};
  for (const auto& cs : cull.control_sets) {
    for (const auto& e : cs.entries) {
      out.table.rows.push_back({cs.control_set, e.name, fmt(e.lambda), fmt(e.t_lambda), fmt(e.alpha), fmt(e.t_alpha),
                                e.collinear ? "1" : "0"});
    }
    out.lines.push_back(cs.control_set + ": median |t(lambda)| " + fmt(cs.median_abs_t_lambda) + ", significant " +
                        std::to_string(cs.n_significant_lambda) + "/" + std::to_string(cs.entries.size()));
  }
  const std::vector<std::pair<std::string, const SpanningReport*>> spans{
      {"none", &span_none}, {"base", &span_base}, {"base_mimicking", &span_mimic}};
  for (const auto& [name, rep] : spans) {
    std::vector<double> abs_t;
    for (const auto& e : rep->entries) abs_t.push_back(std::abs(e.t_alpha));
    append(out.plot, histogram(abs_t, 0.0, 8.0, 0.25, "controls", name));
    out.lines.push_back("spanning " + name + ": median |t(alpha)| " + fmt(rep->median_abs_t_alpha) +
                        ", median |alpha| " + fmt(rep->median_abs_alpha_pp) + "pp");
  }
  return out;
}

StageResult stage_simulate(const RunConfig& c) {
  MainData d = load_main(c, false);
  const Universe u = build_universe(d.factors, c);
  const FactorPanel base = u.panel.select(u.base);
  SimulationConfig sc;
  sc.n_candidates = c.sim_candidates;
  sc.n_sims = c.sim_count;
  sc.sigma_reference = c.sim_sigma_reference.empty() ? 0 : base.require_index(c.sim_sigma_reference);
  sc.epsilon = c.sim_epsilon;
  sc.budget_cap = c.sim_budget_cap;
  sc.append_count = c.sim_append_count;
  sc.reference_r2 = c.sim_reference_r2;
  sc.seed = c.seed;
  sc.with_intercept = c.with_intercept;
  sc.scan = c.scan;
  sc.threads = c.threads;
  const SimulationReport rep = random_factor_simulation(d.returns, base, sc);

  StageResult out;
  out.warnings = d.warnings;
  out.inputs = d.inputs;
  Json j = to_json(rep);
  j["sigma_reference"] = base.names[sc.sigma_reference];
  out.result = {{"simulation", j}};
  out.table.header = {"mode", "n_sims", "mean_adj_r2", "median_adj_r2", "max_adj_r2", "exceedance", "mean_n_selected"};
  out.plot.header = {"mode", "sim", "adj_r2", "n_selected"};
  for (const SimulationMode* m : {&rep.unconstrained, &rep.capped, &rep.appended}) {
    std::vector<double> v = m->adj_r2;
    const double mean = v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    std::sort(v.begin(), v.end());
    const double med = v.empty() ? 0.0 : (v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]));
    double sel = 0.0;
    for (auto n : m->n_selected) sel += static_cast<double>(n);
    if (!m->n_selected.empty()) sel /= static_cast<double>(m->n_selected.size());
    out.table.rows.push_back({m->name, std::to_string(m->adj_r2.size()), fmt(mean), fmt(med), fmt(m->max_adj_r2),
                              fmt(m->exceedance), fmt(sel)});
    for (std::size_t s = 0; s < m->adj_r2.size(); ++s) {
      out.plot.rows.push_back({m->name, std::to_string(s), fmt(m->adj_r2[s]), std::to_string(m->n_selected[s])});
    }
    out.lines.push_back(m->name + ": max adj R2 " + fmt(m->max_adj_r2) + ", exceedance " + fmt(m->exceedance));
  }
  return out;
}

StageResult stage_macro(const RunConfig& c) {
  StageResult out;
  std::vector<std::string> targets = c.macro_factors;
  if (targets.empty()) {
    MainData d = load_main(c, false);
    const Universe u = build_universe(d.factors, c);
    const SelectionResult sel = select_on(d.returns, u, c);
    out.result["selection"] = selection_json(sel, u.panel);
    targets = names_of(u.panel, sel.added());
    out.warnings = d.warnings;
    out.inputs = d.inputs;
  }

  std::vector<RawPanel> raw{read_panel_csv(*c.data.factors), read_panel_csv(*c.data.macro)};
  if (c.data.regimes) raw.push_back(read_panel_csv(*c.data.regimes));
  for (const auto& r : raw) {
    if (std::find(out.inputs.begin(), out.inputs.end(), r.path) == out.inputs.end()) out.inputs.push_back(r.path);
  }
  JoinedPanels joined = inner_join(std::move(raw));
  out.warnings.insert(out.warnings.end(), joined.warnings.begin(), joined.warnings.end());
  const Universe u = build_universe(to_factor_panel(joined.panels[0]), c);
  const FactorPanel factors = u.panel.select(resolve_names(u.panel, targets));
  const FactorPanel macro = to_factor_panel(joined.panels[1]);
  std::vector<RegimeMask> regimes;
  if (c.data.regimes) {
    const auto& r = joined.panels[2];
    for (Eigen::Index k = 0; k < r.values.cols(); ++k) {
      RegimeMask m{r.columns[static_cast<std::size_t>(k)], {}};
      for (Eigen::Index t = 0; t < r.values.rows(); ++t) m.mask.push_back(r.values(t, k) != 0.0);
      regimes.push_back(std::move(m));
    }
  }
  const MacroReport rep = macro_diagnostics(factors, macro, regimes, c.hac, c.macro_tail);

  out.result["window"] = {{"start", joined.dates.front().to_string()}, {"end", joined.dates.back().to_string()},
                          {"periods", joined.dates.size()}};
  out.result["macro"] = to_json(rep);
  out.table.header = {"factor", "macro", "regime", "correlation", "n"};
  for (const auto& r : rep.correlations) {
    out.table.rows.push_back({r.factor, r.macro, r.regime, fmt(r.correlation), std::to_string(r.n)});
  }
  out.plot.header = {"factor", "regressor", "coefficient", "t_stat"};
  for (const auto& e : rep.exposures) {
    out.plot.rows.push_back({e.factor, "intercept", fmt(e.alpha), fmt(e.alpha_t)});
    for (std::size_t k = 0; k < rep.macro_names.size(); ++k) {
      const auto i = static_cast<Eigen::Index>(k);
      out.plot.rows.push_back({e.factor, rep.macro_names[k], fmt(e.coefficients(i)), fmt(e.t_stats(i))});
    }
    out.lines.push_back(e.factor + " exposure adj R2 " + fmt(e.adj_r2));
  }
  out.lines.push_back("window " + joined.dates.front().to_string() + " to " + joined.dates.back().to_string());
  return out;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"expand", "select", "estimate", "debias", "cv",
                                              "oos",    "zoo",    "simulate", "macro"};
  return names;
}

std::vector<std::string> generic_base_names(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::string name;
    std::size_t k = i + 1;
    while (k > 0) {
      --k;
      name.insert(name.begin(), static_cast<char>('A' + k % 26));
      k /= 26;
    }
    out.push_back(name);
  }
  return out;
}

Universe build_universe(const FactorPanel& factor_file, const RunConfig& config) {
  const IndexSet base_cols = config.base_factors.empty() ? all_indices(factor_file.size())
                                                         : resolve_names(factor_file, config.base_factors);
  if (base_cols.empty()) throw Error(ErrorCode::UnknownBaseFactor, "no base factors");
  const FactorPanel base = factor_file.select(base_cols);
  const FactorPanel terms = materialize(base, expand_terms(base.names, config.expansion));
  Universe u;
  u.panel = base.concat(terms);
  if (config.include_other_factors) u.panel = u.panel.concat(factor_file.select(complement(base_cols, factor_file.size())));
  u.base = all_indices(base.size());
  for (std::size_t j = base.size(); j < u.panel.size(); ++j) u.candidates.push_back(j);
  return u;
}

StageResult run_expand(const std::vector<std::string>& base_names, const ExpansionMode& mode) {
  const auto terms = expand_terms(base_names, mode);
  StageResult out;
  out.command = "expand";
  std::map<int, std::size_t> by_degree;
  std::size_t powers = 0;
  Json list = Json::array();
  out.table.header = {"index", "label", "degree", "kind"};
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const auto& t = terms[k];
    const std::string kind = t.is_power() ? "power" : "interaction";
    ++by_degree[t.degree()];
    if (t.is_power()) ++powers;
    list.push_back({{"label", t.label()}, {"degree", t.degree()}, {"kind", kind}});
    out.table.rows.push_back({std::to_string(k + 1), t.label(), std::to_string(t.degree()), kind});
    out.lines.push_back(t.label());
  }
  Json degrees = Json::object();
  out.plot.header = {"degree", "count"};
  for (const auto& [deg, n] : by_degree) {
    degrees[std::to_string(deg)] = n;
    out.plot.rows.push_back({std::to_string(deg), std::to_string(n)});
  }
  out.result = {{"base", base_names},
                {"mode", to_string(mode.kind)},
                {"degree", mode.max_degree},
                {"terms", list},
                {"counts",
                 {{"base", base_names.size()},
                  {"terms", terms.size()},
                  {"powers", powers},
                  {"interactions", terms.size() - powers},
                  {"by_degree", degrees},
                  {"total_with_base", base_names.size() + terms.size()}}}};
  return out;
}

StageResult run_stage(const std::string& command, const RunConfig& config) {
  validate(config, command);
  StageResult out;
  if (command == "expand") {
    std::vector<std::string> names = config.base_factors;
    std::vector<std::string> inputs;
    if (names.empty()) {
      if (!config.data.factors) throw Error(ErrorCode::Config, "expand needs base factor names or a factor file");
      names = read_panel_csv(*config.data.factors).columns;
      inputs.push_back(config.data.factors->path);
    }
    out = run_expand(names, config.expansion);
    out.inputs = inputs;
  } else if (command == "select") {
    out = stage_select(config);
  } else if (command == "estimate") {
    out = stage_estimate(config);
  } else if (command == "debias") {
    out = stage_debias(config);
  } else if (command == "cv") {
    out = stage_cv(config);
  } else if (command == "oos") {
    out = stage_oos(config);
  } else if (command == "zoo") {
    out = stage_zoo(config);
  } else if (command == "simulate") {
    out = stage_simulate(config);
  } else if (command == "macro") {
    out = stage_macro(config);
  } else {
    throw Error(ErrorCode::Config, "unknown command '" + command + "'");
  }
  out.command = command;
  return out;
}

Json report_document(const StageResult& stage, const RunConfig& config) {
  return {{"command", stage.command},
          {"version", version()},
          {"config", config_to_json(config)},
          {"warnings", stage.warnings},
          {"result", stage.result}};
}

std::vector<std::filesystem::path> write_artifacts(const StageResult& stage, const RunConfig& config,
                                                   const std::filesystem::path& dir) {
  const std::vector<std::pair<std::string, std::string>> files{
      {stage.command + ".json", dump(report_document(stage, config))},
      {stage.command + ".csv", stage.table.to_csv()},
      {stage.command + "_plot.csv", stage.plot.to_csv()}};
  std::vector<std::filesystem::path> written;
  Json outputs = Json::array();
  for (const auto& [name, contents] : files) {
    write_text(dir / name, contents);
    written.push_back(dir / name);
    outputs.push_back({{"file", name}, {"sha256", sha256_hex(contents)}});
  }
  Json inputs = Json::array();
  for (const auto& path : stage.inputs) {
    inputs.push_back({{"path", path}, {"sha256", sha256_file(path)}, {"bytes", std::filesystem::file_size(path)}});
  }
  const Json manifest = {{"tool", "fsfmb"},
                         {"version", version()},
                         {"command", stage.command},
                         {"created_utc", utc_now()},
                         {"seed", config.seed},
                         {"threads", config.threads},
                         {"config", config_to_json(config)},
                         {"inputs", inputs},
                         {"outputs", outputs},
                         {"warnings", stage.warnings}};
  write_text(dir / "manifest.json", dump(manifest));
  written.push_back(dir / "manifest.json");
  return written;
}

}  // namespace fsfmb
