#include "fsfmb/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>

#include "fsfmb/error.hpp"
#include "fsfmb/parallel.hpp"

namespace fsfmb {

namespace {

MatrixXd gather_cols(const MatrixXd& m, const IndexSet& cols) {
  MatrixXd out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = m.col(static_cast<Eigen::Index>(cols[k]));
  return out;
}

MatrixXd gather_rows(const MatrixXd& m, const std::vector<std::size_t>& rows) {
  MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = m.row(static_cast<Eigen::Index>(rows[k]));
  return out;
}

VectorXd gather_entries(const VectorXd& v, const std::vector<std::size_t>& rows) {
  VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) out(static_cast<Eigen::Index>(k)) = v(static_cast<Eigen::Index>(rows[k]));
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<std::size_t> permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

double ranked(double v) { return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v; }

}  // namespace

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer over the combined key
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// ---------------------------------------------------------------------------

IndexSet CvReport::final_set() const {
  IndexSet out = base_set;
  for (const auto& s : steps) out.push_back(s.index);
  return out;
}

std::vector<std::vector<std::size_t>> assign_folds(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2 || n < 2 * k) {
    throw Error(ErrorCode::FoldTooSmall, std::to_string(n) + " assets cannot form " + std::to_string(k) + " folds");
  }
  const auto order = permutation(n, seed);
  std::vector<std::vector<std::size_t>> folds(k);
  for (std::size_t pos = 0; pos < n; ++pos) folds[pos % k].push_back(order[pos]);
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

double cv_adj_r2(const VectorXd& avg_returns, const MatrixXd& covariances, const IndexSet& S,
                 const std::vector<std::vector<std::size_t>>& folds) {
  const auto N = static_cast<std::size_t>(avg_returns.size());
  const MatrixXd C = gather_cols(covariances, S);
  double total = 0.0;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<bool> held(N, false);
    for (auto i : folds[f]) held[i] = true;
    std::vector<std::size_t> train;
    for (std::size_t i = 0; i < N; ++i) {
      if (!held[i]) train.push_back(i);
    }
    const auto& test = folds[f];
    if (test.size() <= S.size() + 1 || train.size() <= S.size() + 1) {
      throw Error(ErrorCode::FoldTooSmall, "fold of " + std::to_string(test.size()) + " assets cannot evaluate " +
                                               std::to_string(S.size()) + " regressors");
    }
    const LinearFit fit = ols(gather_rows(C, train), gather_entries(avg_returns, train), true);
    VectorXd pred = S.empty() ? VectorXd::Zero(static_cast<Eigen::Index>(test.size()))
                              : VectorXd(gather_rows(C, test) * fit.coefficients);
    pred.array() += *fit.intercept;
    const double r2 = prediction_r2(gather_entries(avg_returns, test), pred);
    total += adjusted_r2(r2, test.size(), S.size(), true);
  }
  return total / static_cast<double>(folds.size());
}

CvReport asset_kfold_cv(const ReturnsPanel& returns, const FactorPanel& factors, const IndexSet& base_set,
                        const IndexSet& candidates, std::size_t k_folds, const StopRule& stop, std::uint64_t seed,
                        std::size_t threads) {
  require_aligned(returns, factors);
  if (candidates.empty()) throw Error(ErrorCode::EmptyCandidates, "no candidate factors");
  const auto N = returns.assets();
  CvReport report;
  report.seed = seed;
  report.base_set = base_set;
  report.folds = assign_folds(N, k_folds, seed);

  const MatrixXd cov = sample_covariances(returns.values, factors.values);
  const VectorXd rbar = returns.average_returns();
  const std::size_t min_fold = report.folds.back().size();

  IndexSet current = base_set;
  IndexSet remaining;
  const double zero_cut = 1e-12 * std::sqrt(static_cast<double>(N));
  for (auto j : candidates) {
    if (std::find(base_set.begin(), base_set.end(), j) != base_set.end()) {
      throw Error(ErrorCode::DimensionMismatch, "candidate in base set");
    }
    if (cov.col(static_cast<Eigen::Index>(j)).norm() >= zero_cut) remaining.push_back(j);
  }

  report.base_in_sample_adj_r2 = ols(gather_cols(cov, current), rbar, true).adj_r2;
  double current_cv = cv_adj_r2(rbar, cov, current, report.folds);
  report.base_cv_adj_r2 = current_cv;

  std::vector<double> scores;
  while (!remaining.empty() && current.size() + 2 < min_fold) {
    const auto steps = report.steps.size();
    if (stop.kind == StopRule::Kind::FixedCount && steps >= stop.count) break;
    if (stop.kind == StopRule::Kind::MinGain && stop.max_steps && steps >= *stop.max_steps) break;

    scores.assign(remaining.size(), 0.0);
    parallel_for(remaining.size(), threads, [&](std::size_t c) {
      IndexSet trial = current;
      trial.push_back(remaining[c]);
      scores[c] = cv_adj_r2(rbar, cov, trial, report.folds);
    });
    std::size_t best = 0;
    for (std::size_t c = 1; c < remaining.size(); ++c) {
      const double a = ranked(scores[c]);
      const double b = ranked(scores[best]);
      if (a > b || (a == b && remaining[c] < remaining[best])) best = c;
    }
    if (stop.kind == StopRule::Kind::MinGain && !(scores[best] - current_cv > stop.epsilon)) break;

    current.push_back(remaining[best]);
    current_cv = scores[best];
    const double in_sample = ols(gather_cols(cov, current), rbar, true).adj_r2;
    report.steps.push_back(CvStep{remaining[best], in_sample, current_cv});
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return report;
}

// ---------------------------------------------------------------------------

OosEntry evaluate_split(const ReturnsPanel& returns, const FactorPanel& factors, const OosModel& model,
                        const std::vector<std::size_t>& train_rows, const std::vector<std::size_t>& test_rows,
                        bool recenter, bool with_intercept) {
  const ReturnsPanel r_train = select_rows(returns, train_rows);
  const ReturnsPanel r_test = select_rows(returns, test_rows);
  const FactorPanel f_train = factors.rows(train_rows);
  const FactorPanel f_test = factors.rows(test_rows);

  const SdfEstimate est = estimate_sdf_loadings(r_train, f_train, model.factors, with_intercept);
  OosEntry entry;
  entry.name = model.name;
  entry.r2_train = est.fit.r2;

  const VectorXd actual = r_test.average_returns();
  VectorXd pred = VectorXd::Zero(actual.size());
  if (!model.factors.empty()) {
    pred = sample_covariances(r_test, f_test, model.factors).values * est.psi_selected();
  }
  if (est.alpha) pred.array() += *est.alpha;
  if (recenter) pred.array() += actual.mean() - pred.mean();
  entry.r2_oos = prediction_r2(actual, pred);
  return entry;
}

OosReport time_split_oos(const ReturnsPanel& returns, const FactorPanel& factors, const std::vector<OosModel>& models,
                         const SplitSpec& split, bool recenter, bool with_intercept, std::size_t threads) {
  require_aligned(returns, factors);
  const auto T = returns.periods();
  std::size_t largest = 0;
  for (const auto& m : models) largest = std::max(largest, m.factors.size());
  const std::size_t half = T / 2;
  if (half < largest + 2 || T - half < largest + 2) {
    throw Error(ErrorCode::SplitTooShort, "halves of " + std::to_string(half) + " periods are too short for " +
                                              std::to_string(largest) + " factors");
  }

  OosReport report;
  report.split = split;
  report.recentered = recenter;

  if (split.kind == SplitSpec::Kind::FirstHalf) {
    std::vector<std::size_t> train(half), test(T - half);
    std::iota(train.begin(), train.end(), std::size_t{0});
    std::iota(test.begin(), test.end(), half);
    for (const auto& m : models) report.models.push_back(evaluate_split(returns, factors, m, train, test, recenter, with_intercept));
    return report;
  }

  if (split.reps == 0) throw Error(ErrorCode::SplitTooShort, "random split needs at least one replication");
  std::vector<std::vector<OosEntry>> per_rep(split.reps);
  parallel_for(split.reps, threads, [&](std::size_t rep) {
    auto order = permutation(T, stream_seed(split.seed, rep));
    std::vector<std::size_t> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(half));
    std::vector<std::size_t> test(order.begin() + static_cast<std::ptrdiff_t>(half), order.end());
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    for (const auto& m : models) per_rep[rep].push_back(evaluate_split(returns, factors, m, train, test, recenter, with_intercept));
  });
  for (std::size_t k = 0; k < models.size(); ++k) {
    OosEntry avg;
    avg.name = models[k].name;
    for (const auto& rep : per_rep) {
      avg.r2_train += rep[k].r2_train;
      avg.r2_oos += rep[k].r2_oos;
    }
    avg.r2_train /= static_cast<double>(split.reps);
    avg.r2_oos /= static_cast<double>(split.reps);
    report.models.push_back(avg);
  }
  return report;
}

// ---------------------------------------------------------------------------

RestrictedFitReport restricted_fit(const ReturnsPanel& returns, const FactorPanel& factors, const IndexSet& tradable,
                                   const IndexSet& nontradable, const HacSpec& hac) {
  require_aligned(returns, factors);
  IndexSet all = tradable;
  all.insert(all.end(), nontradable.begin(), nontradable.end());
  if (all.empty()) throw Error(ErrorCode::DimensionMismatch, "restricted fit needs at least one factor");

  const MatrixXd betas = time_series_betas(returns, factors, all);
  const VectorXd rbar = returns.average_returns();
  const auto nt = static_cast<Eigen::Index>(tradable.size());

  RestrictedFitReport out;
  out.n_assets = returns.assets();
  out.tradable_premia.resize(nt);
  for (Eigen::Index k = 0; k < nt; ++k) {
    out.tradable_premia(k) = factors.values.col(static_cast<Eigen::Index>(tradable[static_cast<std::size_t>(k)])).mean();
  }
  const VectorXd y = rbar - betas.leftCols(nt) * out.tradable_premia;
  const MatrixXd X = betas.rightCols(betas.cols() - nt);
  const LinearFit fit = ols(X, y, true);
  const HacTStats ts = hac_tstats(fit, X, y, hac);

  out.nontradable_premia = fit.coefficients;
  out.alpha = *fit.intercept;
  out.alpha_t = ts.t(0);
  const double sst = (rbar.array() - rbar.mean()).square().sum();
  out.r2 = sst > 0.0 ? 1.0 - fit.residuals.squaredNorm() / sst : 0.0;
  out.adj_r2 = adjusted_r2(out.r2, out.n_assets, nontradable.size(), true);
  return out;
}

// ---------------------------------------------------------------------------

ZooCullReport zoo_cull_cross_sectional(const ReturnsPanel& returns, const std::vector<ControlSet>& controls,
                                       const FactorPanel& zoo, const HacSpec& hac, double critical_value) {
  require_aligned(returns, zoo);
  const VectorXd rbar = returns.average_returns();
  const MatrixXd zoo_cov = sample_covariances(returns.values, zoo.values);

  ZooCullReport report;
  report.critical_value = critical_value;
  for (const auto& control : controls) {
    ZooControlSummary summary;
    summary.control_set = control.name;
    const auto k = control.factors.values.cols();
    MatrixXd design(static_cast<Eigen::Index>(returns.assets()), k + 1);
    if (k > 0) {
      require_aligned(returns, control.factors);
      design.leftCols(k) = sample_covariances(returns.values, control.factors.values);
    }
    std::vector<double> abs_t_lambda, abs_t_alpha;
    std::size_t sig_lambda = 0, sig_alpha = 0;
    for (std::size_t g = 0; g < zoo.size(); ++g) {
      design.col(k) = zoo_cov.col(static_cast<Eigen::Index>(g));
      const CrossSectionalFit cs = cross_sectional_fit(rbar, design, true, hac);
      ZooEntry e;
      e.name = zoo.names[g];
      e.lambda = cs.fit.coefficients(k);
      e.alpha = *cs.fit.intercept;
      e.collinear = cs.collinear || cs.fit.rank_deficient();
      e.t_lambda = e.collinear ? std::numeric_limits<double>::quiet_NaN() : cs.tstats.slope_t(static_cast<std::size_t>(k), true);
      e.t_alpha = e.collinear ? std::numeric_limits<double>::quiet_NaN() : *cs.alpha_t;
      if (!e.collinear) {
        abs_t_lambda.push_back(std::abs(e.t_lambda));
        abs_t_alpha.push_back(std::abs(e.t_alpha));
        if (std::abs(e.t_lambda) > critical_value) ++sig_lambda;
        if (std::abs(e.t_alpha) > critical_value) ++sig_alpha;
      }
      summary.entries.push_back(e);
    }
    const double valid = static_cast<double>(abs_t_lambda.size());
    summary.median_abs_t_lambda = median(abs_t_lambda);
    summary.median_abs_t_alpha = median(abs_t_alpha);
    summary.n_significant_lambda = sig_lambda;
    summary.frac_significant_lambda = valid > 0 ? static_cast<double>(sig_lambda) / valid : 0.0;
    summary.frac_significant_alpha = valid > 0 ? static_cast<double>(sig_alpha) / valid : 0.0;
    report.control_sets.push_back(std::move(summary));
  }
  return report;
}

MimickingPortfolio mimicking_portfolio(const VectorXd& target, const FactorPanel& basis) {
  if (basis.values.rows() != target.size()) throw Error(ErrorCode::Misalignment, "target and basis differ in length");
  if (basis.values.cols() + 1 >= target.size()) {
    throw Error(ErrorCode::BudgetExceedsRank, "basis has too many columns for the sample length");
  }
  MimickingPortfolio out;
  out.fit = ols(basis.values, target, true);
  // Tradable part only: the projection constant is not a portfolio return.
  out.fitted = basis.values * out.fit.coefficients;
  out.adj_r2 = out.fit.adj_r2;
  return out;
}

SpanningReport spanning_regressions(const FactorPanel& zoo, const FactorPanel& controls, const HacSpec& hac,
                                    double critical_value) {
  if (zoo.values.rows() != controls.values.rows()) throw Error(ErrorCode::Misalignment, "zoo and controls differ");
  SpanningReport report;
  report.control_names = controls.names;
  const auto k = controls.values.cols();
  VectorXd sig_counts = VectorXd::Zero(k);
  std::vector<double> abs_t, abs_alpha;
  for (std::size_t g = 0; g < zoo.size(); ++g) {
    const VectorXd y = zoo.values.col(static_cast<Eigen::Index>(g));
    const LinearFit fit = ols(controls.values, y, true);
    SpanningEntry e;
    e.name = zoo.names[g];
    e.alpha = *fit.intercept;
    e.annualized_abs_alpha_pp = std::abs(e.alpha) * 12.0 * 100.0;
    e.loadings = fit.coefficients;
    try {
      const HacTStats ts = hac_tstats(fit, controls.values, y, hac);
      e.t_alpha = ts.t(0);
      e.loading_t = ts.t.tail(k);
    } catch (const Error& err) {
      if (err.code() != ErrorCode::SingularDesign) throw;
      e.collinear = true;
      e.t_alpha = std::numeric_limits<double>::quiet_NaN();
      e.loading_t = VectorXd::Constant(k, std::numeric_limits<double>::quiet_NaN());
    }
    if (!e.collinear) {
      abs_t.push_back(std::abs(e.t_alpha));
      abs_alpha.push_back(e.annualized_abs_alpha_pp);
      for (Eigen::Index c = 0; c < k; ++c) {
        if (std::abs(e.loading_t(c)) > critical_value) sig_counts(c) += 1.0;
      }
    }
    report.entries.push_back(std::move(e));
  }
  report.median_abs_t_alpha = median(abs_t);
  report.median_abs_alpha_pp = median(abs_alpha);
  report.loading_significance = abs_t.empty() ? VectorXd::Zero(k) : VectorXd(sig_counts / static_cast<double>(abs_t.size()));
  return report;
}

// ---------------------------------------------------------------------------

std::array<std::vector<bool>, 3> quantile_masks(const VectorXd& x, double tail) {
  const auto T = static_cast<std::size_t>(x.size());
  std::vector<std::size_t> order(T);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x(static_cast<Eigen::Index>(a)) < x(static_cast<Eigen::Index>(b));
  });
  std::size_t n_tail = static_cast<std::size_t>(std::llround(tail * static_cast<double>(T)));
  n_tail = std::min(n_tail, T / 2);
  std::array<std::vector<bool>, 3> masks{std::vector<bool>(T, false), std::vector<bool>(T, false),
                                         std::vector<bool>(T, false)};
  for (std::size_t r = 0; r < T; ++r) {
    const std::size_t bucket = r < n_tail ? 0 : (r >= T - n_tail ? 2 : 1);
    masks[bucket][order[r]] = true;
  }
  return masks;
}

double pearson(const VectorXd& a, const VectorXd& b) {
  const VectorXd da = a.array() - a.mean();
  const VectorXd db = b.array() - b.mean();
  const double denom = std::sqrt(da.squaredNorm() * db.squaredNorm());
  return denom > 0.0 ? da.dot(db) / denom : std::numeric_limits<double>::quiet_NaN();
}

MacroReport macro_diagnostics(const FactorPanel& factors, const FactorPanel& macro,
                              const std::vector<RegimeMask>& regimes, const HacSpec& hac, double tail) {
  const auto T = factors.periods();
  if (macro.periods() != T) throw Error(ErrorCode::Misalignment, "factors and macro series differ in length");
  for (const auto& r : regimes) {
    if (r.mask.size() != T) throw Error(ErrorCode::Misalignment, "regime '" + r.name + "' has the wrong length");
  }

  MacroReport report;
  report.macro_names = macro.names;

  auto masked_corr = [&](const VectorXd& f, const VectorXd& m, const std::vector<bool>& mask, const std::string& name) {
    std::vector<std::size_t> rows;
    for (std::size_t t = 0; t < T; ++t) {
      if (mask[t]) rows.push_back(t);
    }
    if (rows.size() < 2) throw Error(ErrorCode::EmptyRegime, "regime '" + name + "' has fewer than two periods");
    return std::make_pair(pearson(gather_entries(f, rows), gather_entries(m, rows)), rows.size());
  };

  const std::vector<bool> full(T, true);
  for (std::size_t j = 0; j < factors.size(); ++j) {
    const VectorXd f = factors.values.col(static_cast<Eigen::Index>(j));
    const auto tails = quantile_masks(f, tail);
    std::vector<RegimeMask> all{{"full", full}};
    all.insert(all.end(), regimes.begin(), regimes.end());
    all.push_back({"bottom", tails[0]});
    all.push_back({"middle", tails[1]});
    all.push_back({"top", tails[2]});
    for (std::size_t m = 0; m < macro.size(); ++m) {
      const VectorXd series = macro.values.col(static_cast<Eigen::Index>(m));
      for (const auto& regime : all) {
        const auto [corr, n] = masked_corr(f, series, regime.mask, regime.name);
        report.correlations.push_back(CorrelationRow{factors.names[j], macro.names[m], regime.name, corr, n});
      }
    }

    const LinearFit fit = ols(macro.values, f, true);
    const HacTStats ts = hac_tstats(fit, macro.values, f, hac);
    ExposureRow row;
    row.factor = factors.names[j];
    row.alpha = *fit.intercept;
    row.alpha_t = ts.t(0);
    row.coefficients = fit.coefficients;
    row.t_stats = ts.t.tail(macro.values.cols());
    row.adj_r2 = fit.adj_r2;
    report.exposures.push_back(std::move(row));
  }
  return report;
}

// ---------------------------------------------------------------------------

SimulationReport random_factor_simulation(const ReturnsPanel& returns, const FactorPanel& base_factors,
                                          const SimulationConfig& config) {
  require_aligned(returns, base_factors);
  if (config.sigma_reference >= base_factors.size()) {
    throw Error(ErrorCode::UnknownBaseFactor, "sigma reference column out of range");
  }
  if (config.append_count > config.n_candidates) {
    throw Error(ErrorCode::DimensionMismatch, "append_count exceeds the number of random candidates");
  }
  const auto T = returns.periods();
  const auto k = static_cast<Eigen::Index>(base_factors.size());
  const auto n_rand = static_cast<Eigen::Index>(config.n_candidates);

  const VectorXd ref = base_factors.values.col(static_cast<Eigen::Index>(config.sigma_reference));
  const double sigma = std::sqrt((ref.array() - ref.mean()).square().sum() / static_cast<double>(T - 1));

  const VectorXd rbar = returns.average_returns();
  MatrixXd columns(static_cast<Eigen::Index>(returns.assets()), k + n_rand);
  columns.leftCols(k) = sample_covariances(returns.values, base_factors.values);

  SimulationReport report;
  report.sigma = sigma;
  report.seed = config.seed;
  report.n_sims = config.n_sims;
  report.reference_r2 = config.reference_r2;
  report.base_adj_r2 = ols(columns.leftCols(k), rbar, config.with_intercept).adj_r2;

  IndexSet base = all_indices(static_cast<std::size_t>(k));
  IndexSet candidates;
  for (Eigen::Index j = 0; j < n_rand; ++j) candidates.push_back(static_cast<std::size_t>(k + j));
  const StopRule stop = StopRule::min_gain(config.epsilon, Objective::AdjR2);

  struct Draw {
    double unconstrained = 0.0, capped = 0.0, appended = 0.0;
    std::size_t n_unconstrained = 0, n_capped = 0;
  };
  std::vector<Draw> draws(config.n_sims);

  parallel_for(config.n_sims, config.threads, [&](std::size_t s) {
    std::mt19937_64 rng(stream_seed(config.seed, s));
    std::normal_distribution<double> normal(0.0, sigma);
    MatrixXd random(static_cast<Eigen::Index>(T), n_rand);
    for (Eigen::Index j = 0; j < n_rand; ++j) {
      for (Eigen::Index t = 0; t < static_cast<Eigen::Index>(T); ++t) random(t, j) = normal(rng);
    }
    MatrixXd cols = columns;
    cols.rightCols(n_rand) = sample_covariances(returns.values, random);

    const SelectionResult path =
        greedy_select(rbar, cols, base, candidates, stop, config.with_intercept, Objective::AdjR2, config.scan);
    Draw d;
    d.n_unconstrained = path.steps.size();
    d.unconstrained = path.steps.empty() ? path.base_adj_r2 : path.steps.back().adj_r2;
    // The capped run follows the same greedy path and stops early.
    d.n_capped = std::min(path.steps.size(), config.budget_cap);
    d.capped = d.n_capped == 0 ? path.base_adj_r2 : path.steps[d.n_capped - 1].adj_r2;
    const auto a = static_cast<Eigen::Index>(config.append_count);
    d.appended = ols(cols.leftCols(k + a), rbar, config.with_intercept).adj_r2;
    draws[s] = d;
  });

  auto finish = [&](SimulationMode& mode, const std::string& name, auto value, auto count) {
    mode.name = name;
    std::size_t above = 0;
    mode.max_adj_r2 = -std::numeric_limits<double>::infinity();
    for (const auto& d : draws) {
      mode.adj_r2.push_back(value(d));
      mode.n_selected.push_back(count(d));
      mode.max_adj_r2 = std::max(mode.max_adj_r2, value(d));
      if (value(d) > config.reference_r2) ++above;
    }
    mode.exceedance = draws.empty() ? 0.0 : static_cast<double>(above) / static_cast<double>(draws.size());
  };
  finish(report.unconstrained, "unconstrained", [](const Draw& d) { return d.unconstrained; },
         [](const Draw& d) { return d.n_unconstrained; });
  finish(report.capped, "capped", [](const Draw& d) { return d.capped; }, [](const Draw& d) { return d.n_capped; });
  finish(report.appended, "appended", [](const Draw& d) { return d.appended; },
         [&](const Draw&) { return config.append_count; });
  return report;
}

}  // namespace fsfmb
