#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fsfmb/fmb.hpp"
#include "fsfmb/panel.hpp"
#include "fsfmb/regression.hpp"
#include "fsfmb/selection.hpp"

namespace fsfmb {

/// Derives an independent stream seed for replication `index`.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index);

// ---------------------------------------------------------------------------
// Cross-validation over assets

struct CvStep {
  std::size_t index = 0;
  double in_sample_adj_r2 = 0.0;
  double cv_adj_r2 = 0.0;
};

struct CvReport {
  IndexSet base_set;
  double base_in_sample_adj_r2 = 0.0;
  double base_cv_adj_r2 = 0.0;
  std::vector<CvStep> steps;
  std::vector<std::vector<std::size_t>> folds;
  std::uint64_t seed = 0;

  IndexSet final_set() const;
};

/// Random partition of [0, n) into k folds of equal size (+/-1). Pure
/// function of (seed, n, k).
std::vector<std::vector<std::size_t>> assign_folds(std::size_t n, std::size_t k, std::uint64_t seed);

/// Mean held-out adjusted R^2 of the covariance regression on S: risk prices
/// (with intercept) from the training folds, predictions from the held-out
/// fold's own covariances.
double cv_adj_r2(const VectorXd& avg_returns, const MatrixXd& covariances, const IndexSet& S,
                 const std::vector<std::vector<std::size_t>>& folds);

/// Forward selection where each step maximizes the cross-validated
/// adjusted R^2; stops on `stop` applied to the CV score.
CvReport asset_kfold_cv(const ReturnsPanel& returns, const FactorPanel& factors, const IndexSet& base_set,
                        const IndexSet& candidates, std::size_t k_folds, const StopRule& stop, std::uint64_t seed,
                        std::size_t threads = 1);

// ---------------------------------------------------------------------------
// Out-of-sample over time

struct SplitSpec {
  enum class Kind { FirstHalf, Random };
  Kind kind = Kind::FirstHalf;
  std::uint64_t seed = 0;
  std::size_t reps = 1000;
};

struct OosModel {
  std::string name;
  IndexSet factors;
};

struct OosEntry {
  std::string name;
  double r2_train = 0.0;
  double r2_oos = 0.0;
};

struct OosReport {
  SplitSpec split;
  bool recentered = true;
  std::vector<OosEntry> models;
};

/// Train/test evaluation of a single split (rows given explicitly).
OosEntry evaluate_split(const ReturnsPanel& returns, const FactorPanel& factors, const OosModel& model,
                        const std::vector<std::size_t>& train_rows, const std::vector<std::size_t>& test_rows,
                        bool recenter, bool with_intercept = true);

OosReport time_split_oos(const ReturnsPanel& returns, const FactorPanel& factors, const std::vector<OosModel>& models,
                         const SplitSpec& split, bool recenter = true, bool with_intercept = true,
                         std::size_t threads = 1);

// ---------------------------------------------------------------------------
// Restricted second pass

struct RestrictedFitReport {
  VectorXd tradable_premia;     // factor sample means
  VectorXd nontradable_premia;  // free cross-sectional slopes
  double alpha = 0.0;
  double alpha_t = 0.0;
  double r2 = 0.0;
  double adj_r2 = 0.0;
  std::size_t n_assets = 0;
};

/// Risk prices of tradable factors fixed at their sample means; intercept and
/// nontradable prices estimated on the remaining average returns. Fit is
/// measured against the total cross-sectional variation of average returns.
RestrictedFitReport restricted_fit(const ReturnsPanel& returns, const FactorPanel& factors, const IndexSet& tradable,
                                   const IndexSet& nontradable, const HacSpec& hac);

// ---------------------------------------------------------------------------
// Factor zoo

struct ControlSet {
  std::string name;
  FactorPanel factors;  // may have zero columns
};

struct ZooEntry {
  std::string name;
  double lambda = 0.0;  // SDF loading of the zoo factor
  double t_lambda = 0.0;
  double alpha = 0.0;
  double t_alpha = 0.0;
  bool collinear = false;
};

struct ZooControlSummary {
  std::string control_set;
  std::vector<ZooEntry> entries;
  double median_abs_t_lambda = 0.0;
  double median_abs_t_alpha = 0.0;
  double frac_significant_lambda = 0.0;
  double frac_significant_alpha = 0.0;
  std::size_t n_significant_lambda = 0;
};

struct ZooCullReport {
  double critical_value = 1.96;
  std::vector<ZooControlSummary> control_sets;
};

ZooCullReport zoo_cull_cross_sectional(const ReturnsPanel& returns, const std::vector<ControlSet>& controls,
                                       const FactorPanel& zoo, const HacSpec& hac, double critical_value = 1.96);

struct MimickingPortfolio {
  VectorXd fitted;
  LinearFit fit;
  double adj_r2 = 0.0;
};

/// Time-series projection (with intercept) of `target` on `basis`. `fitted`
/// is the slope part basis * b, i.e. the return of a portfolio of the basis.
MimickingPortfolio mimicking_portfolio(const VectorXd& target, const FactorPanel& basis);

struct SpanningEntry {
  std::string name;
  double alpha = 0.0;
  double t_alpha = 0.0;
  double annualized_abs_alpha_pp = 0.0;
  VectorXd loadings;
  VectorXd loading_t;
  bool collinear = false;
};

struct SpanningReport {
  std::vector<std::string> control_names;
  std::vector<SpanningEntry> entries;
  double median_abs_t_alpha = 0.0;
  double median_abs_alpha_pp = 0.0;
  VectorXd loading_significance;  // per control: fraction of zoo factors with |t| above the critical value
};

/// Time-series regression of each zoo factor on the controls; alpha is
/// annualized as 12 * monthly alpha * 100 percentage points.
SpanningReport spanning_regressions(const FactorPanel& zoo, const FactorPanel& controls, const HacSpec& hac,
                                    double critical_value = 1.96);

// ---------------------------------------------------------------------------
// Macro diagnostics

struct RegimeMask {
  std::string name;
  std::vector<bool> mask;
};

struct CorrelationRow {
  std::string factor;
  std::string macro;
  std::string regime;
  double correlation = 0.0;
  std::size_t n = 0;
};

struct ExposureRow {
  std::string factor;
  double alpha = 0.0;
  double alpha_t = 0.0;
  VectorXd coefficients;
  VectorXd t_stats;
  double adj_r2 = 0.0;
};

struct MacroReport {
  std::vector<std::string> macro_names;
  std::vector<CorrelationRow> correlations;
  std::vector<ExposureRow> exposures;
};

/// Bottom / middle / top masks of x by rank; they partition [0, T).
std::array<std::vector<bool>, 3> quantile_masks(const VectorXd& x, double tail = 0.10);

double pearson(const VectorXd& a, const VectorXd& b);

/// Correlations per regime (full sample, each supplied mask, and the
/// bottom/middle/top tails of each factor's own distribution) plus a
/// multivariate exposure regression of each factor on all macro series.
/// Throws EmptyRegime when a regime has fewer than two observations.
MacroReport macro_diagnostics(const FactorPanel& factors, const FactorPanel& macro,
                              const std::vector<RegimeMask>& regimes, const HacSpec& hac, double tail = 0.10);

// ---------------------------------------------------------------------------
// Random-factor null distribution

struct SimulationConfig {
  std::size_t n_candidates = 57;
  std::size_t n_sims = 1000;
  std::size_t sigma_reference = 0;  // column of the base panel whose sample s.d. scales the draws
  double epsilon = 0.01;            // min gain in adjusted R^2
  std::size_t budget_cap = 7;
  std::size_t append_count = 7;
  double reference_r2 = 0.59;
  std::uint64_t seed = 0;
  bool with_intercept = true;
  ScanMethod scan = ScanMethod::Refit;
  std::size_t threads = 1;
};

struct SimulationMode {
  std::string name;
  std::vector<double> adj_r2;
  std::vector<std::size_t> n_selected;
  double max_adj_r2 = 0.0;
  double exceedance = 0.0;  // fraction of draws above the reference
};

struct SimulationReport {
  double base_adj_r2 = 0.0;
  double sigma = 0.0;
  double reference_r2 = 0.0;
  std::uint64_t seed = 0;
  std::size_t n_sims = 0;
  SimulationMode unconstrained;  // greedy until the gain is at most epsilon
  SimulationMode capped;         // same, at most budget_cap additions
  SimulationMode appended;       // first append_count draws added without selection
};

SimulationReport random_factor_simulation(const ReturnsPanel& returns, const FactorPanel& base_factors,
                                          const SimulationConfig& config);

}  // namespace fsfmb
