#include "fsfmb/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fsfmb/error.hpp"
#include "fsfmb/fmb.hpp"
#include "fsfmb/parallel.hpp"

namespace fsfmb {

namespace {

struct FitScore {
  double r2 = 0.0;
  double adj_r2 = 0.0;

  double get(Objective o) const { return o == Objective::R2 ? r2 : adj_r2; }
};

double ranked(double v) { return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v; }

MatrixXd gather(const MatrixXd& columns, const IndexSet& S) {
  MatrixXd out(columns.rows(), static_cast<Eigen::Index>(S.size()));
  for (std::size_t k = 0; k < S.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = columns.col(static_cast<Eigen::Index>(S[k]));
  return out;
}

FitScore refit_score(const VectorXd& target, const MatrixXd& columns, const IndexSet& S, bool with_intercept) {
  const LinearFit fit = ols(gather(columns, S), target, with_intercept);
  return {fit.r2, fit.adj_r2};
}

// Orthonormal basis of the current design plus the current residual. Adding
// a column costs one projection; a trial evaluation never mutates the state.
class IncrementalFit {
 public:
  IncrementalFit(const VectorXd& target, bool with_intercept)
      : with_intercept_(with_intercept), n_(static_cast<std::size_t>(target.size())) {
    basis_.resize(target.size(), 0);
    residual_ = target;
    sst_ = with_intercept ? (target.array() - target.mean()).square().sum() : target.squaredNorm();
    if (with_intercept) {
      add_direction(VectorXd::Ones(target.size()));
      count_ = 0;
    }
  }

  double ssr() const { return residual_.squaredNorm(); }

  FitScore score_for(double ssr, std::size_t k) const {
    const double r2 = sst_ > 0.0 ? 1.0 - ssr / sst_ : 0.0;
    return {r2, adjusted_r2(r2, n_, k, with_intercept_)};
  }
  FitScore current() const { return score_for(ssr(), count_); }

  FitScore trial(const VectorXd& column) const {
    const VectorXd r = orthogonalize(column);
    const double rr = r.squaredNorm();
    double ssr_new = ssr();
    if (rr > (1e-10 * column.norm()) * (1e-10 * column.norm()) && rr > 0.0) {
      const double proj = r.dot(residual_);
      ssr_new = std::max(0.0, ssr_new - proj * proj / rr);
    }
    return score_for(ssr_new, count_ + 1);
  }

  void add(const VectorXd& column) {
    add_direction(column);
    ++count_;
  }

 private:
  VectorXd orthogonalize(const VectorXd& column) const {
    VectorXd r = column;
    if (basis_.cols() == 0) return r;
    for (int pass = 0; pass < 2; ++pass) r -= basis_ * (basis_.transpose() * r);
    return r;
  }

  void add_direction(const VectorXd& column) {
    const VectorXd r = orthogonalize(column);
    const double norm = r.norm();
    if (!(norm > 1e-10 * column.norm()) || norm == 0.0) return;  // collinear: span unchanged
    const VectorXd q = r / norm;
    residual_ -= q * q.dot(residual_);
    basis_.conservativeResize(Eigen::NoChange, basis_.cols() + 1);
    basis_.col(basis_.cols() - 1) = q;
  }

  bool with_intercept_;
  std::size_t n_;
  std::size_t count_ = 0;
  double sst_ = 0.0;
  MatrixXd basis_;
  VectorXd residual_;
};

}  // namespace

std::string to_string(Objective objective) { return objective == Objective::R2 ? "r2" : "adj_r2"; }

Objective parse_objective(const std::string& text) {
  if (text == "r2") return Objective::R2;
  if (text == "adj_r2" || text == "adj-r2") return Objective::AdjR2;
  throw Error(ErrorCode::Config, "unknown objective '" + text + "'");
}

IndexSet SelectionResult::added() const {
  IndexSet out;
  for (const auto& s : steps) out.push_back(s.index);
  return out;
}

SelectionResult greedy_select(const VectorXd& target, const MatrixXd& columns, const IndexSet& base,
                              const IndexSet& candidates, const StopRule& stop, bool with_intercept,
                              Objective objective, ScanMethod scan, std::size_t threads) {
  const auto N = static_cast<std::size_t>(target.size());
  const auto p = static_cast<std::size_t>(columns.cols());
  if (static_cast<std::size_t>(columns.rows()) != N) throw Error(ErrorCode::DimensionMismatch, "target/columns rows");
  if (candidates.empty()) throw Error(ErrorCode::EmptyCandidates, "no candidate columns");

  std::vector<bool> in_base(p, false);
  for (auto j : base) {
    if (j >= p) throw Error(ErrorCode::DimensionMismatch, "base index out of range");
    in_base[j] = true;
  }
  for (auto j : candidates) {
    if (j >= p) throw Error(ErrorCode::DimensionMismatch, "candidate index out of range");
    if (in_base[j]) throw Error(ErrorCode::DimensionMismatch, "candidate " + std::to_string(j) + " is in the base set");
  }

  const std::size_t icpt = with_intercept ? 1 : 0;
  auto fits = [&](std::size_t k) { return k + icpt < N; };
  if (stop.kind == StopRule::Kind::FixedCount && !fits(base.size() + stop.count)) {
    throw Error(ErrorCode::BudgetExceedsRank, "base (" + std::to_string(base.size()) + ") + budget (" +
                                                  std::to_string(stop.count) + ") exceeds the " +
                                                  std::to_string(N) + " observations");
  }

  // Columns that are numerically zero cannot change the fit.
  const double zero_cut = 1e-12 * std::sqrt(static_cast<double>(N));
  IndexSet remaining;
  for (auto j : candidates) {
    if (columns.col(static_cast<Eigen::Index>(j)).norm() >= zero_cut) remaining.push_back(j);
  }

  SelectionResult result;
  result.base_set = base;
  IndexSet current = base;

  std::optional<IncrementalFit> inc;
  FitScore current_score;
  if (scan == ScanMethod::Incremental) {
    inc.emplace(target, with_intercept);
    for (auto j : base) inc->add(columns.col(static_cast<Eigen::Index>(j)));
    current_score = inc->current();
  } else {
    current_score = refit_score(target, columns, current, with_intercept);
  }
  result.base_r2 = current_score.r2;
  result.base_adj_r2 = current_score.adj_r2;

  std::vector<FitScore> scores;
  while (true) {
    const std::size_t steps = result.steps.size();
    if (stop.kind == StopRule::Kind::FixedCount && steps >= stop.count) break;
    if (stop.kind == StopRule::Kind::MinGain && stop.max_steps && steps >= *stop.max_steps) break;
    if (remaining.empty() || !fits(current.size() + 1)) break;

    scores.assign(remaining.size(), FitScore{});
    parallel_for(remaining.size(), threads, [&](std::size_t c) {
      const auto j = remaining[c];
      if (inc) {
        scores[c] = inc->trial(columns.col(static_cast<Eigen::Index>(j)));
      } else {
        IndexSet trial = current;
        trial.push_back(j);
        scores[c] = refit_score(target, columns, trial, with_intercept);
      }
    });

    std::size_t best = 0;
    for (std::size_t c = 1; c < remaining.size(); ++c) {
      const double a = ranked(scores[c].get(objective));
      const double b = ranked(scores[best].get(objective));
      if (a > b || (a == b && remaining[c] < remaining[best])) best = c;
    }

    if (stop.kind == StopRule::Kind::MinGain) {
      const double gain = scores[best].get(stop.on) - current_score.get(stop.on);
      if (!(gain > stop.epsilon)) break;
    }

    const auto j = remaining[best];
    current.push_back(j);
    current_score = scores[best];
    if (inc) inc->add(columns.col(static_cast<Eigen::Index>(j)));
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
    result.steps.push_back(SelectionStep{j, current_score.r2, current_score.adj_r2, std::nullopt, std::nullopt});
  }
  result.final_set = current;
  return result;
}

SelectionResult fs_fmb(const ReturnsPanel& returns, const FactorPanel& factors, const IndexSet& base_set,
                       const IndexSet& candidates, const StopRule& stop, const ObjectiveConfig& config) {
  require_aligned(returns, factors);
  const auto T = returns.periods();
  const std::size_t intended = base_set.size() + (stop.kind == StopRule::Kind::FixedCount ? stop.count : 0);
  if (intended >= T) {
    throw Error(ErrorCode::BudgetExceedsRank, "selection budget " + std::to_string(intended) +
                                                  " must be below T=" + std::to_string(T));
  }
  const MatrixXd cov = sample_covariances(returns.values, factors.values);
  const VectorXd rbar = returns.average_returns();
  SelectionResult result = greedy_select(rbar, cov, base_set, candidates, stop, config.with_intercept,
                                         config.objective, config.scan, config.threads);

  if (config.with_intercept) {
    IndexSet path = result.base_set;
    for (auto& step : result.steps) {
      path.push_back(step.index);
      const auto cs = cross_sectional_fit(rbar, gather(cov, path), true, config.hac);
      step.alpha = cs.fit.intercept;
      step.alpha_t = cs.alpha_t;
    }
  }
  return result;
}

SelectionResult fs_generic(const VectorXd& target, const MatrixXd& candidate_columns, const IndexSet& seed_set,
                           const IndexSet& candidates, const StopRule& stop, ScanMethod scan) {
  return greedy_select(target, candidate_columns, seed_set, candidates, stop, false, Objective::R2, scan);
}

}  // namespace fsfmb
