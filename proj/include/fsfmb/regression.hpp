#pragma once

#include <cstddef>
#include <optional>

#include <Eigen/Dense>

namespace fsfmb {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Relative singular-value cutoff used by every least-squares solve.
inline constexpr double kRankTolerance = 1e-10;

/// Result of an ordinary least-squares fit.
///
/// `coefficients` holds the slopes only; the intercept, when fitted, is kept
/// separately. `r2` is centered when an intercept is present and uncentered
/// otherwise.
struct LinearFit {
  VectorXd coefficients;
  std::optional<double> intercept;
  VectorXd residuals;
  double r2 = 0.0;
  double adj_r2 = 0.0;
  std::size_t n_obs = 0;
  std::size_t n_regressors = 0;
  std::size_t rank = 0;  // numerical rank of the slope block

  bool rank_deficient() const { return rank < n_regressors; }
  VectorXd fitted(const VectorXd& y) const { return y - residuals; }
};

/// Bartlett-kernel truncation for Newey-West estimates.
struct HacSpec {
  std::size_t lag = 0;
  bool automatic = false;

  static HacSpec fixed(std::size_t lag) { return {lag, false}; }
  static HacSpec rule() { return {0, true}; }

  /// floor(4 * (T/100)^(2/9)).
  static std::size_t automatic_lag(std::size_t periods);
  std::size_t resolve(std::size_t periods) const { return automatic ? automatic_lag(periods) : lag; }
};

/// Least squares through a thresholded SVD; rank-deficient designs get the
/// minimum-norm solution. With an intercept the columns are centered first,
/// so the minimum-norm property applies to the slopes.
LinearFit ols(const MatrixXd& X, const VectorXd& y, bool with_intercept);

/// Adjusted R^2 for n observations and k slope regressors.
double adjusted_r2(double r2, std::size_t n, std::size_t k, bool with_intercept);

/// Centered R^2 / adjusted R^2 of arbitrary predictions (used for
/// held-out evaluation where the fit came from elsewhere).
double prediction_r2(const VectorXd& actual, const VectorXd& predicted);

/// Newey-West long-run variance of a scalar series with Bartlett weights
/// 1 - l/(L+1). The series is demeaned; autocovariances divide by T.
double newey_west_lrv(const VectorXd& series, const HacSpec& spec);

/// Long-run covariance of the rows of `scores` (T x k) without demeaning,
/// scaled by T: sum_t s_t s_t' + sum_l w_l sum_t (s_t s_{t-l}' + s_{t-l} s_t').
MatrixXd newey_west_meat(const MatrixXd& scores, std::size_t lag);

struct HacTStats {
  VectorXd t;   // intercept first when present, then slopes
  VectorXd se;
  bool zero_residual = false;  // exact fit: se = 0 and t reported as +/-inf

  std::optional<double> intercept_t(bool with_intercept) const {
    if (!with_intercept) return std::nullopt;
    return t(0);
  }
  double slope_t(std::size_t j, bool with_intercept) const {
    return t(static_cast<Eigen::Index>(j + (with_intercept ? 1 : 0)));
  }
};

/// HAC sandwich t-statistics for a fit produced by `ols(X, y, ...)`.
/// Throws SingularDesign when the design is rank-deficient.
HacTStats hac_tstats(const LinearFit& fit, const MatrixXd& X, const VectorXd& y, const HacSpec& spec);

}  // namespace fsfmb
