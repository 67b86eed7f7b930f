#include "fsfmb/fmb.hpp"

#include <cmath>
#include <limits>

#include "fsfmb/error.hpp"

namespace fsfmb {

namespace {

constexpr double kEquivalenceTolerance = 1e-8;

MatrixXd pinv_solve(const MatrixXd& A, const MatrixXd& B) {
  Eigen::JacobiSVD<MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(kRankTolerance);
  return svd.solve(B);
}

MatrixXd demeaned_subset(const FactorPanel& factors, const IndexSet& S) {
  MatrixXd F(factors.values.rows(), static_cast<Eigen::Index>(S.size()));
  for (std::size_t k = 0; k < S.size(); ++k) {
    if (S[k] >= factors.size()) throw Error(ErrorCode::DimensionMismatch, "factor index out of range");
    F.col(static_cast<Eigen::Index>(k)) = factors.values.col(static_cast<Eigen::Index>(S[k]));
  }
  return demean_columns(F);
}

}  // namespace

VectorXd SdfEstimate::psi_selected() const {
  VectorXd out(static_cast<Eigen::Index>(selected.size()));
  for (std::size_t k = 0; k < selected.size(); ++k) out(static_cast<Eigen::Index>(k)) = psi(static_cast<Eigen::Index>(selected[k]));
  return out;
}

MatrixXd factor_covariance(const FactorPanel& factors, const IndexSet& S) {
  const MatrixXd F = demeaned_subset(factors, S);
  return F.transpose() * F / static_cast<double>(F.rows());
}

MatrixXd sample_covariances(const MatrixXd& returns, const MatrixXd& factors) {
  if (returns.rows() != factors.rows()) throw Error(ErrorCode::Misalignment, "returns and factors differ in length");
  const MatrixXd F = demean_columns(factors);
  return returns.transpose() * F / static_cast<double>(returns.rows());
}

CovariancePanel sample_covariances(const ReturnsPanel& returns, const FactorPanel& factors, const IndexSet& S) {
  require_aligned(returns, factors);
  if (S.empty()) throw Error(ErrorCode::DimensionMismatch, "empty factor set");
  CovariancePanel out;
  const MatrixXd F = demeaned_subset(factors, S);
  out.values = returns.values.transpose() * F / static_cast<double>(F.rows());
  out.asset_ids = returns.asset_ids;
  for (auto j : S) out.factor_labels.push_back(factors.names[j]);
  out.factor_indices = S;
  return out;
}

MatrixXd time_series_betas(const ReturnsPanel& returns, const FactorPanel& factors, const IndexSet& S) {
  require_aligned(returns, factors);
  const MatrixXd F = demeaned_subset(factors, S);
  // beta_i = (F'F)^+ F' r_i; the thin SVD of F gives the minimum-norm solution.
  return pinv_solve(F, returns.values).transpose();
}

MatrixXd univariate_betas(const ReturnsPanel& returns, const FactorPanel& factors, const IndexSet& S) {
  require_aligned(returns, factors);
  const MatrixXd F = demeaned_subset(factors, S);
  MatrixXd out = returns.values.transpose() * F;
  for (Eigen::Index k = 0; k < F.cols(); ++k) {
    const double ss = F.col(k).squaredNorm();
    out.col(k) = ss > 0.0 ? VectorXd(out.col(k) / ss) : VectorXd::Zero(out.rows());
  }
  return out;
}

CrossSectionalFit cross_sectional_fit(const VectorXd& avg_returns, const MatrixXd& regressors, bool with_intercept,
                                      const HacSpec& hac) {
  const auto n = regressors.rows();
  const auto k = regressors.cols();
  if (n <= k) {
    throw Error(ErrorCode::DimensionMismatch, "cross-section needs N > k (N=" + std::to_string(n) +
                                                  ", k=" + std::to_string(k) + ")");
  }
  CrossSectionalFit out;
  out.fit = ols(regressors, avg_returns, with_intercept);
  try {
    out.tstats = hac_tstats(out.fit, regressors, avg_returns, hac);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SingularDesign) throw;
    out.collinear = true;
    const auto m = k + (with_intercept ? 1 : 0);
    out.tstats.t = VectorXd::Constant(m, std::numeric_limits<double>::quiet_NaN());
    out.tstats.se = out.tstats.t;
  }
  out.alpha_t = out.tstats.intercept_t(with_intercept);
  return out;
}

SdfEstimate estimate_sdf_loadings(const ReturnsPanel& returns, const FactorPanel& factors, const IndexSet& S,
                                  bool with_intercept) {
  require_aligned(returns, factors);
  const auto N = returns.assets();
  if (S.size() >= N) {
    throw Error(ErrorCode::BudgetExceedsRank, "|S|=" + std::to_string(S.size()) + " must be below N=" +
                                                  std::to_string(N));
  }
  SdfEstimate est;
  est.selected = S;
  est.psi = VectorXd::Zero(static_cast<Eigen::Index>(factors.size()));
  const VectorXd rbar = returns.average_returns();

  if (S.empty()) {
    est.fit = ols(MatrixXd(static_cast<Eigen::Index>(N), 0), rbar, with_intercept);
    est.alpha = est.fit.intercept;
    return est;
  }

  const auto cov = sample_covariances(returns, factors, S);
  est.fit = ols(cov.values, rbar, with_intercept);
  est.alpha = est.fit.intercept;
  const VectorXd psi_cov = est.fit.coefficients;
  for (std::size_t k = 0; k < S.size(); ++k) est.psi(static_cast<Eigen::Index>(S[k])) = psi_cov(static_cast<Eigen::Index>(k));

  // Beta route: cross-sectional regression on multivariate betas gives risk
  // premia, mapped to loadings through the inverse factor covariance.
  const MatrixXd sigma = factor_covariance(factors, S);
  Eigen::JacobiSVD<MatrixXd> sigma_svd(sigma);
  sigma_svd.setThreshold(kRankTolerance);
  if (sigma_svd.rank() < static_cast<Eigen::Index>(S.size())) {
    est.gram_singular = true;
    est.equivalence_gap = std::numeric_limits<double>::quiet_NaN();
    return est;
  }
  const MatrixXd betas = time_series_betas(returns, factors, S);
  const LinearFit beta_fit = ols(betas, rbar, with_intercept);
  const VectorXd psi_beta = sigma.ldlt().solve(beta_fit.coefficients);
  const double scale = std::max(psi_cov.norm(), std::numeric_limits<double>::min());
  est.equivalence_gap = (psi_beta - psi_cov).norm() / scale;
  return est;
}

VectorXd predicted_returns(const CovariancePanel& cov, const SdfEstimate& est) {
  if (static_cast<std::size_t>(cov.values.cols()) != est.selected.size()) {
    throw Error(ErrorCode::DimensionMismatch, "covariance panel does not match the selected set");
  }
  VectorXd out = est.selected.empty() ? VectorXd::Zero(cov.values.rows()) : VectorXd(cov.values * est.psi_selected());
  if (est.alpha) out.array() += *est.alpha;
  return out;
}

VectorXd risk_premia(const FactorPanel& factors, const SdfEstimate& est) {
  if (est.selected.empty()) return VectorXd::Zero(0);
  return factor_covariance(factors, est.selected) * est.psi_selected();
}

VectorXd loadings_from_premia(const FactorPanel& factors, const IndexSet& S, const VectorXd& gamma) {
  return pinv_solve(factor_covariance(factors, S), gamma);
}

bool equivalence_holds(const SdfEstimate& est) {
  return est.gram_singular || est.equivalence_gap <= kEquivalenceTolerance;
}

}  // namespace fsfmb
