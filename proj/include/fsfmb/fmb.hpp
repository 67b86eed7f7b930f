#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fsfmb/panel.hpp"
#include "fsfmb/regression.hpp"

namespace fsfmb {

/// N x |S| sample covariances C(i,j) = T^-1 sum_t (f_tj - mean f_j) r_it.
struct CovariancePanel {
  MatrixXd values;
  std::vector<std::string> asset_ids;
  std::vector<std::string> factor_labels;
  IndexSet factor_indices;  // columns of the source factor panel
};

/// Sparse SDF loadings on the full factor universe.
struct SdfEstimate {
  VectorXd psi;                 // length p, zero off `selected`
  IndexSet selected;
  std::optional<double> alpha;  // cross-sectional intercept
  LinearFit fit;                // regression of mean returns on covariances
  bool gram_singular = false;   // factor second-moment matrix on `selected` is singular
  double equivalence_gap = 0.0; // relative gap between the beta route and the covariance route

  VectorXd psi_selected() const;
};

struct CrossSectionalFit {
  LinearFit fit;
  HacTStats tstats;
  std::optional<double> alpha_t;
  bool collinear = false;  // design rank-deficient, t-stats unavailable (NaN)
};

/// Demeaned factor second-moment matrix on S, normalized by 1/T.
MatrixXd factor_covariance(const FactorPanel& factors, const IndexSet& S);

CovariancePanel sample_covariances(const ReturnsPanel& returns, const FactorPanel& factors, const IndexSet& S);

/// Raw-matrix form: returns (T x N), factors (T x p) -> N x p.
MatrixXd sample_covariances(const MatrixXd& returns, const MatrixXd& factors);

/// Multivariate time-series betas (with intercept) of every asset on the
/// factors in S, N x |S|. Pseudo-inverse when the factor Gram matrix is singular.
MatrixXd time_series_betas(const ReturnsPanel& returns, const FactorPanel& factors, const IndexSet& S);

/// Univariate betas: each asset regressed on each factor separately, N x |S|.
MatrixXd univariate_betas(const ReturnsPanel& returns, const FactorPanel& factors, const IndexSet& S);

/// Second-pass regression of average returns on asset-level regressors.
CrossSectionalFit cross_sectional_fit(const VectorXd& avg_returns, const MatrixXd& regressors, bool with_intercept,
                                      const HacSpec& hac);

/// SDF loadings on S via the covariance regression, cross-checked against
/// the beta route (betas -> risk premia -> loadings).
SdfEstimate estimate_sdf_loadings(const ReturnsPanel& returns, const FactorPanel& factors, const IndexSet& S,
                                  bool with_intercept);

/// False when the factor Gram matrix is nonsingular yet the two routes differ
/// by more than 1e-8 relative.
bool equivalence_holds(const SdfEstimate& est);

/// alpha + C_S psi_S; `cov` must hold the columns of `est.selected` in order.
VectorXd predicted_returns(const CovariancePanel& cov, const SdfEstimate& est);

/// gamma_S = Sigma_S psi_S.
VectorXd risk_premia(const FactorPanel& factors, const SdfEstimate& est);
/// psi_S = Sigma_S^-1 gamma_S (pseudo-inverse when singular).
VectorXd loadings_from_premia(const FactorPanel& factors, const IndexSet& S, const VectorXd& gamma);

}  // namespace fsfmb
