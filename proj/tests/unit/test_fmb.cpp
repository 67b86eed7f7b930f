#include <doctest.h>

#include <cmath>

#include "fsfmb/error.hpp"
#include "fsfmb/fmb.hpp"
#include "synthetic.hpp"

using namespace fsfmb;
using fsfmb::testing::linear_panel;
using fsfmb::testing::normal_matrix;

namespace {

double r2_of(const MatrixXd& X, const VectorXd& y, bool icpt) { return ols(X, y, icpt).r2; }

}  // namespace

TEST_CASE("sample covariances match the centered double loop") {
  std::mt19937_64 rng(21);
  const MatrixXd R = normal_matrix(25, 4, rng);
  const MatrixXd F = normal_matrix(25, 3, rng);
  const MatrixXd C = sample_covariances(R, F);
  for (Eigen::Index i = 0; i < 4; ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) {
      const double rm = R.col(i).mean();
      const double fm = F.col(j).mean();
      double s = 0.0;
      for (Eigen::Index t = 0; t < 25; ++t) s += (F(t, j) - fm) * (R(t, i) - rm);
      CHECK(std::abs(C(i, j) - s / 25.0) < 1e-14);
    }
  }
  CHECK_THROWS_AS(sample_covariances(R, normal_matrix(24, 3, rng)), Error);
}

TEST_CASE("covariance panel and factor covariance") {
  const auto panel = linear_panel(10, 60, 4, 22, VectorXd::Ones(4));
  const IndexSet S{2, 0};
  const CovariancePanel cov = sample_covariances(panel.returns, panel.factors, S);
  CHECK(cov.factor_labels == std::vector<std::string>{"f3", "f1"});
  const MatrixXd full = sample_covariances(panel.returns.values, panel.factors.values);
  CHECK((cov.values.col(0) - full.col(2)).norm() < 1e-15);
  const MatrixXd sigma = factor_covariance(panel.factors, S);
  const MatrixXd direct = sample_covariances(panel.factors.values, panel.factors.values);
  CHECK(std::abs(sigma(0, 1) - direct(2, 0)) < 1e-15);
}

TEST_CASE("time-series betas equal per-asset OLS with intercept") {
  const auto panel = linear_panel(6, 80, 3, 23, VectorXd::Ones(3));
  const IndexSet S{0, 2};
  const MatrixXd betas = time_series_betas(panel.returns, panel.factors, S);
  MatrixXd X(80, 2);
  X << panel.factors.values.col(0), panel.factors.values.col(2);
  for (Eigen::Index i = 0; i < 6; ++i) {
    const LinearFit fit = ols(X, panel.returns.values.col(i), true);
    CHECK((betas.row(i).transpose() - fit.coefficients).norm() < 1e-10);
  }
  const MatrixXd uni = univariate_betas(panel.returns, panel.factors, S);
  const LinearFit single = ols(X.col(1), panel.returns.values.col(3), true);
  CHECK(std::abs(uni(3, 1) - single.coefficients(0)) < 1e-10);
}

TEST_CASE("loadings from the covariance and beta routes agree") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    const auto panel = linear_panel(60, 200, 8, 100 + seed, testing::normal_vector(8, rng));
    IndexSet S;
    for (std::size_t j = 0; j < 1 + seed % 6; ++j) S.push_back((3 * j + seed) % 8);
    for (bool icpt : {true, false}) {
      const SdfEstimate est = estimate_sdf_loadings(panel.returns, panel.factors, S, icpt);
      CHECK_FALSE(est.gram_singular);
      CHECK(est.equivalence_gap < 1e-8);
      CHECK(equivalence_holds(est));

      // Independent beta route: risk premia from the beta regression,
      // loadings through the inverse factor covariance.
      const MatrixXd betas = time_series_betas(panel.returns, panel.factors, S);
      const LinearFit beta_fit = ols(betas, panel.returns.average_returns(), icpt);
      const VectorXd psi_beta = factor_covariance(panel.factors, S).inverse() * beta_fit.coefficients;
      CHECK((psi_beta - est.psi_selected()).norm() <= 1e-8 * est.psi_selected().norm());
      if (icpt) CHECK(std::abs(*beta_fit.intercept - *est.alpha) < 1e-10);
      // Loadings are zero off the selected set.
      for (std::size_t j = 0; j < 8; ++j) {
        if (std::find(S.begin(), S.end(), j) == S.end()) CHECK(est.psi(static_cast<Eigen::Index>(j)) == 0.0);
      }
    }
  }
}

TEST_CASE("three R2 forms agree") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto panel = linear_panel(60, 200, 6, 200 + seed, VectorXd::LinSpaced(6, -1.0, 2.0));
    const IndexSet S{0, 3, 5};
    const VectorXd rbar = panel.returns.average_returns();
    const MatrixXd C = sample_covariances(panel.returns, panel.factors, S).values;
    const MatrixXd B = time_series_betas(panel.returns, panel.factors, S);
    const MatrixXd U = univariate_betas(panel.returns, panel.factors, S);
    for (bool icpt : {true, false}) {
      const double rc = r2_of(C, rbar, icpt);
      CHECK(std::abs(rc - r2_of(B, rbar, icpt)) < 1e-10);
      CHECK(std::abs(rc - r2_of(U, rbar, icpt)) < 1e-10);
    }
  }
}

TEST_CASE("exactly priced returns recover the loadings") {
  auto panel = linear_panel(30, 120, 3, 31, VectorXd::Zero(3));
  const VectorXd psi = (VectorXd(3) << 2.0, -1.0, 0.5).finished();
  const IndexSet S{0, 1, 2};
  // Shift each asset so its mean is exactly 0.001 + C psi.
  const MatrixXd C = sample_covariances(panel.returns, panel.factors, S).values;
  const VectorXd target = (C * psi).array() + 0.001;
  panel.returns.values.rowwise() += (target - panel.returns.average_returns()).transpose();
  const SdfEstimate est = estimate_sdf_loadings(panel.returns, panel.factors, S, true);
  CHECK((est.psi_selected() - psi).norm() < 1e-8);
  CHECK(std::abs(*est.alpha - 0.001) < 1e-10);
  CHECK(est.fit.r2 == doctest::Approx(1.0).epsilon(1e-10));

  const CovariancePanel cov = sample_covariances(panel.returns, panel.factors, S);
  CHECK((predicted_returns(cov, est) - target).norm() < 1e-10);
  const VectorXd gamma = risk_premia(panel.factors, est);
  CHECK((gamma - factor_covariance(panel.factors, S) * est.psi_selected()).norm() < 1e-14);
  CHECK((loadings_from_premia(panel.factors, S, gamma) - est.psi_selected()).norm() < 1e-8);
}

TEST_CASE("duplicate factors flag a singular factor covariance") {
  auto panel = linear_panel(20, 80, 3, 32, VectorXd::Ones(3));
  panel.factors.values.col(2) = panel.factors.values.col(0);
  const SdfEstimate est = estimate_sdf_loadings(panel.returns, panel.factors, {0, 1, 2}, true);
  CHECK(est.gram_singular);
  CHECK(equivalence_holds(est));
  CHECK(est.fit.rank_deficient());
}

TEST_CASE("estimate_sdf_loadings budget and alignment errors") {
  const auto panel = linear_panel(4, 50, 6, 33, VectorXd::Ones(6));
  try {
    estimate_sdf_loadings(panel.returns, panel.factors, {0, 1, 2, 3}, true);
    FAIL("expected BudgetExceedsRank");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BudgetExceedsRank);
  }
  FactorPanel short_factors = panel.factors.rows({0, 1, 2});
  CHECK_THROWS_AS(estimate_sdf_loadings(panel.returns, short_factors, {0}, true), Error);

  const SdfEstimate empty = estimate_sdf_loadings(panel.returns, panel.factors, {}, true);
  CHECK(empty.selected.empty());
  CHECK(std::abs(*empty.alpha - panel.returns.average_returns().mean()) < 1e-15);
}

TEST_CASE("cross-sectional fit reports collinearity instead of throwing") {
  std::mt19937_64 rng(34);
  MatrixXd X = normal_matrix(30, 2, rng);
  X.col(1) = X.col(0);
  const CrossSectionalFit cs = cross_sectional_fit(testing::normal_vector(30, rng), X, true, HacSpec::fixed(0));
  CHECK(cs.collinear);
  CHECK(std::isnan(cs.tstats.t(1)));
  CHECK_THROWS_AS(cross_sectional_fit(VectorXd::Zero(2), MatrixXd::Zero(2, 2), true, HacSpec::fixed(0)), Error);
}
