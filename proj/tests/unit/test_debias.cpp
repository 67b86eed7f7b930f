#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fsfmb/debias.hpp"
#include "fsfmb/error.hpp"
#include "synthetic.hpp"

using namespace fsfmb;
using fsfmb::testing::normal_matrix;
using fsfmb::testing::normal_vector;

namespace {

bool contains(const IndexSet& s, std::size_t j) { return std::find(s.begin(), s.end(), j) != s.end(); }

}  // namespace

TEST_CASE("debiasing set is the ordered union without duplicates") {
  std::mt19937_64 rng(60);
  MatrixXd C = normal_matrix(40, 10, rng);
  C.col(7) = 0.9 * C.col(2) + 0.1 * C.col(7);
  const IndexSet selected{0, 2};
  const DebiasSets sets = debias_set(7, C, selected, StopRule::min_gain(0.01, Objective::R2));
  CHECK(sets.selected == selected);
  CHECK_FALSE(contains(sets.auxiliary, 7));
  REQUIRE_FALSE(sets.auxiliary.empty());
  CHECK(sets.auxiliary.front() == 2);
  CHECK(sets.combined[0] == 0);
  CHECK(sets.combined[1] == 2);
  CHECK(sets.combined.back() == 7);
  for (auto j : sets.auxiliary) CHECK(contains(sets.combined, j));
  IndexSet sorted = sets.combined;
  std::sort(sorted.begin(), sorted.end());
  CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());

  // j already selected: it is not repeated.
  const DebiasSets again = debias_set(2, C, selected, StopRule::fixed_count(2));
  CHECK(std::count(again.combined.begin(), again.combined.end(), 2) == 1);
  CHECK_THROWS_AS(debias_set(10, C, selected, StopRule::fixed_count(1)), Error);
}

TEST_CASE("OLS residual is orthogonal to the other factors") {
  std::mt19937_64 rng(61);
  const FactorPanel f = make_factor_panel(normal_matrix(100, 6, rng));
  const ResidualizedFactor rz = residualize_factor(3, f);
  CHECK_FALSE(rz.used_lasso);
  const MatrixXd F = demean_columns(f.values);
  for (Eigen::Index c = 0; c < 6; ++c) {
    if (c == 3) continue;
    CHECK(std::abs(F.col(c).dot(rz.z)) < 1e-10);
  }
  CHECK(rz.sigma_z2 == doctest::Approx(rz.z.squaredNorm() / 100.0));
  CHECK(std::abs(rz.z.mean()) < 1e-12);
}

TEST_CASE("automatic residual method switches to Lasso in high dimension") {
  std::mt19937_64 rng(62);
  const FactorPanel f = make_factor_panel(normal_matrix(40, 25, rng));
  const ResidualizedFactor rz = residualize_factor(0, f);
  CHECK(rz.used_lasso);
  CHECK(rz.lambda > 0.0);
  const double rate = std::sqrt(2.0 * std::log(25.0 * 40.0) / 40.0);
  // The plug-in penalty is 1.1 * sigma * rate for some positive sigma.
  CHECK(rz.lambda / (1.1 * rate) > 0.0);

  const FactorPanel g = make_factor_panel(normal_matrix(100, 25, rng));
  CHECK_FALSE(residualize_factor(0, g).used_lasso);
}

TEST_CASE("Lasso with a vanishing penalty equals OLS") {
  std::mt19937_64 rng(63);
  const MatrixXd X = demean_columns(normal_matrix(200, 5, rng));
  VectorXd y = X * VectorXd::LinSpaced(5, -1.0, 1.0) + 0.2 * normal_vector(200, rng);
  y.array() -= y.mean();
  const VectorXd lasso = lasso_coordinate_descent(X, y, 1e-12);
  const VectorXd ols_b = ols(X, y, false).coefficients;
  CHECK((lasso - ols_b).norm() < 1e-6);
}

TEST_CASE("Lasso with a large penalty returns zeros") {
  std::mt19937_64 rng(64);
  const MatrixXd X = normal_matrix(50, 8, rng);
  const VectorXd y = normal_vector(50, rng);
  const double lambda_max = (X.transpose() * y).cwiseAbs().cwiseQuotient((X.colwise().squaredNorm() / 50.0).cwiseSqrt().transpose()).maxCoeff() / 50.0;
  CHECK(lasso_coordinate_descent(X, y, lambda_max * 1.01).isZero());
  CHECK_FALSE(lasso_coordinate_descent(X, y, lambda_max * 0.5).isZero());
}

TEST_CASE("Lasso solution satisfies the KKT conditions") {
  std::mt19937_64 rng(65);
  const MatrixXd X = normal_matrix(80, 30, rng);
  const VectorXd y = X.leftCols(3) * VectorXd::Constant(3, 1.5) + normal_vector(80, rng);
  const double lambda = 0.2;
  const VectorXd b = lasso_coordinate_descent(X, y, lambda);
  // Standardized coordinates: g_c = x_c' r / (n * s_c).
  const VectorXd r = y - X * b;
  for (Eigen::Index c = 0; c < 30; ++c) {
    const double s = std::sqrt(X.col(c).squaredNorm() / 80.0);
    const double g = X.col(c).dot(r) / (80.0 * s);
    if (b(c) != 0.0) {
      CHECK(std::abs(g - lambda * (b(c) > 0 ? 1.0 : -1.0)) < 1e-8);
    } else {
      CHECK(std::abs(g) <= lambda + 1e-8);
    }
  }
}

TEST_CASE("a spanned factor raises DegenerateResidual and is skipped") {
  auto panel = testing::linear_panel(40, 120, 5, 66, VectorXd::Ones(5));
  panel.factors.values.col(4) = panel.factors.values.col(0) - 2.0 * panel.factors.values.col(1);
  SelectionResult sel;
  sel.final_set = {0};
  const DebiasSets sets = debias_set(4, panel.returns, panel.factors, sel, StopRule::fixed_count(1));
  try {
    debiased_loading(4, panel.returns, panel.factors, sets, VectorXd::Zero(5));
    FAIL("expected DegenerateResidual");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateResidual);
  }
  const DebiasRun run = debias_all(panel.returns, panel.factors, sel, {2, 4}, StopRule::fixed_count(1));
  CHECK(run.skipped == IndexSet{4});
  REQUIRE(run.loadings.size() == 1);
  CHECK(run.loadings[0].j == 2);
}

TEST_CASE("debiased loading matches its definition") {
  VectorXd psi = VectorXd::Zero(8);
  psi(1) = 20.0;
  const auto panel = testing::linear_panel(60, 300, 8, 67, psi);
  SelectionResult sel;
  sel.final_set = {1};
  const StopRule stop = StopRule::min_gain(0.01, Objective::R2);
  const DebiasSets sets = debias_set(3, panel.returns, panel.factors, sel, stop);
  const SdfEstimate base = estimate_sdf_loadings(panel.returns, panel.factors, sel.final_set, true);
  const DebiasedLoading d = debiased_loading(3, panel.returns, panel.factors, sets, base.psi);

  const SdfEstimate comb = estimate_sdf_loadings(panel.returns, panel.factors, sets.combined, true);
  CHECK(d.psi_d == comb.psi(3));
  const ResidualizedFactor rz = residualize_factor(3, panel.factors);
  const VectorXd m = VectorXd::Ones(300) - demean_columns(panel.factors.values) * base.psi;
  const VectorXd series = rz.z.cwiseProduct(m) / rz.sigma_z2;
  CHECK(d.sigma_psi == doctest::Approx(std::sqrt(newey_west_lrv(series, HacSpec::rule()))).epsilon(1e-12));
  CHECK(d.standard_error() == doctest::Approx(d.sigma_psi / std::sqrt(300.0)));
  CHECK(d.t_stat == doctest::Approx(d.psi_d / d.standard_error()));
  const auto [lo, hi] = d.confidence_interval(1.96);
  CHECK(hi - lo == doctest::Approx(2 * 1.96 * d.standard_error()));

  const DebiasRun one = debias_all(panel.returns, panel.factors, sel, all_indices(8), stop, {}, 1);
  const DebiasRun three = debias_all(panel.returns, panel.factors, sel, all_indices(8), stop, {}, 3);
  REQUIRE(one.loadings.size() == 8);
  for (std::size_t k = 0; k < 8; ++k) {
    CHECK(one.loadings[k].psi_d == three.loadings[k].psi_d);
    CHECK(one.loadings[k].sigma_psi == three.loadings[k].sigma_psi);
  }
}

TEST_CASE("inverse covariance identity holds on random SPD matrices") {
  std::mt19937_64 rng(68);
  for (int rep = 0; rep < 100; ++rep) {
    const Eigen::Index p = 1 + rep % 12;
    CHECK(lemma_d2_check(testing::random_spd(p, rng)));
  }
  // Two variables: the projection coefficient is |b|/c in absolute value.
  const double a = 2.0, b = -0.7, c = 1.5;
  MatrixXd S(2, 2);
  S << a, b, b, c;
  const MatrixXd omega = S.inverse();
  const double e0 = a - b * b / c;
  CHECK(std::abs(b) / c == doctest::Approx(e0 * (std::abs(omega(0, 0)) + std::abs(omega(1, 0))) - 1.0));
  CHECK(lemma_d2_check(S));
}

TEST_CASE("identity check rejects non-SPD input") {
  MatrixXd S(2, 2);
  S << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(lemma_d2_check(S), Error);
  MatrixXd A(2, 2);
  A << 1.0, 0.5, 0.0, 1.0;
  CHECK_THROWS_AS(lemma_d2_check(A), Error);
  CHECK_THROWS_AS(lemma_d2_check(MatrixXd(0, 0)), Error);
}
