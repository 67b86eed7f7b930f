#include "fsfmb/regression.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <string>

#include "fsfmb/error.hpp"

namespace fsfmb {

namespace {

void check_inputs(const MatrixXd& X, const VectorXd& y) {
  if (X.rows() != y.size() || X.rows() < 1) {
    throw Error(ErrorCode::DimensionMismatch, "design has " + std::to_string(X.rows()) + " rows, response has " +
                                                  std::to_string(y.size()));
  }
  if (!X.allFinite() || !y.allFinite()) throw Error(ErrorCode::NonFiniteInput, "least squares input");
}

MatrixXd with_constant(const MatrixXd& X) {
  MatrixXd D(X.rows(), X.cols() + 1);
  D.col(0).setOnes();
  D.rightCols(X.cols()) = X;
  return D;
}

}  // namespace

std::size_t HacSpec::automatic_lag(std::size_t periods) {
  return static_cast<std::size_t>(std::floor(4.0 * std::pow(static_cast<double>(periods) / 100.0, 2.0 / 9.0)));
}

double adjusted_r2(double r2, std::size_t n, std::size_t k, bool with_intercept) {
  const double nn = static_cast<double>(n);
  const double dof = with_intercept ? nn - static_cast<double>(k) - 1.0 : nn - static_cast<double>(k);
  if (dof <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  const double num = with_intercept ? nn - 1.0 : nn;
  return 1.0 - (1.0 - r2) * num / dof;
}

double prediction_r2(const VectorXd& actual, const VectorXd& predicted) {
  const double sst = (actual.array() - actual.mean()).square().sum();
  const double ssr = (actual - predicted).squaredNorm();
  if (sst <= 0.0) return 0.0;
  return 1.0 - ssr / sst;
}

LinearFit ols(const MatrixXd& X, const VectorXd& y, bool with_intercept) {
  check_inputs(X, y);
  const auto n = X.rows();
  const auto k = X.cols();

  LinearFit fit;
  fit.n_obs = static_cast<std::size_t>(n);
  fit.n_regressors = static_cast<std::size_t>(k);

  double y_mean = 0.0;
  MatrixXd design;
  VectorXd response;
  if (with_intercept) {
    y_mean = y.mean();
    design = X.rowwise() - X.colwise().mean();
    response = y.array() - y_mean;
  } else {
    design = X;
    response = y;
  }

  if (k > 0) {
    Eigen::JacobiSVD<MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(kRankTolerance);
    fit.rank = static_cast<std::size_t>(svd.rank());
    fit.coefficients = fit.rank > 0 ? VectorXd(svd.solve(response)) : VectorXd::Zero(k);
  } else {
    fit.coefficients = VectorXd::Zero(0);
  }

  VectorXd fitted = k > 0 ? VectorXd(X * fit.coefficients) : VectorXd::Zero(n);
  if (with_intercept) {
    const double icpt = k > 0 ? y_mean - X.colwise().mean().dot(fit.coefficients) : y_mean;
    fit.intercept = icpt;
    fitted.array() += icpt;
  }
  fit.residuals = y - fitted;

  const double ssr = fit.residuals.squaredNorm();
  const double sst = with_intercept ? (y.array() - y_mean).square().sum() : y.squaredNorm();
  fit.r2 = sst > 0.0 ? 1.0 - ssr / sst : 0.0;
  fit.adj_r2 = adjusted_r2(fit.r2, fit.n_obs, fit.n_regressors, with_intercept);
  return fit;
}

double newey_west_lrv(const VectorXd& series, const HacSpec& spec) {
  const auto T = static_cast<std::size_t>(series.size());
  if (T < 2) throw Error(ErrorCode::SeriesTooShort, "need at least 2 observations, got " + std::to_string(T));
  const std::size_t L = spec.resolve(T);
  if (L >= T) {
    throw Error(ErrorCode::SeriesTooShort, "lag " + std::to_string(L) + " must be below series length " +
                                               std::to_string(T));
  }
  const VectorXd x = series.array() - series.mean();
  const double inv_t = 1.0 / static_cast<double>(T);
  double lrv = x.squaredNorm() * inv_t;
  for (std::size_t l = 1; l <= L; ++l) {
    const auto len = static_cast<Eigen::Index>(T - l);
    const double gamma = x.tail(len).dot(x.head(len)) * inv_t;
    const double weight = 1.0 - static_cast<double>(l) / static_cast<double>(L + 1);
    lrv += 2.0 * weight * gamma;
  }
  // Bartlett weights give a positive semidefinite estimate.
  assert(lrv >= -1e-12 * x.squaredNorm() * inv_t);
  return lrv < 0.0 ? 0.0 : lrv;
}

MatrixXd newey_west_meat(const MatrixXd& scores, std::size_t lag) {
  const auto T = scores.rows();
  if (static_cast<std::size_t>(T) <= lag) {
    throw Error(ErrorCode::SeriesTooShort, "lag " + std::to_string(lag) + " must be below " + std::to_string(T));
  }
  MatrixXd meat = scores.transpose() * scores;
  for (std::size_t l = 1; l <= lag; ++l) {
    const auto len = T - static_cast<Eigen::Index>(l);
    const MatrixXd cross = scores.bottomRows(len).transpose() * scores.topRows(len);
    const double weight = 1.0 - static_cast<double>(l) / static_cast<double>(lag + 1);
    meat += weight * (cross + cross.transpose());
  }
  return meat;
}

HacTStats hac_tstats(const LinearFit& fit, const MatrixXd& X, const VectorXd& y, const HacSpec& spec) {
  check_inputs(X, y);
  const bool with_intercept = fit.intercept.has_value();
  const MatrixXd D = with_intercept ? with_constant(X) : X;
  const auto k = D.cols();
  if (fit.residuals.size() != D.rows()) throw Error(ErrorCode::DimensionMismatch, "fit does not match design");

  Eigen::JacobiSVD<MatrixXd> svd(D, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(kRankTolerance);
  if (svd.rank() < k) throw Error(ErrorCode::SingularDesign, "design matrix is rank deficient");

  VectorXd coef(k);
  if (with_intercept) {
    coef << *fit.intercept, fit.coefficients;
  } else {
    coef = fit.coefficients;
  }

  HacTStats out;
  out.t.resize(k);
  out.se.resize(k);

  const double scale = std::max(1.0, y.squaredNorm());
  if (fit.residuals.squaredNorm() <= 1e-26 * scale) {
    out.zero_residual = true;
    out.se.setZero();
    for (Eigen::Index j = 0; j < k; ++j) {
      out.t(j) = std::copysign(std::numeric_limits<double>::infinity(), coef(j));
    }
    return out;
  }

  // (D'D)^-1 = V S^-2 V'
  const VectorXd inv_s2 = svd.singularValues().array().square().inverse();
  const MatrixXd bread = svd.matrixV() * inv_s2.asDiagonal() * svd.matrixV().transpose();
  const MatrixXd scores = D.array().colwise() * fit.residuals.array();
  const MatrixXd meat = newey_west_meat(scores, spec.resolve(static_cast<std::size_t>(D.rows())));
  const MatrixXd cov = bread * meat * bread;
  for (Eigen::Index j = 0; j < k; ++j) {
    out.se(j) = std::sqrt(std::max(0.0, cov(j, j)));
    out.t(j) = out.se(j) > 0.0 ? coef(j) / out.se(j)
                                : std::copysign(std::numeric_limits<double>::infinity(), coef(j));
  }
  return out;
}

}  // namespace fsfmb
