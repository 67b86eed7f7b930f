#include "fsfmb/debias.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "fsfmb/error.hpp"
#include "fsfmb/parallel.hpp"

namespace fsfmb {

namespace {

void append_unique(IndexSet& out, const IndexSet& add) {
  for (auto j : add) {
    if (std::find(out.begin(), out.end(), j) == out.end()) out.push_back(j);
  }
}

double soft_threshold(double x, double lambda) {
  if (x > lambda) return x - lambda;
  if (x < -lambda) return x + lambda;
  return 0.0;
}

double rms(const VectorXd& v) { return std::sqrt(v.squaredNorm() / static_cast<double>(v.size())); }

}  // namespace

double DebiasedLoading::standard_error() const {
  return sigma_psi / std::sqrt(static_cast<double>(periods));
}

std::pair<double, double> DebiasedLoading::confidence_interval(double z) const {
  const double half = z * standard_error();
  return {psi_d - half, psi_d + half};
}

DebiasSets debias_set(std::size_t j, const MatrixXd& covariances, const IndexSet& selected, const StopRule& stop) {
  const auto p = static_cast<std::size_t>(covariances.cols());
  if (j >= p) throw Error(ErrorCode::DimensionMismatch, "coordinate " + std::to_string(j) + " out of range");
  DebiasSets sets;
  sets.selected = selected;
  const IndexSet others = complement({j}, p);
  if (!others.empty()) {
    const VectorXd target = covariances.col(static_cast<Eigen::Index>(j));
    sets.auxiliary = fs_generic(target, covariances, {}, others, stop).final_set;
  }
  sets.combined = selected;
  append_unique(sets.combined, sets.auxiliary);
  append_unique(sets.combined, {j});
  return sets;
}

DebiasSets debias_set(std::size_t j, const ReturnsPanel& returns, const FactorPanel& factors,
                      const SelectionResult& base_selection, const StopRule& stop) {
  require_aligned(returns, factors);
  return debias_set(j, sample_covariances(returns.values, factors.values), base_selection.final_set, stop);
}

VectorXd lasso_coordinate_descent(const MatrixXd& X, const VectorXd& y, double lambda, double tolerance,
                                  int max_sweeps) {
  const auto n = X.rows();
  const auto k = X.cols();
  const double dn = static_cast<double>(n);
  VectorXd scale(k);
  MatrixXd Xs(n, k);
  for (Eigen::Index c = 0; c < k; ++c) {
    scale(c) = std::sqrt(X.col(c).squaredNorm() / dn);
    Xs.col(c) = scale(c) > 0.0 ? VectorXd(X.col(c) / scale(c)) : VectorXd::Zero(n);
  }

  VectorXd b = VectorXd::Zero(k);
  VectorXd r = y;
  const double y_scale = std::max(rms(y), 1e-300);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index c = 0; c < k; ++c) {
      if (scale(c) == 0.0) continue;
      const double old = b(c);
      // Standardized columns have unit mean square.
      const double rho = Xs.col(c).dot(r) / dn + old;
      const double updated = soft_threshold(rho, lambda);
      if (updated != old) {
        r -= (updated - old) * Xs.col(c);
        b(c) = updated;
        max_change = std::max(max_change, std::abs(updated - old));
      }
    }
    if (max_change <= tolerance * y_scale) break;
  }
  for (Eigen::Index c = 0; c < k; ++c) b(c) = scale(c) > 0.0 ? b(c) / scale(c) : 0.0;
  return b;
}

ResidualizedFactor residualize_factor(std::size_t j, const FactorPanel& factors, const ResidualOptions& options) {
  const auto T = factors.periods();
  const auto p = factors.size();
  if (T <= 2) throw Error(ErrorCode::SeriesTooShort, "residualization needs T > 2");
  if (j >= p) throw Error(ErrorCode::DimensionMismatch, "coordinate out of range");

  const MatrixXd F = demean_columns(factors.values);
  const VectorXd y = F.col(static_cast<Eigen::Index>(j));
  const IndexSet others = complement({j}, p);
  MatrixXd X(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(others.size()));
  for (std::size_t k = 0; k < others.size(); ++k) X.col(static_cast<Eigen::Index>(k)) = F.col(static_cast<Eigen::Index>(others[k]));

  ResidualizedFactor out;
  out.j = j;
  bool lasso = false;
  switch (options.method) {
    case ResidualMethod::Auto: lasso = 2 * others.size() >= T; break;
    case ResidualMethod::Ols: lasso = false; break;
    case ResidualMethod::Lasso: lasso = true; break;
  }

  if (others.empty()) {
    out.eta = VectorXd::Zero(0);
  } else if (!lasso) {
    out.eta = ols(X, y, false).coefficients;
  } else {
    out.used_lasso = true;
    const double dT = static_cast<double>(T);
    if (options.lambda) {
      out.lambda = *options.lambda;
      out.eta = lasso_coordinate_descent(X, y, out.lambda, options.tolerance, options.max_sweeps);
    } else {
      // Initial noise level from a unit-penalty ridge fit on standardized columns.
      VectorXd sd = (X.colwise().squaredNorm() / dT).cwiseSqrt().transpose();
      MatrixXd Xs = X;
      for (Eigen::Index c = 0; c < Xs.cols(); ++c) {
        if (sd(c) > 0.0) Xs.col(c) /= sd(c);
        else Xs.col(c).setZero();
      }
      const MatrixXd gram = Xs.transpose() * Xs / dT + MatrixXd::Identity(Xs.cols(), Xs.cols());
      const VectorXd ridge = gram.ldlt().solve(Xs.transpose() * y / dT);
      double sigma = rms(y - Xs * ridge);
      const double rate = std::sqrt(2.0 * std::log(static_cast<double>(p) * dT) / dT);
      const int iterations = std::max(1, options.sigma_iterations);
      for (int it = 0; it < iterations; ++it) {
        out.lambda = options.penalty_constant * sigma * rate;
        out.eta = lasso_coordinate_descent(X, y, out.lambda, options.tolerance, options.max_sweeps);
        sigma = rms(y - X * out.eta);
      }
    }
  }
  out.z = others.empty() ? y : VectorXd(y - X * out.eta);
  out.sigma_z2 = out.z.squaredNorm() / static_cast<double>(T);
  return out;
}

SdfSeries sdf_series(const FactorPanel& factors, const VectorXd& psi) {
  if (psi.size() != factors.values.cols()) throw Error(ErrorCode::DimensionMismatch, "psi length");
  SdfSeries out;
  out.m = VectorXd::Ones(factors.values.rows()) - demean_columns(factors.values) * psi;
  return out;
}

DebiasedLoading debiased_loading(std::size_t j, const ReturnsPanel& returns, const FactorPanel& factors,
                                 const DebiasSets& sets, const VectorXd& base_psi, const DebiasOptions& options) {
  require_aligned(returns, factors);
  const auto T = returns.periods();
  const auto N = returns.assets();
  if (sets.combined.size() >= std::min(N, T)) {
    throw Error(ErrorCode::BudgetExceedsRank, "debiasing set of size " + std::to_string(sets.combined.size()) +
                                                  " too large for N=" + std::to_string(N) +
                                                  ", T=" + std::to_string(T));
  }

  const ResidualizedFactor rz = residualize_factor(j, factors, options.residual);
  const VectorXd fj = factors.values.col(static_cast<Eigen::Index>(j));
  const double var_j = (fj.array() - fj.mean()).square().mean();
  if (!(var_j > 0.0) || rz.sigma_z2 <= 1e-10 * var_j) {
    throw Error(ErrorCode::DegenerateResidual, "factor " + factors.names[j] + " is spanned by the other factors");
  }

  const SdfEstimate est = estimate_sdf_loadings(returns, factors, sets.combined, options.with_intercept);
  const SdfSeries sdf = sdf_series(factors, options.sdf_from_expanded_set ? est.psi : base_psi);

  DebiasedLoading out;
  out.j = j;
  out.sets = sets;
  out.periods = T;
  out.psi_d = est.psi(static_cast<Eigen::Index>(j));
  const VectorXd series = rz.z.cwiseProduct(sdf.m) / rz.sigma_z2;
  out.sigma_psi = std::sqrt(newey_west_lrv(series, options.hac));
  out.t_stat = out.psi_d / out.standard_error();
  return out;
}

DebiasRun debias_all(const ReturnsPanel& returns, const FactorPanel& factors, const SelectionResult& base_selection,
                     const IndexSet& coordinates, const StopRule& stop, const DebiasOptions& options,
                     std::size_t threads) {
  require_aligned(returns, factors);
  const MatrixXd cov = sample_covariances(returns.values, factors.values);
  const SdfEstimate base = estimate_sdf_loadings(returns, factors, base_selection.final_set, options.with_intercept);

  std::vector<std::optional<DebiasedLoading>> slots(coordinates.size());
  parallel_for(coordinates.size(), threads, [&](std::size_t k) {
    const auto j = coordinates[k];
    const DebiasSets sets = debias_set(j, cov, base_selection.final_set, stop);
    try {
      slots[k] = debiased_loading(j, returns, factors, sets, base.psi, options);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateResidual) throw;
    }
  });

  DebiasRun run;
  for (std::size_t k = 0; k < coordinates.size(); ++k) {
    if (slots[k]) run.loadings.push_back(*slots[k]);
    else run.skipped.push_back(coordinates[k]);
  }
  return run;
}

bool lemma_d2_check(const MatrixXd& covariance, double tolerance) {
  const auto p = covariance.rows();
  if (p == 0 || covariance.cols() != p) throw Error(ErrorCode::NotSPD, "covariance must be square and non-empty");
  if (!covariance.isApprox(covariance.transpose(), 1e-12)) throw Error(ErrorCode::NotSPD, "covariance not symmetric");
  Eigen::LLT<MatrixXd> llt(covariance);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::NotSPD, "covariance not positive definite");

  const MatrixXd omega = llt.solve(MatrixXd::Identity(p, p));
  bool ok = true;
  for (Eigen::Index j = 0; j < p; ++j) {
    const IndexSet others = complement({static_cast<std::size_t>(j)}, static_cast<std::size_t>(p));
    const auto m = static_cast<Eigen::Index>(others.size());
    MatrixXd s_oo(m, m);
    VectorXd s_oj(m);
    for (Eigen::Index a = 0; a < m; ++a) {
      s_oj(a) = covariance(static_cast<Eigen::Index>(others[a]), j);
      for (Eigen::Index b = 0; b < m; ++b) {
        s_oo(a, b) = covariance(static_cast<Eigen::Index>(others[a]), static_cast<Eigen::Index>(others[b]));
      }
    }
    const VectorXd gamma = m > 0 ? VectorXd(s_oo.llt().solve(s_oj)) : VectorXd::Zero(0);
    const double resid_var = covariance(j, j) - (m > 0 ? s_oj.dot(gamma) : 0.0);
    const double lhs = gamma.lpNorm<1>();
    const double rhs = resid_var * omega.col(j).lpNorm<1>() - 1.0;
    if (std::abs(lhs - rhs) > tolerance * std::max(1.0, std::abs(lhs))) ok = false;
  }
  return ok;
}

}  // namespace fsfmb
