#pragma once

#include <optional>
#include <vector>

#include "fsfmb/fmb.hpp"
#include "fsfmb/panel.hpp"
#include "fsfmb/regression.hpp"
#include "fsfmb/selection.hpp"

namespace fsfmb {

/// The three sets behind one debiased coordinate.
struct DebiasSets {
  IndexSet selected;   // main selection
  IndexSet auxiliary;  // greedy selection explaining C_j by the other columns
  IndexSet combined;   // selected U auxiliary U {j}, in that order, no duplicates
};

struct DebiasedLoading {
  std::size_t j = 0;
  double psi_d = 0.0;
  double sigma_psi = 0.0;  // asymptotic standard deviation of sqrt(T)(psi_d - psi_j)
  double t_stat = 0.0;
  std::size_t periods = 0;
  DebiasSets sets;

  double standard_error() const;
  /// psi_d +/- z * sigma_psi / sqrt(T)
  std::pair<double, double> confidence_interval(double z = 1.96) const;
};

struct ResidualizedFactor {
  std::size_t j = 0;
  VectorXd eta;       // coefficients on the other p-1 demeaned factors
  VectorXd z;         // residual series, length T
  double sigma_z2 = 0.0;
  bool used_lasso = false;
  double lambda = 0.0;
};

struct SdfSeries {
  VectorXd m;  // 1 - psi'(f_t - mean f)
};

enum class ResidualMethod { Auto, Ols, Lasso };

struct ResidualOptions {
  ResidualMethod method = ResidualMethod::Auto;
  double penalty_constant = 1.1;
  std::optional<double> lambda;  // overrides the plug-in penalty
  int sigma_iterations = 2;
  double tolerance = 1e-12;
  int max_sweeps = 100000;
};

struct DebiasOptions {
  bool with_intercept = true;
  HacSpec hac = HacSpec::rule();
  ResidualOptions residual;
  bool sdf_from_expanded_set = false;  // build m_t from the expanded-set estimate instead of the base one
};

/// Debiasing set for coordinate j given the main selection result.
DebiasSets debias_set(std::size_t j, const MatrixXd& covariances, const IndexSet& selected, const StopRule& stop);
DebiasSets debias_set(std::size_t j, const ReturnsPanel& returns, const FactorPanel& factors,
                      const SelectionResult& base_selection, const StopRule& stop);

/// Residual of demeaned factor j on the other demeaned factors. OLS when
/// p-1 < T/2 (or forced), coordinate-descent Lasso otherwise.
ResidualizedFactor residualize_factor(std::size_t j, const FactorPanel& factors, const ResidualOptions& options = {});

SdfSeries sdf_series(const FactorPanel& factors, const VectorXd& psi);

/// Debiased loading of factor j on the combined set with its plug-in
/// long-run-variance standard error. `base_psi` is the main estimate used to
/// build m_t. Throws DegenerateResidual when factor j is spanned by the others.
DebiasedLoading debiased_loading(std::size_t j, const ReturnsPanel& returns, const FactorPanel& factors,
                                 const DebiasSets& sets, const VectorXd& base_psi, const DebiasOptions& options = {});

struct DebiasRun {
  std::vector<DebiasedLoading> loadings;
  std::vector<std::size_t> skipped;  // coordinates with a degenerate residual
};

/// debias_set + debiased_loading for every index in `coordinates`.
DebiasRun debias_all(const ReturnsPanel& returns, const FactorPanel& factors, const SelectionResult& base_selection,
                     const IndexSet& coordinates, const StopRule& stop, const DebiasOptions& options = {},
                     std::size_t threads = 1);

/// Lasso by cyclic coordinate descent on standardized columns, minimizing
/// (1/2n)||y - Xb||^2 + lambda ||b||_1. Returns coefficients on the original scale.
VectorXd lasso_coordinate_descent(const MatrixXd& X, const VectorXd& y, double lambda, double tolerance = 1e-12,
                                  int max_sweeps = 100000);

/// For every j: with gamma_j the projection coefficients of variable j on the
/// others and e_j the residual variance, checks
///   ||gamma_j||_1 = e_j * sum_l |Omega_lj| - 1,  Omega = covariance^-1
/// to 1e-8 (scaled). Throws NotSPD.
bool lemma_d2_check(const MatrixXd& covariance, double tolerance = 1e-8);

}  // namespace fsfmb
