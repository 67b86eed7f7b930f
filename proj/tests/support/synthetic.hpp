#pragma once

#include <cstdint>
#include <random>

#include "fsfmb/fmb.hpp"
#include "fsfmb/panel.hpp"

namespace fsfmb::testing {

inline MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> normal(0.0, sd);
  MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  }
  return m;
}

inline VectorXd normal_vector(Eigen::Index n, std::mt19937_64& rng, double sd = 1.0) {
  return normal_matrix(n, 1, rng, sd).col(0);
}

struct Panel {
  ReturnsPanel returns;
  FactorPanel factors;
};

/// Returns driven by all p factors plus noise, with expected returns priced
/// by `psi` through the sample covariance of the factors.
inline Panel linear_panel(std::size_t N, std::size_t T, std::size_t p, std::uint64_t seed, const VectorXd& psi,
                          double noise = 0.05) {
  std::mt19937_64 rng(seed);
  const auto n = static_cast<Eigen::Index>(N);
  const auto t = static_cast<Eigen::Index>(T);
  const auto k = static_cast<Eigen::Index>(p);
  MatrixXd F = normal_matrix(t, k, rng, 0.04);
  F.rowwise() += normal_vector(k, rng, 0.003).transpose();
  const MatrixXd G = demean_columns(F);
  const MatrixXd sigma = G.transpose() * G / static_cast<double>(T);
  const MatrixXd B = normal_matrix(n, k, rng) + MatrixXd::Constant(n, k, 0.5);
  const VectorXd mu = B * sigma * psi;
  MatrixXd R = G * B.transpose() + normal_matrix(t, n, rng, noise);
  R.rowwise() += mu.transpose();
  return {make_returns_panel(R), make_factor_panel(F)};
}

/// Random panel with no pricing structure at all.
inline Panel random_panel(std::size_t N, std::size_t T, std::size_t p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const MatrixXd F = normal_matrix(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(p), rng, 0.04);
  MatrixXd R = F * normal_matrix(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(N), rng) +
               normal_matrix(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(N), rng, 0.05);
  R.array() += 0.005;
  return {make_returns_panel(R), make_factor_panel(F)};
}

/// Random symmetric positive definite matrix (Wishart-like).
inline MatrixXd random_spd(Eigen::Index p, std::mt19937_64& rng) {
  const MatrixXd A = normal_matrix(p + 3, p, rng);
  return A.transpose() * A / static_cast<double>(p + 3) + 1e-3 * MatrixXd::Identity(p, p);
}

}  // namespace fsfmb::testing
