#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fsfmb/term.hpp"

namespace fsfmb {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Ordered set of column indices. Order matters for selection paths.
using IndexSet = std::vector<std::size_t>;

/// Calendar month; panels are monthly and joined on (year, month).
struct Period {
  int year = 0;
  int month = 0;

  auto operator<=>(const Period&) const = default;

  /// Parses "yyyy-mm" or "yyyy-mm-dd"; the day is ignored.
  static std::optional<Period> parse(const std::string& text);
  std::string to_string() const;
};

/// T x N excess returns, one column per asset.
struct ReturnsPanel {
  MatrixXd values;
  std::vector<std::string> asset_ids;
  std::vector<Period> dates;

  std::size_t periods() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t assets() const { return static_cast<std::size_t>(values.cols()); }
  VectorXd average_returns() const { return values.colwise().mean().transpose(); }
};

/// T x p factor realizations. Engineered columns carry their TermSpec.
struct FactorPanel {
  MatrixXd values;
  std::vector<std::string> names;
  std::vector<std::optional<TermSpec>> provenance;
  std::vector<Period> dates;

  std::size_t periods() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t size() const { return static_cast<std::size_t>(values.cols()); }

  std::optional<std::size_t> index_of(const std::string& name) const;
  std::size_t require_index(const std::string& name) const;

  /// Panel restricted to the given columns, in the given order.
  FactorPanel select(const IndexSet& columns) const;
  /// Column-wise concatenation; dates must agree.
  FactorPanel concat(const FactorPanel& other) const;
  /// Rows in `rows`, in order.
  FactorPanel rows(const std::vector<std::size_t>& rows) const;
};

ReturnsPanel select_rows(const ReturnsPanel& panel, const std::vector<std::size_t>& rows);

/// Builds a panel with generated names ("f1".."fp") and a plain 0..T-1
/// month index. Convenient for synthetic data and bindings.
FactorPanel make_factor_panel(MatrixXd values, std::vector<std::string> names = {});
ReturnsPanel make_returns_panel(MatrixXd values, std::vector<std::string> ids = {});

/// Throws Misalignment unless both panels have the same number of rows and,
/// when both carry dates, identical dates.
void require_aligned(const ReturnsPanel& returns, const FactorPanel& factors);

/// Columns of `values` demeaned over time.
MatrixXd demean_columns(const MatrixXd& values);

IndexSet all_indices(std::size_t p);
IndexSet complement(const IndexSet& set, std::size_t p);

}  // namespace fsfmb
