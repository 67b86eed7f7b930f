#include "fsfmb/panel.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

#include "fsfmb/error.hpp"

namespace fsfmb {

namespace {

bool parse_int(std::string_view text, int& out) {
  if (text.empty()) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

std::vector<Period> month_index(std::size_t n) {
  std::vector<Period> dates(n);
  for (std::size_t t = 0; t < n; ++t) {
    dates[t] = Period{1900 + static_cast<int>(t / 12), 1 + static_cast<int>(t % 12)};
  }
  return dates;
}

}  // namespace

std::optional<Period> Period::parse(const std::string& text) {
  std::string_view sv(text);
  while (!sv.empty() && (sv.front() == ' ' || sv.front() == '"')) sv.remove_prefix(1);
  while (!sv.empty() && (sv.back() == ' ' || sv.back() == '"' || sv.back() == '\r')) sv.remove_suffix(1);
  if (sv.size() != 7 && sv.size() != 10) return std::nullopt;
  if (sv[4] != '-') return std::nullopt;
  Period p;
  if (!parse_int(sv.substr(0, 4), p.year) || !parse_int(sv.substr(5, 2), p.month)) return std::nullopt;
  if (p.month < 1 || p.month > 12) return std::nullopt;
  if (sv.size() == 10) {
    int day = 0;
    if (sv[7] != '-' || !parse_int(sv.substr(8, 2), day) || day < 1 || day > 31) return std::nullopt;
  }
  return p;
}

std::string Period::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
  return buf;
}

std::optional<std::size_t> FactorPanel::index_of(const std::string& name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names.begin());
}

std::size_t FactorPanel::require_index(const std::string& name) const {
  if (auto idx = index_of(name)) return *idx;
  throw Error(ErrorCode::UnknownBaseFactor, "factor '" + name + "' not in panel");
}

FactorPanel FactorPanel::select(const IndexSet& columns) const {
  FactorPanel out;
  out.values.resize(values.rows(), static_cast<Eigen::Index>(columns.size()));
  out.dates = dates;
  for (std::size_t k = 0; k < columns.size(); ++k) {
    const auto j = columns[k];
    if (j >= size()) throw Error(ErrorCode::DimensionMismatch, "column index out of range");
    out.values.col(static_cast<Eigen::Index>(k)) = values.col(static_cast<Eigen::Index>(j));
    out.names.push_back(names[j]);
    out.provenance.push_back(j < provenance.size() ? provenance[j] : std::nullopt);
  }
  return out;
}

FactorPanel FactorPanel::concat(const FactorPanel& other) const {
  if (other.values.rows() != values.rows() || (!dates.empty() && !other.dates.empty() && dates != other.dates)) {
    throw Error(ErrorCode::Misalignment, "cannot concatenate panels with different dates");
  }
  FactorPanel out;
  out.values.resize(values.rows(), values.cols() + other.values.cols());
  out.values << values, other.values;
  out.names = names;
  out.names.insert(out.names.end(), other.names.begin(), other.names.end());
  out.provenance = provenance;
  out.provenance.resize(names.size());
  out.provenance.insert(out.provenance.end(), other.provenance.begin(), other.provenance.end());
  out.provenance.resize(out.names.size());
  out.dates = dates.empty() ? other.dates : dates;
  return out;
}

FactorPanel FactorPanel::rows(const std::vector<std::size_t>& rows) const {
  FactorPanel out;
  out.names = names;
  out.provenance = provenance;
  out.values.resize(static_cast<Eigen::Index>(rows.size()), values.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.values.row(static_cast<Eigen::Index>(k)) = values.row(static_cast<Eigen::Index>(rows[k]));
    if (!dates.empty()) out.dates.push_back(dates[rows[k]]);
  }
  return out;
}

ReturnsPanel select_rows(const ReturnsPanel& panel, const std::vector<std::size_t>& rows) {
  ReturnsPanel out;
  out.asset_ids = panel.asset_ids;
  out.values.resize(static_cast<Eigen::Index>(rows.size()), panel.values.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.values.row(static_cast<Eigen::Index>(k)) = panel.values.row(static_cast<Eigen::Index>(rows[k]));
    if (!panel.dates.empty()) out.dates.push_back(panel.dates[rows[k]]);
  }
  return out;
}

FactorPanel make_factor_panel(MatrixXd values, std::vector<std::string> names) {
  FactorPanel out;
  const auto p = static_cast<std::size_t>(values.cols());
  if (names.empty()) {
    for (std::size_t j = 0; j < p; ++j) names.push_back("f" + std::to_string(j + 1));
  }
  if (names.size() != p) throw Error(ErrorCode::DimensionMismatch, "factor names do not match column count");
  out.dates = month_index(static_cast<std::size_t>(values.rows()));
  out.values = std::move(values);
  out.names = std::move(names);
  out.provenance.resize(p);
  return out;
}

ReturnsPanel make_returns_panel(MatrixXd values, std::vector<std::string> ids) {
  ReturnsPanel out;
  const auto n = static_cast<std::size_t>(values.cols());
  if (ids.empty()) {
    for (std::size_t i = 0; i < n; ++i) ids.push_back("a" + std::to_string(i + 1));
  }
  if (ids.size() != n) throw Error(ErrorCode::DimensionMismatch, "asset ids do not match column count");
  out.dates = month_index(static_cast<std::size_t>(values.rows()));
  out.values = std::move(values);
  out.asset_ids = std::move(ids);
  return out;
}

void require_aligned(const ReturnsPanel& returns, const FactorPanel& factors) {
  if (returns.values.rows() != factors.values.rows()) {
    throw Error(ErrorCode::Misalignment, "returns have " + std::to_string(returns.values.rows()) +
                                             " periods, factors have " + std::to_string(factors.values.rows()));
  }
  if (!returns.dates.empty() && !factors.dates.empty() && returns.dates != factors.dates) {
    throw Error(ErrorCode::Misalignment, "returns and factors have different date indices");
  }
}

MatrixXd demean_columns(const MatrixXd& values) {
  return values.rowwise() - values.colwise().mean();
}

IndexSet all_indices(std::size_t p) {
  IndexSet out(p);
  for (std::size_t j = 0; j < p; ++j) out[j] = j;
  return out;
}

IndexSet complement(const IndexSet& set, std::size_t p) {
  std::vector<bool> taken(p, false);
  for (auto j : set) {
    if (j < p) taken[j] = true;
  }
  IndexSet out;
  for (std::size_t j = 0; j < p; ++j) {
    if (!taken[j]) out.push_back(j);
  }
  return out;
}

}  // namespace fsfmb
