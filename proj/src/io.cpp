#include "fsfmb/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "fsfmb/error.hpp"

namespace fsfmb {

namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return std::string(s);
}

bool is_missing(const std::string& cell) { return cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan"; }

std::string where(const std::string& label, std::size_t row, std::size_t col) {
  return label + ": row " + std::to_string(row) + ", column " + std::to_string(col);
}

}  // namespace

std::string to_string(PanelKind kind) {
  switch (kind) {
    case PanelKind::Returns: return "returns";
    case PanelKind::Factors: return "factors";
    case PanelKind::Zoo: return "zoo";
    case PanelKind::Macro: return "macro";
    case PanelKind::RegimeMask: return "regimes";
  }
  return "unknown";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(trim(cell));
      cell.clear();
    } else {
      cell += c;
    }
  }
  out.push_back(trim(cell));
  return out;
}

RawPanel parse_panel_csv(const std::string& text, const PanelFile& file, const std::string& label) {
  std::istringstream in(text);
  std::string line;
  std::size_t row = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++row;
    if (!trim(line).empty()) {
      header = split_csv_line(line);
      break;
    }
  }
  if (header.empty()) throw Error(ErrorCode::ParseError, label + ": missing header row");
  if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0] = header[0].substr(3);

  auto date_it = std::find(header.begin(), header.end(), file.date_column);
  if (date_it == header.end()) {
    throw Error(ErrorCode::ParseError, label + ": no date column '" + file.date_column + "'");
  }
  const auto date_col = static_cast<std::size_t>(date_it - header.begin());

  std::vector<std::size_t> picked;
  if (file.value_columns.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c != date_col) picked.push_back(c);
    }
  } else {
    for (const auto& name : file.value_columns) {
      auto it = std::find(header.begin(), header.end(), name);
      if (it == header.end()) throw Error(ErrorCode::ParseError, label + ": no column '" + name + "'");
      picked.push_back(static_cast<std::size_t>(it - header.begin()));
    }
  }

  RawPanel out;
  out.path = file.path;
  out.kind = file.kind;
  for (auto c : picked) out.columns.push_back(header[c]);

  std::vector<double> cells;
  const double scale = file.percent_scale ? 0.01 : 1.0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::ParseError, where(label, row, fields.size()) + ": expected " +
                                             std::to_string(header.size()) + " fields");
    }
    const auto period = Period::parse(fields[date_col]);
    if (!period) throw Error(ErrorCode::ParseError, where(label, row, date_col + 1) + ": bad date '" + fields[date_col] + "'");
    if (!out.dates.empty() && !(out.dates.back() < *period)) {
      throw Error(ErrorCode::NonMonotoneDates,
                  label + ": row " + std::to_string(row) + " date " + period->to_string() + " does not follow " +
                      out.dates.back().to_string());
    }
    out.dates.push_back(*period);
    for (auto c : picked) {
      const auto& cell = fields[c];
      if (is_missing(cell)) {
        cells.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      double v = 0.0;
      const char* begin = cell.data();
      const char* end = begin + cell.size();
      if (*begin == '+') ++begin;
      auto [ptr, ec] = std::from_chars(begin, end, v);
      if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
        throw Error(ErrorCode::ParseError, where(label, row, c + 1) + ": not a number '" + cell + "'");
      }
      cells.push_back(v * scale);
    }
  }
  const auto T = static_cast<Eigen::Index>(out.dates.size());
  const auto k = static_cast<Eigen::Index>(picked.size());
  out.values = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(cells.data(), T, k);
  return out;
}

RawPanel read_panel_csv(const PanelFile& file) {
  std::ifstream in(file.path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + to_string(file.kind) + " file '" + file.path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_panel_csv(buffer.str(), file, file.path);
}

JoinedPanels inner_join(std::vector<RawPanel> panels) {
  JoinedPanels out;
  if (panels.empty()) return out;
  std::set<Period> common(panels[0].dates.begin(), panels[0].dates.end());
  for (std::size_t k = 1; k < panels.size(); ++k) {
    std::set<Period> next;
    for (const auto& d : panels[k].dates) {
      if (common.count(d)) next.insert(d);
    }
    common = std::move(next);
  }
  if (common.empty()) {
    std::string names;
    for (const auto& p : panels) names += (names.empty() ? "" : ", ") + p.path;
    throw Error(ErrorCode::EmptyIntersection, "no common dates across " + names);
  }
  out.dates.assign(common.begin(), common.end());

  for (auto& p : panels) {
    std::map<Period, Eigen::Index> row_of;
    for (std::size_t t = 0; t < p.dates.size(); ++t) row_of[p.dates[t]] = static_cast<Eigen::Index>(t);
    MatrixXd rows(static_cast<Eigen::Index>(out.dates.size()), p.values.cols());
    for (std::size_t t = 0; t < out.dates.size(); ++t) rows.row(static_cast<Eigen::Index>(t)) = p.values.row(row_of[out.dates[t]]);

    std::vector<Eigen::Index> keep;
    std::vector<std::string> kept_names;
    for (Eigen::Index c = 0; c < rows.cols(); ++c) {
      if (rows.col(c).array().isNaN().any()) {
        out.warnings.push_back("dropped column '" + p.columns[static_cast<std::size_t>(c)] + "' of " + p.path +
                               ": missing values in the joined window");
      } else {
        keep.push_back(c);
        kept_names.push_back(p.columns[static_cast<std::size_t>(c)]);
      }
    }
    p.values.resize(rows.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) p.values.col(static_cast<Eigen::Index>(k)) = rows.col(keep[k]);
    p.columns = std::move(kept_names);
    p.dates = out.dates;
  }
  out.panels = std::move(panels);
  return out;
}

ReturnsPanel to_returns_panel(const RawPanel& raw) {
  ReturnsPanel out;
  out.values = raw.values;
  out.asset_ids = raw.columns;
  out.dates = raw.dates;
  return out;
}

FactorPanel to_factor_panel(const RawPanel& raw) {
  FactorPanel out;
  out.values = raw.values;
  out.names = raw.columns;
  out.provenance.resize(raw.columns.size());
  out.dates = raw.dates;
  return out;
}

}  // namespace fsfmb
