#pragma once

#include <string>
#include <vector>

#include "fsfmb/panel.hpp"

namespace fsfmb {

enum class PanelKind { Returns, Factors, Zoo, Macro, RegimeMask };

std::string to_string(PanelKind kind);

/// One CSV input: a date column plus numeric value columns.
struct PanelFile {
  std::string path;
  PanelKind kind = PanelKind::Returns;
  std::string date_column = "date";
  std::vector<std::string> value_columns;  // empty: every non-date column
  bool percent_scale = false;              // divide values by 100 on load
};

/// A parsed file before alignment. Missing cells are NaN.
struct RawPanel {
  std::string path;
  PanelKind kind = PanelKind::Returns;
  std::vector<Period> dates;
  std::vector<std::string> columns;
  MatrixXd values;
};

/// Splits one CSV record (RFC 4180 quoting).
std::vector<std::string> split_csv_line(const std::string& line);

/// Reads a panel file. Throws Io (missing/unreadable file), ParseError
/// (with 1-based row and column), NonMonotoneDates.
RawPanel read_panel_csv(const PanelFile& file);
/// Same, from in-memory text; `label` names the source in messages.
RawPanel parse_panel_csv(const std::string& text, const PanelFile& file, const std::string& label);

struct JoinedPanels {
  std::vector<Period> dates;
  std::vector<RawPanel> panels;        // rows restricted to `dates`, incomplete columns dropped
  std::vector<std::string> warnings;
};

/// Inner join on dates. Columns with any missing value inside the joined
/// window are dropped with a warning. Throws EmptyIntersection.
JoinedPanels inner_join(std::vector<RawPanel> panels);

ReturnsPanel to_returns_panel(const RawPanel& raw);
FactorPanel to_factor_panel(const RawPanel& raw);

}  // namespace fsfmb
