#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fsfmb/debias.hpp"
#include "fsfmb/evaluation.hpp"
#include "fsfmb/selection.hpp"

namespace fsfmb {

using Json = nlohmann::ordered_json;

/// Library version string, e.g. "0.1.0".
std::string version();

// Doubles are written with the shortest representation that round-trips.
// Non-finite values become the strings "NaN", "Infinity" and "-Infinity".
Json num(double v);
double num_from(const Json& j);
Json vec(const VectorXd& v);
VectorXd vec_from(const Json& j);

/// Loadings on a chosen factor set with cross-sectional HAC t-statistics.
struct EstimateSummary {
  std::vector<std::string> factors;
  IndexSet indices;
  VectorXd psi;
  VectorXd psi_t;
  VectorXd gamma;  // risk premia Sigma_S psi_S
  std::optional<double> alpha;
  std::optional<double> alpha_t;
  double r2 = 0.0;
  double adj_r2 = 0.0;
  double equivalence_gap = 0.0;
  bool gram_singular = false;
  bool collinear = false;
};

Json to_json(const SelectionResult& r);
Json to_json(const EstimateSummary& r);
Json to_json(const DebiasedLoading& r);
Json to_json(const DebiasRun& r);
Json to_json(const CvReport& r);
Json to_json(const OosReport& r);
Json to_json(const RestrictedFitReport& r);
Json to_json(const ZooCullReport& r);
Json to_json(const SpanningReport& r);
Json to_json(const SimulationReport& r);
Json to_json(const MacroReport& r);

template <typename T>
T from_json(const Json& j);

template <> SelectionResult from_json<SelectionResult>(const Json& j);
template <> EstimateSummary from_json<EstimateSummary>(const Json& j);
template <> DebiasedLoading from_json<DebiasedLoading>(const Json& j);
template <> DebiasRun from_json<DebiasRun>(const Json& j);
template <> CvReport from_json<CvReport>(const Json& j);
template <> OosReport from_json<OosReport>(const Json& j);
template <> RestrictedFitReport from_json<RestrictedFitReport>(const Json& j);
template <> ZooCullReport from_json<ZooCullReport>(const Json& j);
template <> SpanningReport from_json<SpanningReport>(const Json& j);
template <> SimulationReport from_json<SimulationReport>(const Json& j);
template <> MacroReport from_json<MacroReport>(const Json& j);

/// Pretty-printed JSON with a trailing newline.
std::string dump(const Json& j);

/// A rectangular text table written as CSV.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string to_csv() const;
};

/// Shortest round-trip decimal form ("NaN", "Inf", "-Inf" when non-finite).
std::string format_double(double v);

/// Equal-width histogram over [lo, hi) with under/overflow rows.
Table histogram(const std::vector<double>& values, double lo, double hi, double width,
                const std::string& group = {}, const std::string& group_value = {});

/// Lowercase hex SHA-256 of a file's bytes. Throws Io.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_hex(const std::string& bytes);

/// Writes `contents` to `path` (creating parent directories). Throws Io.
void write_text(const std::filesystem::path& path, const std::string& contents);

}  // namespace fsfmb
