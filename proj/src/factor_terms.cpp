#include "fsfmb/factor_terms.hpp"

#include <algorithm>

#include "fsfmb/error.hpp"

namespace fsfmb {

int TermSpec::degree() const {
  int d = 0;
  for (const auto& f : factors) d += f.exponent;
  return d;
}

std::string TermSpec::label() const {
  std::string out;
  for (std::size_t k = 0; k < factors.size(); ++k) {
    if (k > 0) out += '*';
    out += factors[k].name;
    if (factors[k].exponent > 1) out += std::to_string(factors[k].exponent);
  }
  return out;
}

TermSpec make_term(std::vector<TermFactor> parts) {
  std::stable_sort(parts.begin(), parts.end(), [](const TermFactor& a, const TermFactor& b) {
    if (a.exponent != b.exponent) return a.exponent > b.exponent;
    return a.base_index < b.base_index;
  });
  return TermSpec{std::move(parts)};
}

std::string to_string(ExpansionKind kind) {
  switch (kind) {
    case ExpansionKind::Full: return "full";
    case ExpansionKind::PowersOnly: return "powers_only";
    case ExpansionKind::InteractionsOnly: return "interactions_only";
  }
  return "full";
}

ExpansionKind parse_expansion_kind(const std::string& text) {
  if (text == "full") return ExpansionKind::Full;
  if (text == "powers_only" || text == "powers") return ExpansionKind::PowersOnly;
  if (text == "interactions_only" || text == "interactions") return ExpansionKind::InteractionsOnly;
  throw Error(ErrorCode::Config, "unknown expansion mode '" + text + "'");
}

std::vector<TermSpec> expand_terms(const std::vector<std::string>& base_names, const ExpansionMode& mode) {
  if (mode.max_degree < 2 || mode.max_degree > 4) {
    throw Error(ErrorCode::UnsupportedDegree, "max_degree must be 2, 3 or 4, got " + std::to_string(mode.max_degree));
  }
  if (base_names.empty()) throw Error(ErrorCode::UnsupportedDegree, "no base factors");

  const std::size_t k = base_names.size();
  const bool powers = mode.kind != ExpansionKind::InteractionsOnly;
  const bool interactions = mode.kind != ExpansionKind::PowersOnly;

  auto part = [&](std::size_t i, int e) { return TermFactor{i, base_names[i], e}; };
  std::vector<TermSpec> out;

  for (int degree = 2; degree <= mode.max_degree; ++degree) {
    if (powers) {
      for (std::size_t i = 0; i < k; ++i) out.push_back(make_term({part(i, degree)}));
    }
    if (!interactions) continue;
    switch (degree) {
      case 2:
        for (std::size_t i = 0; i < k; ++i)
          for (std::size_t j = i + 1; j < k; ++j) out.push_back(make_term({part(i, 1), part(j, 1)}));
        break;
      case 3:
        for (std::size_t i = 0; i < k; ++i)
          for (std::size_t j = 0; j < k; ++j)
            if (i != j) out.push_back(make_term({part(i, 2), part(j, 1)}));
        break;
      case 4:
        for (std::size_t i = 0; i < k; ++i)
          for (std::size_t j = i + 1; j < k; ++j) out.push_back(make_term({part(i, 2), part(j, 2)}));
        for (std::size_t i = 0; i < k; ++i)
          for (std::size_t j = 0; j < k; ++j)
            if (i != j) out.push_back(make_term({part(i, 3), part(j, 1)}));
        break;
    }
  }
  return out;
}

double evaluate_term(const TermSpec& term, const Eigen::Ref<const Eigen::RowVectorXd>& base_row,
                     const std::vector<std::size_t>& columns) {
  double value = 1.0;
  for (std::size_t k = 0; k < term.factors.size(); ++k) {
    const double x = base_row(static_cast<Eigen::Index>(columns[k]));
    for (int e = 0; e < term.factors[k].exponent; ++e) value *= x;
  }
  return value;
}

FactorPanel materialize(const FactorPanel& base, const std::vector<TermSpec>& terms) {
  if (!base.values.allFinite()) throw Error(ErrorCode::NonFiniteInput, "base factor panel");

  std::vector<std::vector<std::size_t>> columns;
  columns.reserve(terms.size());
  for (const auto& term : terms) {
    std::vector<std::size_t> cols;
    for (const auto& f : term.factors) {
      auto idx = base.index_of(f.name);
      if (!idx) throw Error(ErrorCode::UnknownBaseFactor, "term " + term.label() + " references '" + f.name + "'");
      cols.push_back(*idx);
    }
    columns.push_back(std::move(cols));
  }

  FactorPanel out;
  out.dates = base.dates;
  out.values.resize(base.values.rows(), static_cast<Eigen::Index>(terms.size()));
  for (std::size_t c = 0; c < terms.size(); ++c) {
    for (Eigen::Index t = 0; t < base.values.rows(); ++t) {
      out.values(t, static_cast<Eigen::Index>(c)) = evaluate_term(terms[c], base.values.row(t), columns[c]);
    }
    out.names.push_back(terms[c].label());
    out.provenance.emplace_back(terms[c]);
  }
  return out;
}

}  // namespace fsfmb
