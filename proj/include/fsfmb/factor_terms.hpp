#pragma once

#include <string>
#include <vector>

#include "fsfmb/panel.hpp"
#include "fsfmb/term.hpp"

namespace fsfmb {

enum class ExpansionKind { Full, PowersOnly, InteractionsOnly };

/// Which higher-order terms to generate, up to `max_degree` (2, 3 or 4).
struct ExpansionMode {
  ExpansionKind kind = ExpansionKind::Full;
  int max_degree = 3;
};

std::string to_string(ExpansionKind kind);
ExpansionKind parse_expansion_kind(const std::string& text);

/// Candidate higher-order terms over `base_names`, ordered by degree and
/// then by the canonical within-degree order:
///   degree 2: f_i^2, then f_i*f_j (i<j)
///   degree 3: f_i^3, then f_i^2*f_j (ordered pairs, i != j)
///   degree 4: f_i^4, then f_i^2*f_j^2 (i<j), then f_i^3*f_j (ordered pairs)
/// Throws UnsupportedDegree outside {2,3,4}.
std::vector<TermSpec> expand_terms(const std::vector<std::string>& base_names, const ExpansionMode& mode);

/// Raw pointwise products of raw base factor values, one column per term.
/// Terms are resolved by base-factor name; throws UnknownBaseFactor.
FactorPanel materialize(const FactorPanel& base, const std::vector<TermSpec>& terms);

/// Value of a term at one period, multiplying base values exponent-by-exponent.
double evaluate_term(const TermSpec& term, const Eigen::Ref<const Eigen::RowVectorXd>& base_row,
                     const std::vector<std::size_t>& columns);

}  // namespace fsfmb
