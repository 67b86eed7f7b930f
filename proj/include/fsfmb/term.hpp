#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace fsfmb {

/// One multiplicand of a higher-order term: a base factor raised to a
/// positive integer power.
struct TermFactor {
  std::size_t base_index = 0;  // column in the base panel
  std::string name;
  int exponent = 1;

  bool operator==(const TermFactor&) const = default;
};

/// Symbolic higher-order term, e.g. SMB2*Mom = SMB^2 * Mom.
///
/// `factors` is kept in canonical order (descending exponent, ties by base
/// column order) and holds at most two distinct base factors.
struct TermSpec {
  std::vector<TermFactor> factors;

  int degree() const;
  std::string label() const;
  bool is_power() const { return factors.size() == 1; }

  bool operator==(const TermSpec&) const = default;
};

/// Builds a term from (base_index, name, exponent) parts and puts it in
/// canonical order.
TermSpec make_term(std::vector<TermFactor> parts);

}  // namespace fsfmb
