#include <doctest.h>

#include <set>

#include "fsfmb/error.hpp"
#include "fsfmb/factor_terms.hpp"
#include "synthetic.hpp"

using namespace fsfmb;

namespace {

const std::vector<std::string> kSix{"Mkt-RF", "SMB", "HML", "RMW", "CMA", "Mom"};

std::size_t count_if_degree(const std::vector<TermSpec>& terms, int degree, bool power) {
  std::size_t n = 0;
  for (const auto& t : terms) {
    if (t.degree() == degree && t.is_power() == power) ++n;
  }
  return n;
}

std::vector<std::string> names(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("x" + std::string(1, static_cast<char>('a' + i)));
  return out;
}

}  // namespace

TEST_CASE("six base factors at degree three give 57 terms split 6/6/15/30") {
  const auto terms = expand_terms(kSix, {ExpansionKind::Full, 3});
  CHECK(terms.size() == 57);
  CHECK(count_if_degree(terms, 2, true) == 6);
  CHECK(count_if_degree(terms, 3, true) == 6);
  CHECK(count_if_degree(terms, 2, false) == 15);
  CHECK(count_if_degree(terms, 3, false) == 30);
  CHECK(terms.size() + kSix.size() == 63);
  CHECK(expand_terms(kSix, {ExpansionKind::Full, 4}).size() + kSix.size() == 114);
}

TEST_CASE("term counts follow the combinatorial identities") {
  for (std::size_t n = 1; n <= 9; ++n) {
    const auto base = names(n);
    const std::size_t pairs = n * (n - 1) / 2;
    const std::size_t ordered = n * (n - 1);
    CHECK(expand_terms(base, {ExpansionKind::Full, 2}).size() == n + pairs);
    CHECK(expand_terms(base, {ExpansionKind::Full, 3}).size() == 2 * n + pairs + ordered);
    CHECK(expand_terms(base, {ExpansionKind::Full, 4}).size() == 3 * n + 2 * pairs + 2 * ordered);
    for (int d = 2; d <= 4; ++d) {
      const auto full = expand_terms(base, {ExpansionKind::Full, d});
      const auto powers = expand_terms(base, {ExpansionKind::PowersOnly, d});
      const auto inter = expand_terms(base, {ExpansionKind::InteractionsOnly, d});
      CHECK(powers.size() + inter.size() == full.size());
      for (const auto& t : powers) CHECK(t.is_power());
      for (const auto& t : inter) CHECK_FALSE(t.is_power());
    }
  }
}

TEST_CASE("labels are canonical and unique") {
  const auto terms = expand_terms(kSix, {ExpansionKind::Full, 4});
  std::set<std::string> labels;
  for (const auto& t : terms) labels.insert(t.label());
  CHECK(labels.size() == terms.size());

  const auto d3 = expand_terms(kSix, {ExpansionKind::Full, 3});
  CHECK(d3.front().label() == "Mkt-RF2");
  CHECK(d3[6].label() == "Mkt-RF*SMB");
  CHECK(labels.count("SMB2*Mom") == 1);
  CHECK(labels.count("Mom2*SMB") == 1);
  CHECK(labels.count("HML2*RMW2") == 1);
  CHECK(labels.count("CMA3*Mkt-RF") == 1);
  CHECK(make_term({{1, "SMB", 1}, {5, "Mom", 2}}).label() == "Mom2*SMB");
  // Degree is non-decreasing along the list.
  for (std::size_t k = 1; k < terms.size(); ++k) CHECK(terms[k - 1].degree() <= terms[k].degree());
}

TEST_CASE("unsupported degrees and empty bases are rejected") {
  for (int d : {0, 1, 5}) {
    try {
      expand_terms(kSix, {ExpansionKind::Full, d});
      FAIL("expected UnsupportedDegree");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::UnsupportedDegree);
    }
  }
  CHECK_THROWS_AS(expand_terms({}, {ExpansionKind::Full, 2}), Error);
}

TEST_CASE("materialized columns equal the raw products exactly") {
  std::mt19937_64 rng(11);
  const FactorPanel base = make_factor_panel(testing::normal_matrix(30, 3, rng), {"a", "b", "c"});
  const auto terms = expand_terms(base.names, {ExpansionKind::Full, 4});
  const FactorPanel panel = materialize(base, terms);
  REQUIRE(panel.size() == terms.size());
  for (std::size_t k = 0; k < terms.size(); ++k) {
    CHECK(panel.names[k] == terms[k].label());
    REQUIRE(panel.provenance[k].has_value());
    CHECK(*panel.provenance[k] == terms[k]);
    for (Eigen::Index t = 0; t < 30; ++t) {
      double expected = 1.0;
      for (const auto& f : terms[k].factors) {
        for (int e = 0; e < f.exponent; ++e) expected *= base.values(t, static_cast<Eigen::Index>(f.base_index));
      }
      CHECK(panel.values(t, static_cast<Eigen::Index>(k)) == expected);
    }
  }
  CHECK(panel.dates == base.dates);
}

TEST_CASE("materialize resolves terms by name") {
  std::mt19937_64 rng(12);
  const FactorPanel base = make_factor_panel(testing::normal_matrix(10, 2, rng), {"a", "b"});
  const auto terms = expand_terms({"a", "z"}, {ExpansionKind::Full, 2});
  try {
    materialize(base, terms);
    FAIL("expected UnknownBaseFactor");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownBaseFactor);
  }
  // Reordered base columns still resolve to the right series.
  const FactorPanel swapped = base.select({1, 0});
  const auto ab = expand_terms({"a", "b"}, {ExpansionKind::Full, 2});
  CHECK(materialize(swapped, ab).values == materialize(base, ab).values);
}

TEST_CASE("parse_expansion_kind") {
  CHECK(parse_expansion_kind("full") == ExpansionKind::Full);
  CHECK(parse_expansion_kind("powers") == ExpansionKind::PowersOnly);
  CHECK(parse_expansion_kind("interactions") == ExpansionKind::InteractionsOnly);
  CHECK_THROWS_AS(parse_expansion_kind("cubic"), Error);
  CHECK(to_string(ExpansionKind::InteractionsOnly) == "interactions_only");
}
