#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fsfmb/panel.hpp"
#include "fsfmb/regression.hpp"

namespace fsfmb {

enum class Objective { R2, AdjR2 };

std::string to_string(Objective objective);
Objective parse_objective(const std::string& text);

/// When forward selection stops.
///
/// FixedCount adds exactly `count` terms (fewer only if candidates run out).
/// MinGain stops as soon as the best candidate improves the `on` measure by
/// no more than `epsilon`; `max_steps` optionally caps the number of additions.
struct StopRule {
  enum class Kind { FixedCount, MinGain };

  Kind kind = Kind::MinGain;
  std::size_t count = 0;
  double epsilon = 0.01;
  Objective on = Objective::AdjR2;
  std::optional<std::size_t> max_steps;

  static StopRule fixed_count(std::size_t s) {
    StopRule r;
    r.kind = Kind::FixedCount;
    r.count = s;
    return r;
  }
  static StopRule min_gain(double eps, Objective on = Objective::AdjR2, std::optional<std::size_t> cap = {}) {
    StopRule r;
    r.kind = Kind::MinGain;
    r.epsilon = eps;
    r.on = on;
    r.max_steps = cap;
    return r;
  }
};

/// How candidate fits are evaluated within a round.
enum class ScanMethod {
  Refit,        // full least-squares refit per candidate
  Incremental,  // Gram-Schmidt update of the current fit
};

struct ObjectiveConfig {
  Objective objective = Objective::AdjR2;
  bool with_intercept = true;
  HacSpec hac = HacSpec::rule();
  ScanMethod scan = ScanMethod::Refit;
  std::size_t threads = 1;
};

struct SelectionStep {
  std::size_t index = 0;
  double r2 = 0.0;
  double adj_r2 = 0.0;
  std::optional<double> alpha;
  std::optional<double> alpha_t;

  bool operator==(const SelectionStep&) const = default;
};

struct SelectionResult {
  IndexSet base_set;
  double base_r2 = 0.0;
  double base_adj_r2 = 0.0;
  std::vector<SelectionStep> steps;
  IndexSet final_set;

  IndexSet added() const;
  bool operator==(const SelectionResult&) const = default;
};

/// Greedy forward selection of columns of `columns` (N x p) that best
/// explain `target` (length N), starting from `base`.
SelectionResult greedy_select(const VectorXd& target, const MatrixXd& columns, const IndexSet& base,
                              const IndexSet& candidates, const StopRule& stop, bool with_intercept,
                              Objective objective, ScanMethod scan = ScanMethod::Refit, std::size_t threads = 1);

/// Forward-selection Fama-MacBeth: the second-pass regression of average
/// returns on factor covariances is the fit being maximized.
SelectionResult fs_fmb(const ReturnsPanel& returns, const FactorPanel& factors, const IndexSet& base_set,
                       const IndexSet& candidates, const StopRule& stop, const ObjectiveConfig& config = {});

/// Same greedy on an arbitrary target and column pool, no intercept, R^2
/// objective.
SelectionResult fs_generic(const VectorXd& target, const MatrixXd& candidate_columns, const IndexSet& seed_set,
                           const IndexSet& candidates, const StopRule& stop, ScanMethod scan = ScanMethod::Refit);

}  // namespace fsfmb
