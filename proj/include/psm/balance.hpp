#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "psm/dataset.hpp"
#include "psm/design.hpp"
#include "psm/propensity.hpp"

namespace psm {

struct SmdResult {
  double value = 0.0;
  double pooled_sd = 0.0;
  bool degenerate = false;  // undefined: a singleton group, or zero spread with unequal means
};

// (mean_treated - mean_control) / sqrt((s_t^2 + s_c^2) / 2) with sample
// variances. A zero denominator yields 0 when the means agree and a
// degenerate result otherwise. Throws DataError if a group is empty.
SmdResult smd(std::span<const double> values, std::span<const std::uint8_t> group);

// Same difference of means over a caller-supplied standardizer.
SmdResult smd(std::span<const double> values, std::span<const std::uint8_t> group,
              double pooled_sd);

enum class SmdDenominator {
  StageSpecific,  // each stage uses its own group variances
  PreMatching,    // both stages use the before-matching pooled sd
};

struct BalanceOptions {
  SmdDenominator denominator = SmdDenominator::StageSpecific;
  double threshold = 0.1;
};

struct GroupSizes {
  std::size_t treated = 0;
  std::size_t control = 0;
};

struct BalanceEntry {
  std::string indicator;
  SmdResult before;
  SmdResult after;
  bool constant = false;  // no variation in the before-matching data

  bool degenerate() const { return constant || before.degenerate || after.degenerate; }
};

struct BalanceReport {
  std::vector<BalanceEntry> entries;
  GroupSizes before_sizes;
  GroupSizes after_sizes;
  double threshold = 0.1;
  // Aggregates over non-degenerate entries only.
  double max_abs_before = 0.0;
  double max_abs_after = 0.0;
  double mean_abs_before = 0.0;
  double mean_abs_after = 0.0;

  bool balanced() const { return max_abs_after < threshold; }
};

// Covariate balance of the propensity model's terms; the response of
// `spec` is the treatment column. Numeric terms are compared as-is, and
// each categorical term contributes one 0/1 indicator per level,
// reference level included.
BalanceReport balance_report(const Dataset& before, const Dataset& after, const ModelSpec& spec,
                             const BalanceOptions& options = {});

enum class ScoreScale { LogOdds, Probability };

struct HistogramData {
  std::string stage;
  std::vector<double> edges;  // bins + 1 shared edges
  std::vector<std::size_t> treated_counts;
  std::vector<std::size_t> control_counts;
  bool degenerate = false;  // every score identical: a single zero-width bin

  std::size_t bins() const { return treated_counts.size(); }
  // Half the L1 distance between the two groups' bin proportions.
  double total_variation() const;
};

// Equal-width bins over [min, max] of all scores; the top edge is closed.
HistogramData histogram_backtoback(const PropensityScores& scores, std::string stage,
                                   std::size_t bins = 20,
                                   ScoreScale scale = ScoreScale::Probability);

}  // namespace psm
