#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "psm/dataset.hpp"
#include "psm/propensity.hpp"

namespace psm {

enum class MatchOrder {
  DescendingScore,  // highest-score treated units pick first
  AscendingScore,
  RowOrder,
};

MatchOrder parse_match_order(std::string_view text);  // "desc" | "asc" | "row"
std::string_view to_string(MatchOrder order);

struct MatchOptions {
  MatchOrder order = MatchOrder::DescendingScore;
  // Fixed configuration: one control per treated unit, no reuse. Ties in
  // distance go to the lower control row id; ties in processing order go
  // to the lower treated row id.
  static constexpr int ratio = 1;
  static constexpr bool replacement = false;
};

struct MatchedPair {
  std::size_t treated_id = 0;
  std::size_t control_id = 0;
  double distance = 0.0;  // |log-odds difference|

  friend bool operator==(const MatchedPair&, const MatchedPair&) = default;
};

struct MatchedPairs {
  std::vector<MatchedPair> pairs;  // in the order they were formed
  std::vector<std::size_t> unmatched_controls;  // ascending row id
  std::vector<std::size_t> unmatched_treated;   // ascending row id

  // Row ids of every matched unit, ascending.
  std::vector<std::size_t> matched_row_ids() const;

  friend bool operator==(const MatchedPairs&, const MatchedPairs&) = default;
};

// Treated rows in the order the greedy matcher visits them.
std::vector<std::size_t> treated_visit_order(const PropensityScores& scores, MatchOrder order);

// Greedy 1:1 nearest-neighbour matching without replacement on the
// log-odds score. Throws DataError when either group is empty.
MatchedPairs match_nearest(const PropensityScores& scores, const MatchOptions& opts = {});

// Rows of `d` that appear in a pair, in ascending row-id order.
Dataset matched_dataset(const Dataset& d, const MatchedPairs& pairs);

// Checks pairs read from outside: ids exist in `d`, are used once, and the
// treated/control roles agree with the binary treatment column.
void validate_pairs(const Dataset& d, std::string_view treatment_column, const MatchedPairs& pairs);

enum class MatchGroup { MatchedTreated, MatchedControl, UnmatchedControl, UnmatchedTreated };

std::string_view to_string(MatchGroup group);

struct JitterPoint {
  std::size_t row_id = 0;
  MatchGroup group = MatchGroup::MatchedTreated;
  double score = 0.0;  // probability scale
};

// One point per scored row, labelled by its matching outcome.
std::vector<JitterPoint> jitter_points(const PropensityScores& scores, const MatchedPairs& pairs);

}  // namespace psm
