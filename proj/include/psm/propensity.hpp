#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "psm/design.hpp"
#include "psm/logit.hpp"

namespace psm {

struct ScoredRow {
  std::size_t row_id = 0;
  std::uint8_t treated = 0;
  double log_odds = 0.0;     // used for matching
  double probability = 0.0;  // logistic(log_odds), kept for plotting
};

struct PropensityScores {
  std::vector<ScoredRow> rows;
  std::vector<std::string> model_terms;

  std::size_t size() const { return rows.size(); }
  std::size_t n_treated() const;
  std::size_t n_control() const;
};

// One score per design row: the fitted linear predictor.
PropensityScores compute_scores(const FittedLogit& fit, const DesignMatrix& dm,
                                std::span<const std::uint8_t> treatment);

// Keep only the listed row ids, in the order given.
PropensityScores subset_scores(const PropensityScores& scores,
                               std::span<const std::size_t> row_ids);

}  // namespace psm
