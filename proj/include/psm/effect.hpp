#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "psm/dataset.hpp"
#include "psm/design.hpp"
#include "psm/logit.hpp"
#include "psm/matcher.hpp"

namespace psm {

// e^y / (1 + e^y) for finite y; throws DataError otherwise.
double logit_to_probability(double y);

// Outcome logistic regression restricted to the matched rows.
FittedLogit fit_outcome_model(const Dataset& matched, const ModelSpec& spec,
                              const FitOptions& options = {});

struct EffectReport {
  InferenceTable outcome_table;
  std::string treatment_term;
  double log_odds = 0.0;
  double odds_ratio = 0.0;
  // logit_to_probability(log_odds). This is the logistic transform of the
  // lone treatment coefficient, not a marginal effect or risk difference.
  double transformed_probability = 0.0;
  std::size_t n_pairs = 0;
  std::size_t n_matched_rows = 0;
  std::size_t n_outcome_obs = 0;
};

EffectReport effect_summary(const FittedLogit& fit, const MatchedPairs& pairs,
                            std::string_view treatment_term);

}  // namespace psm
