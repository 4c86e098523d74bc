#include "psm/effect.hpp"

#include <cmath>

#include "psm/errors.hpp"

namespace psm {

double logit_to_probability(double y) {
  if (!std::isfinite(y)) throw DataError("log-odds must be finite");
  return logistic(y);
}

FittedLogit fit_outcome_model(const Dataset& matched, const ModelSpec& spec,
                              const FitOptions& options) {
  return fit_logit(encode_design_matrix(matched, spec), options);
}

EffectReport effect_summary(const FittedLogit& fit, const MatchedPairs& pairs,
                            std::string_view treatment_term) {
  const auto index = fit.term_index(treatment_term);
  if (!index)
    throw DataError("treatment term '" + std::string(treatment_term) +
                    "' is not in the outcome model");
  EffectReport r;
  r.outcome_table = wald_inference(fit);
  r.treatment_term = std::string(treatment_term);
  r.log_odds = fit.beta(static_cast<Eigen::Index>(*index));
  r.odds_ratio = std::exp(r.log_odds);
  r.transformed_probability = logit_to_probability(r.log_odds);
  r.n_pairs = pairs.pairs.size();
  r.n_matched_rows = 2 * pairs.pairs.size();
  r.n_outcome_obs = fit.n_obs;
  return r;
}

}  // namespace psm
