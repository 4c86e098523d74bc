#include "psm/propensity.hpp"

#include <algorithm>
#include <unordered_map>

#include "psm/errors.hpp"

namespace psm {

std::size_t PropensityScores::n_treated() const {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [](const ScoredRow& r) { return r.treated == 1; }));
}

std::size_t PropensityScores::n_control() const { return rows.size() - n_treated(); }

PropensityScores compute_scores(const FittedLogit& fit, const DesignMatrix& dm,
                                std::span<const std::uint8_t> treatment) {
  if (!fit.converged) throw NumericalError("propensity model did not converge");
  if (dm.n_rows() != treatment.size())
    throw DataError("design has " + std::to_string(dm.n_rows()) + " rows but treatment has " +
                    std::to_string(treatment.size()) + " entries");
  if (dm.n_cols() != static_cast<std::size_t>(fit.beta.size()))
    throw DataError("design has " + std::to_string(dm.n_cols()) + " columns, model has " +
                    std::to_string(fit.beta.size()) + " coefficients");
  PropensityScores out;
  out.model_terms = fit.term_names;
  out.rows.reserve(dm.n_rows());
  for (std::size_t i = 0; i < dm.n_rows(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const double eta = predict_linear(fit, dm.x.row(r));
    if (treatment[i] > 1) throw DataError("treatment flags must be 0/1");
    out.rows.push_back({dm.row_ids[i], treatment[i], eta, logistic(eta)});
  }
  return out;
}

PropensityScores subset_scores(const PropensityScores& scores,
                               std::span<const std::size_t> row_ids) {
  std::unordered_map<std::size_t, std::size_t> index;
  index.reserve(scores.rows.size());
  for (std::size_t i = 0; i < scores.rows.size(); ++i) index.emplace(scores.rows[i].row_id, i);
  PropensityScores out;
  out.model_terms = scores.model_terms;
  out.rows.reserve(row_ids.size());
  for (auto id : row_ids) {
    auto it = index.find(id);
    if (it == index.end()) throw DataError("no score for row id " + std::to_string(id));
    out.rows.push_back(scores.rows[it->second]);
  }
  return out;
}

}  // namespace psm
