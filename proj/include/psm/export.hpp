#pragma once

#include <filesystem>
#include <istream>
#include <json.hpp>
#include <ostream>
#include <string>
#include <vector>

#include "psm/balance.hpp"
#include "psm/dataset.hpp"
#include "psm/effect.hpp"
#include "psm/logit.hpp"
#include "psm/matcher.hpp"
#include "psm/propensity.hpp"
#include "psm/study.hpp"

namespace psm::io {

// Shortest decimal text that round-trips to the same double.
std::string format_double(double v);

// term,estimate,se,z,p,ci_lo,ci_hi  (z and p empty for flagged terms)
void write_inference_csv(std::ostream& os, const InferenceTable& table);
nlohmann::ordered_json inference_json(const InferenceTable& table);

// row_id,treatment,score_logodds,score_prob
void write_scores_csv(std::ostream& os, const PropensityScores& scores);

// treated_id,control_id,distance
void write_pairs_csv(std::ostream& os, const MatchedPairs& pairs);
// Reads the pairs file written above. Unmatched sets are left empty.
MatchedPairs read_pairs_csv(std::istream& in);

// row_id,group,score
void write_jitter_csv(std::ostream& os, const std::vector<JitterPoint>& points);

// indicator,smd_before,smd_after  (empty cell where degenerate)
void write_love_plot_csv(std::ostream& os, const BalanceReport& report);
nlohmann::ordered_json balance_json(const BalanceReport& report);

// stage,bin_lo,bin_hi,treated_count,control_count
void write_histogram_csv(std::ostream& os, const std::vector<HistogramData>& histograms);

nlohmann::ordered_json summary_json(const std::vector<ColumnSummary>& summary,
                                    const LoadReport& load);
nlohmann::ordered_json effect_json(const EffectReport& report);

// Writes every artifact of a pipeline run into `dir` (created if needed):
// summary.json, propensity.csv, propensity.json, scores.csv, pairs.csv,
// jitter.csv, love_plot.csv, balance.json, histogram.csv, outcome.csv,
// effect.json and the resolved study.spec.
void write_pipeline_artifacts(const std::filesystem::path& dir, const PipelineResult& result,
                              const StudySpec& spec);

}  // namespace psm::io
