#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "psm/balance.hpp"
#include "psm/dataset.hpp"
#include "psm/design.hpp"
#include "psm/effect.hpp"
#include "psm/logit.hpp"
#include "psm/matcher.hpp"
#include "psm/propensity.hpp"

namespace psm {

// Everything needed to run one matching study on a CSV file.
//
// Spec files are line-oriented `key = value` text; `#` starts a comment.
//
//   treatment      = ban
//   treated_level  = no            # omit if the column is already 0/1
//   outcome        = smoker
//   outcome_level  = yes           # omit if the column is already 0/1
//   term           = education categorical college
//   term           = age numeric
//   levels.education = college, hs, hs drop out, master, some college
//   order          = desc          # desc | asc | row
//   bins           = 20
//   balance_threshold = 0.1
//   smd_denominator   = stage      # stage | pre
//
// `term` may repeat; its order is the design-matrix order. For categorical
// terms everything after the kind is the reference level.
struct StudySpec {
  std::string treatment;
  std::string treated_level;
  std::string outcome;
  std::string outcome_level;
  std::vector<Term> covariates;
  MatchOrder order = MatchOrder::DescendingScore;
  std::size_t bins = 20;
  BalanceOptions balance;

  Schema schema() const;
  // response = treatment, terms = covariates.
  ModelSpec propensity_model() const;
  // response = outcome, terms = treatment followed by the covariates.
  ModelSpec outcome_model() const;
};

StudySpec parse_study_spec(std::istream& in);
StudySpec load_study_spec(const std::filesystem::path& path);

// Serialize back to the spec-file format.
std::string format_study_spec(const StudySpec& spec);

// Treatment ban == "no", outcome smoker == "yes"; covariates education
// (ref college), afam (ref no), hispanic (ref no), gender (ref female), age.
StudySpec smokeban_study();

// Loads `path` against the spec's schema.
LoadReport load_study_data(const std::filesystem::path& path, const StudySpec& spec);

// Recode treatment and outcome to 0/1 where levels are given.
Dataset prepare_dataset(const Dataset& raw, const StudySpec& spec);

struct PropensityStage {
  DesignMatrix design;
  FittedLogit fit;
  PropensityScores scores;
};

PropensityStage estimate_propensity(const Dataset& prepared, const StudySpec& spec);

struct PipelineResult {
  LoadReport load;
  Dataset prepared;
  std::vector<ColumnSummary> summary;
  PropensityStage propensity;
  InferenceTable propensity_table;
  MatchedPairs pairs;
  Dataset matched;
  BalanceReport balance;
  HistogramData histogram_before;
  HistogramData histogram_after;
  FittedLogit outcome_fit;
  EffectReport effect;
};

PipelineResult run_pipeline(const std::filesystem::path& csv_path, const StudySpec& spec);

}  // namespace psm
