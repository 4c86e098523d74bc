#pragma once

// Shared fixtures and independent oracles for the unit and acceptance
// suites. Nothing here calls into the code paths it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "psm/dataset.hpp"
#include "psm/matcher.hpp"
#include "psm/propensity.hpp"
#include "psm/study.hpp"

namespace psm::testing {

inline std::filesystem::path data_dir() { return PSM_DATA_DIR; }
inline std::filesystem::path smokeban_csv() { return data_dir() / "SmokeBan.csv"; }

inline LoadReport load_text(const std::string& text, const Schema& schema) {
  std::istringstream in(text);
  return load_csv(in, schema);
}

// SmokeBan data loaded and recoded once per process.
struct SmokeBan {
  StudySpec spec = smokeban_study();
  LoadReport load;
  Dataset prepared;

  static const SmokeBan& get() {
    static const SmokeBan instance = [] {
      SmokeBan s;
      s.load = load_study_data(smokeban_csv(), s.spec);
      s.prepared = prepare_dataset(s.load.dataset, s.spec);
      return s;
    }();
    return instance;
  }
};

// Greedy matching replayed by exhaustive scan: visit treated units in the
// requested order, and for each scan every unused control for the
// smallest |difference|, ties to the lowest control row id.
inline MatchedPairs greedy_oracle(const PropensityScores& scores, MatchOrder order) {
  std::vector<ScoredRow> treated, controls;
  for (const auto& r : scores.rows) (r.treated ? treated : controls).push_back(r);
  std::stable_sort(treated.begin(), treated.end(), [&](const ScoredRow& a, const ScoredRow& b) {
    switch (order) {
      case MatchOrder::DescendingScore:
        return a.log_odds > b.log_odds || (a.log_odds == b.log_odds && a.row_id < b.row_id);
      case MatchOrder::AscendingScore:
        return a.log_odds < b.log_odds || (a.log_odds == b.log_odds && a.row_id < b.row_id);
      case MatchOrder::RowOrder:
        return a.row_id < b.row_id;
    }
    return false;
  });
  std::vector<bool> used(controls.size(), false);
  MatchedPairs out;
  for (const auto& t : treated) {
    std::size_t best = controls.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < controls.size(); ++j) {
      if (used[j]) continue;
      const double d = std::abs(t.log_odds - controls[j].log_odds);
      if (best == controls.size() || d < best_d ||
          (d == best_d && controls[j].row_id < controls[best].row_id)) {
        best = j;
        best_d = d;
      }
    }
    if (best == controls.size()) {
      out.unmatched_treated.push_back(t.row_id);
      continue;
    }
    used[best] = true;
    out.pairs.push_back({t.row_id, controls[best].row_id, best_d});
  }
  for (std::size_t j = 0; j < controls.size(); ++j)
    if (!used[j]) out.unmatched_controls.push_back(controls[j].row_id);
  std::sort(out.unmatched_controls.begin(), out.unmatched_controls.end());
  std::sort(out.unmatched_treated.begin(), out.unmatched_treated.end());
  return out;
}

// Random scored rows. With `discrete` the scores come from a handful of
// integers so exact ties are frequent.
inline PropensityScores random_scores(std::mt19937_64& rng, std::size_t n_treated,
                                      std::size_t n_control, bool discrete) {
  std::normal_distribution<double> normal(0.0, 1.5);
  std::uniform_int_distribution<int> small(-3, 3);
  std::vector<std::size_t> ids(n_treated + n_control);
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i * 3 + 1;
  std::shuffle(ids.begin(), ids.end(), rng);
  PropensityScores s;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const double eta = discrete ? static_cast<double>(small(rng)) * 0.5 : normal(rng);
    s.rows.push_back({ids[i], static_cast<std::uint8_t>(i < n_treated ? 1 : 0), eta,
                      1.0 / (1.0 + std::exp(-eta))});
  }
  std::shuffle(s.rows.begin(), s.rows.end(), rng);
  return s;
}

// Sample mean and n-1 variance, for SMD oracles.
inline std::pair<double, double> mean_var(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, ss / static_cast<double>(v.size() - 1)};
}

}  // namespace psm::testing
