#include "psm/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "psm/errors.hpp"

namespace psm {

MatchOrder parse_match_order(std::string_view text) {
  if (text == "desc") return MatchOrder::DescendingScore;
  if (text == "asc") return MatchOrder::AscendingScore;
  if (text == "row") return MatchOrder::RowOrder;
  throw DataError("unknown match order '" + std::string(text) + "' (expected desc, asc or row)");
}

std::string_view to_string(MatchOrder order) {
  switch (order) {
    case MatchOrder::DescendingScore: return "desc";
    case MatchOrder::AscendingScore: return "asc";
    case MatchOrder::RowOrder: return "row";
  }
  return "unknown";
}

std::string_view to_string(MatchGroup group) {
  switch (group) {
    case MatchGroup::MatchedTreated: return "matched-treated";
    case MatchGroup::MatchedControl: return "matched-control";
    case MatchGroup::UnmatchedControl: return "unmatched-control";
    case MatchGroup::UnmatchedTreated: return "unmatched-treated";
  }
  return "unknown";
}

std::vector<std::size_t> MatchedPairs::matched_row_ids() const {
  std::vector<std::size_t> ids;
  ids.reserve(2 * pairs.size());
  for (const auto& p : pairs) {
    ids.push_back(p.treated_id);
    ids.push_back(p.control_id);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<std::size_t> treated_visit_order(const PropensityScores& scores, MatchOrder order) {
  std::vector<const ScoredRow*> treated;
  for (const auto& r : scores.rows) {
    if (r.treated) treated.push_back(&r);
  }
  auto by_id = [](const ScoredRow* a, const ScoredRow* b) { return a->row_id < b->row_id; };
  switch (order) {
    case MatchOrder::DescendingScore:
      std::sort(treated.begin(), treated.end(), [&](const ScoredRow* a, const ScoredRow* b) {
        if (a->log_odds != b->log_odds) return a->log_odds > b->log_odds;
        return by_id(a, b);
      });
      break;
    case MatchOrder::AscendingScore:
      std::sort(treated.begin(), treated.end(), [&](const ScoredRow* a, const ScoredRow* b) {
        if (a->log_odds != b->log_odds) return a->log_odds < b->log_odds;
        return by_id(a, b);
      });
      break;
    case MatchOrder::RowOrder:
      std::sort(treated.begin(), treated.end(), by_id);
      break;
  }
  std::vector<std::size_t> ids;
  ids.reserve(treated.size());
  for (const auto* r : treated) ids.push_back(r->row_id);
  return ids;
}

MatchedPairs match_nearest(const PropensityScores& scores, const MatchOptions& opts) {
  using Pool = std::set<std::pair<double, std::size_t>>;
  Pool pool;
  std::unordered_map<std::size_t, double> treated_score;
  for (const auto& r : scores.rows) {
    if (!std::isfinite(r.log_odds))
      throw DataError("non-finite score for row " + std::to_string(r.row_id));
    if (r.treated)
      treated_score.emplace(r.row_id, r.log_odds);
    else
      pool.emplace(r.log_odds, r.row_id);
  }
  if (treated_score.empty()) throw DataError("no treated rows to match");
  if (pool.empty()) throw DataError("no control rows to match against");

  MatchedPairs out;
  out.pairs.reserve(std::min(treated_score.size(), pool.size()));
  for (auto treated_id : treated_visit_order(scores, opts.order)) {
    if (pool.empty()) {
      out.unmatched_treated.push_back(treated_id);
      continue;
    }
    const double s = treated_score.at(treated_id);
    Pool::iterator best = pool.end();
    double best_distance = std::numeric_limits<double>::infinity();
    auto consider = [&](Pool::iterator it, double d) {
      if (d < best_distance || (d == best_distance && it->second < best->second)) {
        best = it;
        best_distance = d;
      }
    };
    // Distance is monotone on each side of s, so equal-distance candidates
    // are contiguous runs starting at the two neighbours of s.
    const auto right = pool.lower_bound({s, 0});
    if (right != pool.end()) {
      const double d0 = std::abs(s - right->first);
      for (auto it = right; it != pool.end() && std::abs(s - it->first) == d0; ++it)
        consider(it, d0);
    }
    if (right != pool.begin()) {
      auto it = std::prev(right);
      const double d0 = std::abs(s - it->first);
      while (true) {
        if (std::abs(s - it->first) != d0) break;
        consider(it, d0);
        if (it == pool.begin()) break;
        --it;
      }
    }
    out.pairs.push_back({treated_id, best->second, best_distance});
    pool.erase(best);
  }
  out.unmatched_controls.reserve(pool.size());
  for (const auto& [score, id] : pool) out.unmatched_controls.push_back(id);
  std::sort(out.unmatched_controls.begin(), out.unmatched_controls.end());
  std::sort(out.unmatched_treated.begin(), out.unmatched_treated.end());
  return out;
}

Dataset matched_dataset(const Dataset& d, const MatchedPairs& pairs) {
  const auto ids = pairs.matched_row_ids();
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
    throw DataError("a row id appears in more than one pair");
  return d.select_rows(ids);
}

void validate_pairs(const Dataset& d, std::string_view treatment_column,
                    const MatchedPairs& pairs) {
  const auto& flags = d.column(treatment_column).as_binary().values;
  std::unordered_set<std::size_t> seen;
  auto check = [&](std::size_t id, std::uint8_t expected) {
    const auto pos = d.index_of(id);
    if (!pos) throw DataError("pair references unknown row id " + std::to_string(id));
    if (flags[*pos] != expected)
      throw DataError("row " + std::to_string(id) + " is listed as " +
                      (expected ? "treated" : "control") + " but has the opposite treatment");
    if (!seen.insert(id).second)
      throw DataError("row id " + std::to_string(id) + " appears in more than one pair");
  };
  for (const auto& p : pairs.pairs) {
    check(p.treated_id, 1);
    check(p.control_id, 0);
  }
}

std::vector<JitterPoint> jitter_points(const PropensityScores& scores, const MatchedPairs& pairs) {
  std::unordered_set<std::size_t> matched_treated, matched_control;
  for (const auto& p : pairs.pairs) {
    matched_treated.insert(p.treated_id);
    matched_control.insert(p.control_id);
  }
  std::vector<JitterPoint> points;
  points.reserve(scores.rows.size());
  for (const auto& r : scores.rows) {
    MatchGroup g;
    if (r.treated)
      g = matched_treated.count(r.row_id) ? MatchGroup::MatchedTreated
                                          : MatchGroup::UnmatchedTreated;
    else
      g = matched_control.count(r.row_id) ? MatchGroup::MatchedControl
                                          : MatchGroup::UnmatchedControl;
    points.push_back({r.row_id, g, r.probability});
  }
  return points;
}

}  // namespace psm
