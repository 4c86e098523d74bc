#include "psm/balance.hpp"

#include <algorithm>
#include <cmath>

#include "psm/errors.hpp"

namespace psm {

namespace {

struct GroupMoments {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  // n - 1 denominator; 0 when n < 2
};

// Two-pass moments per group.
std::pair<GroupMoments, GroupMoments> group_moments(std::span<const double> values,
                                                    std::span<const std::uint8_t> group) {
  if (values.size() != group.size())
    throw DataError("values and group flags differ in length");
  GroupMoments t, c;
  double sum_t = 0.0, sum_c = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (group[i] > 1) throw DataError("group flags must be 0/1");
    if (group[i]) {
      ++t.n;
      sum_t += values[i];
    } else {
      ++c.n;
      sum_c += values[i];
    }
  }
  if (t.n == 0) throw DataError("treated group is empty");
  if (c.n == 0) throw DataError("control group is empty");
  t.mean = sum_t / static_cast<double>(t.n);
  c.mean = sum_c / static_cast<double>(c.n);
  double ss_t = 0.0, ss_c = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (group[i])
      ss_t += (values[i] - t.mean) * (values[i] - t.mean);
    else
      ss_c += (values[i] - c.mean) * (values[i] - c.mean);
  }
  if (t.n > 1) t.variance = ss_t / static_cast<double>(t.n - 1);
  if (c.n > 1) c.variance = ss_c / static_cast<double>(c.n - 1);
  return {t, c};
}

SmdResult standardize(double diff, double pooled_sd) {
  SmdResult r;
  r.pooled_sd = pooled_sd;
  if (pooled_sd > 0.0)
    r.value = diff / pooled_sd;
  else if (diff == 0.0)
    r.value = 0.0;
  else
    r.degenerate = true;
  return r;
}

GroupSizes sizes_of(std::span<const std::uint8_t> group) {
  GroupSizes s;
  for (auto g : group) (g ? s.treated : s.control)++;
  return s;
}

struct Indicator {
  std::string name;
  std::vector<double> before;
  std::vector<double> after;
};

std::vector<double> level_indicator(const Column& col, const std::string& level) {
  const auto& cat = col.as_categorical();
  std::vector<double> out(cat.codes.size(), 0.0);
  auto it = std::find(cat.levels.begin(), cat.levels.end(), level);
  if (it == cat.levels.end()) return out;
  const auto code = static_cast<std::uint32_t>(it - cat.levels.begin());
  for (std::size_t i = 0; i < cat.codes.size(); ++i) out[i] = cat.codes[i] == code ? 1.0 : 0.0;
  return out;
}

}  // namespace

SmdResult smd(std::span<const double> values, std::span<const std::uint8_t> group) {
  const auto [t, c] = group_moments(values, group);
  if (t.n < 2 || c.n < 2) {
    SmdResult r;
    r.degenerate = true;
    return r;
  }
  return standardize(t.mean - c.mean, std::sqrt((t.variance + c.variance) / 2.0));
}

SmdResult smd(std::span<const double> values, std::span<const std::uint8_t> group,
              double pooled_sd) {
  const auto [t, c] = group_moments(values, group);
  return standardize(t.mean - c.mean, pooled_sd);
}

BalanceReport balance_report(const Dataset& before, const Dataset& after, const ModelSpec& spec,
                             const BalanceOptions& options) {
  const auto& g_before = before.column(spec.response).as_binary().values;
  const auto& g_after = after.column(spec.response).as_binary().values;

  std::vector<Indicator> indicators;
  for (const auto& term : spec.terms) {
    const auto& col_before = before.column(term.column);
    const auto& col_after = after.column(term.column);
    if (term.kind == TermKind::Numeric) {
      indicators.push_back({term.column, col_before.to_doubles(), col_after.to_doubles()});
      continue;
    }
    for (const auto& level : resolved_levels(col_before, term)) {
      indicators.push_back({indicator_name(term.column, level), level_indicator(col_before, level),
                            level_indicator(col_after, level)});
    }
  }

  BalanceReport report;
  report.threshold = options.threshold;
  report.before_sizes = sizes_of(g_before);
  report.after_sizes = sizes_of(g_after);
  std::size_t counted = 0;
  for (auto& ind : indicators) {
    BalanceEntry e;
    e.indicator = ind.name;
    if (!ind.before.empty()) {
      auto [lo, hi] = std::minmax_element(ind.before.begin(), ind.before.end());
      e.constant = *lo == *hi;
    }
    e.before = smd(ind.before, g_before);
    e.after = options.denominator == SmdDenominator::PreMatching && !e.before.degenerate
                  ? smd(ind.after, g_after, e.before.pooled_sd)
                  : smd(ind.after, g_after);
    if (!e.degenerate()) {
      ++counted;
      report.max_abs_before = std::max(report.max_abs_before, std::abs(e.before.value));
      report.max_abs_after = std::max(report.max_abs_after, std::abs(e.after.value));
      report.mean_abs_before += std::abs(e.before.value);
      report.mean_abs_after += std::abs(e.after.value);
    }
    report.entries.push_back(std::move(e));
  }
  if (counted > 0) {
    report.mean_abs_before /= static_cast<double>(counted);
    report.mean_abs_after /= static_cast<double>(counted);
  }
  return report;
}

double HistogramData::total_variation() const {
  std::size_t nt = 0, nc = 0;
  for (auto c : treated_counts) nt += c;
  for (auto c : control_counts) nc += c;
  double tv = 0.0;
  for (std::size_t b = 0; b < bins(); ++b) {
    const double pt = nt ? static_cast<double>(treated_counts[b]) / static_cast<double>(nt) : 0.0;
    const double pc = nc ? static_cast<double>(control_counts[b]) / static_cast<double>(nc) : 0.0;
    tv += std::abs(pt - pc);
  }
  return tv / 2.0;
}

HistogramData histogram_backtoback(const PropensityScores& scores, std::string stage,
                                   std::size_t bins, ScoreScale scale) {
  if (bins < 2) throw DataError("histogram needs at least 2 bins");
  if (scores.rows.empty()) throw DataError("no scores to bin");
  auto value = [scale](const ScoredRow& r) {
    return scale == ScoreScale::Probability ? r.probability : r.log_odds;
  };
  double lo = value(scores.rows.front());
  double hi = lo;
  for (const auto& r : scores.rows) {
    lo = std::min(lo, value(r));
    hi = std::max(hi, value(r));
  }

  HistogramData h;
  h.stage = std::move(stage);
  if (lo == hi) {
    h.degenerate = true;
    h.edges = {lo, hi};
    h.treated_counts.assign(1, 0);
    h.control_counts.assign(1, 0);
    for (const auto& r : scores.rows) ++(r.treated ? h.treated_counts : h.control_counts)[0];
    return h;
  }

  const double width = (hi - lo) / static_cast<double>(bins);
  h.edges.resize(bins + 1);
  for (std::size_t k = 0; k < bins; ++k) h.edges[k] = lo + static_cast<double>(k) * width;
  h.edges[bins] = hi;
  h.treated_counts.assign(bins, 0);
  h.control_counts.assign(bins, 0);
  for (const auto& r : scores.rows) {
    const double v = value(r);
    // Locate by edges rather than by division so a value never lands in a
    // bin whose closed-open interval excludes it.
    auto it = std::upper_bound(h.edges.begin(), h.edges.end(), v);
    auto b = static_cast<std::size_t>(std::distance(h.edges.begin(), it));
    b = std::clamp<std::size_t>(b, 1, bins) - 1;
    ++(r.treated ? h.treated_counts : h.control_counts)[b];
  }
  return h;
}

}  // namespace psm
