#include "psm/export.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "psm/csv.hpp"
#include "psm/errors.hpp"

namespace psm::io {

using nlohmann::ordered_json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("format_double: buffer too small");
  return std::string(buf, ptr);
}

namespace {

std::string opt_cell(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

ordered_json opt_json(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

std::size_t parse_id(const std::string& cell, std::size_t line) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size())
    throw DataError("pairs file line " + std::to_string(line) + ": bad row id '" + cell + "'");
  return v;
}

}  // namespace

void write_inference_csv(std::ostream& os, const InferenceTable& table) {
  os << "term,estimate,se,z,p,ci_lo,ci_hi\n";
  for (const auto& r : table) {
    os << csv::join({r.term, format_double(r.estimate), format_double(r.se), opt_cell(r.z),
                     opt_cell(r.p), format_double(r.ci_lo), format_double(r.ci_hi)})
       << '\n';
  }
}

nlohmann::ordered_json inference_json(const InferenceTable& table) {
  ordered_json rows = ordered_json::array();
  for (const auto& r : table) {
    ordered_json row;
    row["term"] = r.term;
    row["estimate"] = r.estimate;
    row["se"] = r.se;
    row["z"] = opt_json(r.z);
    row["p"] = opt_json(r.p);
    row["ci_lo"] = r.ci_lo;
    row["ci_hi"] = r.ci_hi;
    if (r.flagged) row["flagged"] = "zero standard error";
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_scores_csv(std::ostream& os, const PropensityScores& scores) {
  os << "row_id,treatment,score_logodds,score_prob\n";
  for (const auto& r : scores.rows) {
    os << r.row_id << ',' << static_cast<int>(r.treated) << ',' << format_double(r.log_odds)
       << ',' << format_double(r.probability) << '\n';
  }
}

void write_pairs_csv(std::ostream& os, const MatchedPairs& pairs) {
  os << "treated_id,control_id,distance\n";
  for (const auto& p : pairs.pairs)
    os << p.treated_id << ',' << p.control_id << ',' << format_double(p.distance) << '\n';
}

MatchedPairs read_pairs_csv(std::istream& in) {
  const auto records = csv::read_all(in);
  if (records.empty()) throw DataError("pairs file is empty");
  const csv::Record expected{"treated_id", "control_id", "distance"};
  if (records.front() != expected)
    throw DataError("pairs file header must be treated_id,control_id,distance");
  MatchedPairs out;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (rec.size() != 3)
      throw DataError("pairs file line " + std::to_string(i + 1) + ": expected 3 fields");
    MatchedPair p;
    p.treated_id = parse_id(rec[0], i + 1);
    p.control_id = parse_id(rec[1], i + 1);
    auto [ptr, ec] =
        std::from_chars(rec[2].data(), rec[2].data() + rec[2].size(), p.distance);
    if (ec != std::errc() || ptr != rec[2].data() + rec[2].size() || p.distance < 0.0)
      throw DataError("pairs file line " + std::to_string(i + 1) + ": bad distance");
    out.pairs.push_back(p);
  }
  return out;
}

void write_jitter_csv(std::ostream& os, const std::vector<JitterPoint>& points) {
  os << "row_id,group,score\n";
  for (const auto& p : points)
    os << p.row_id << ',' << to_string(p.group) << ',' << format_double(p.score) << '\n';
}

void write_love_plot_csv(std::ostream& os, const BalanceReport& report) {
  os << "indicator,smd_before,smd_after\n";
  for (const auto& e : report.entries) {
    const bool bad = e.degenerate();
    os << csv::join({e.indicator, bad ? "" : format_double(e.before.value),
                     bad ? "" : format_double(e.after.value)})
       << '\n';
  }
}

nlohmann::ordered_json balance_json(const BalanceReport& report) {
  ordered_json j;
  j["threshold"] = report.threshold;
  j["balanced"] = report.balanced();
  j["max_abs_smd_before"] = report.max_abs_before;
  j["max_abs_smd_after"] = report.max_abs_after;
  j["mean_abs_smd_before"] = report.mean_abs_before;
  j["mean_abs_smd_after"] = report.mean_abs_after;
  j["sizes"] = {{"before", {{"treated", report.before_sizes.treated},
                            {"control", report.before_sizes.control}}},
                {"after", {{"treated", report.after_sizes.treated},
                           {"control", report.after_sizes.control}}}};
  ordered_json entries = ordered_json::array();
  for (const auto& e : report.entries) {
    ordered_json row;
    row["indicator"] = e.indicator;
    row["smd_before"] = e.before.degenerate ? ordered_json(nullptr) : ordered_json(e.before.value);
    row["smd_after"] = e.after.degenerate ? ordered_json(nullptr) : ordered_json(e.after.value);
    row["degenerate"] = e.degenerate();
    entries.push_back(std::move(row));
  }
  j["indicators"] = std::move(entries);
  return j;
}

void write_histogram_csv(std::ostream& os, const std::vector<HistogramData>& histograms) {
  os << "stage,bin_lo,bin_hi,treated_count,control_count\n";
  for (const auto& h : histograms) {
    for (std::size_t b = 0; b < h.bins(); ++b) {
      os << csv::join({h.stage, format_double(h.edges[b]), format_double(h.edges[b + 1]),
                       std::to_string(h.treated_counts[b]), std::to_string(h.control_counts[b])})
         << '\n';
    }
  }
}

nlohmann::ordered_json summary_json(const std::vector<ColumnSummary>& summary,
                                    const LoadReport& load) {
  ordered_json j;
  j["n_rows"] = load.dataset.n_rows();
  j["rows_read"] = load.rows_read;
  j["rows_dropped"] = load.rows_dropped;
  j["empty_cells"] = load.empty_cells;
  j["unparseable_cells"] = load.unparseable_cells;
  ordered_json cols = ordered_json::array();
  for (const auto& s : summary) {
    ordered_json c;
    c["name"] = s.name;
    c["kind"] = std::string(to_string(s.kind));
    if (s.kind == ColumnKind::Numeric) {
      if (s.numeric) {
        c["n"] = s.numeric->n;
        c["mean"] = s.numeric->mean;
        c["sd"] = opt_json(s.numeric->sd);
        c["min"] = s.numeric->min;
        c["max"] = s.numeric->max;
      } else {
        c["n"] = 0;
      }
    } else {
      ordered_json counts = ordered_json::object();
      for (const auto& lc : s.counts) counts[lc.level] = lc.count;
      c["counts"] = std::move(counts);
    }
    cols.push_back(std::move(c));
  }
  j["columns"] = std::move(cols);
  return j;
}

nlohmann::ordered_json effect_json(const EffectReport& r) {
  ordered_json j;
  j["treatment_term"] = r.treatment_term;
  j["log_odds"] = r.log_odds;
  j["odds_ratio"] = r.odds_ratio;
  j["logistic_of_log_odds"] = r.transformed_probability;
  j["logistic_of_log_odds_note"] =
      "logistic transform of the treatment coefficient alone; not a marginal effect or "
      "risk difference";
  j["n_pairs"] = r.n_pairs;
  j["n_matched_rows"] = r.n_matched_rows;
  j["n_outcome_obs"] = r.n_outcome_obs;
  j["outcome_model"] = inference_json(r.outcome_table);
  return j;
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

void write_pipeline_artifacts(const std::filesystem::path& dir, const PipelineResult& r,
                              const StudySpec& spec) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create '" + dir.string() + "': " + ec.message());

  auto emit = [&](const char* name, auto&& body) {
    auto out = open_output(dir / name);
    body(out);
    if (!out) throw DataError("failed writing '" + (dir / name).string() + "'");
  };
  emit("summary.json", [&](std::ostream& os) { os << summary_json(r.summary, r.load).dump(2) << '\n'; });
  emit("propensity.csv", [&](std::ostream& os) { write_inference_csv(os, r.propensity_table); });
  emit("propensity.json",
       [&](std::ostream& os) { os << inference_json(r.propensity_table).dump(2) << '\n'; });
  emit("scores.csv", [&](std::ostream& os) { write_scores_csv(os, r.propensity.scores); });
  emit("pairs.csv", [&](std::ostream& os) { write_pairs_csv(os, r.pairs); });
  emit("jitter.csv", [&](std::ostream& os) {
    write_jitter_csv(os, jitter_points(r.propensity.scores, r.pairs));
  });
  emit("love_plot.csv", [&](std::ostream& os) { write_love_plot_csv(os, r.balance); });
  emit("balance.json", [&](std::ostream& os) { os << balance_json(r.balance).dump(2) << '\n'; });
  emit("histogram.csv", [&](std::ostream& os) {
    write_histogram_csv(os, {r.histogram_before, r.histogram_after});
  });
  emit("outcome.csv", [&](std::ostream& os) { write_inference_csv(os, r.effect.outcome_table); });
  emit("effect.json", [&](std::ostream& os) { os << effect_json(r.effect).dump(2) << '\n'; });
  emit("study.spec", [&](std::ostream& os) { os << format_study_spec(spec); });
}

}  // namespace psm::io
