// psm: propensity-score matching study from a CSV file.
//
// Exit codes: 0 success, 1 usage error, 2 data/schema error,
// 3 numerical failure (rank deficiency, separation, non-convergence).

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "psm/errors.hpp"
#include "psm/export.hpp"
#include "psm/study.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

psm::StudySpec resolve_spec(const std::string& spec_path, const std::optional<std::string>& order) {
  auto spec = spec_path.empty() ? psm::smokeban_study() : psm::load_study_spec(spec_path);
  if (order) spec.order = psm::parse_match_order(*order);
  return spec;
}

std::ofstream open_file(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw psm::DataError("cannot write '" + path.string() + "'");
  return out;
}

fs::path ensure_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw psm::DataError("cannot create '" + dir + "': " + ec.message());
  return p;
}

struct Prepared {
  psm::LoadReport load;
  psm::Dataset data;
};

Prepared load_prepared(const std::string& csv_path, const psm::StudySpec& spec) {
  Prepared p;
  p.load = psm::load_study_data(csv_path, spec);
  p.data = psm::prepare_dataset(p.load.dataset, spec);
  if (p.load.rows_dropped)
    std::cerr << "psm: dropped " << p.load.rows_dropped << " of " << p.load.rows_read
              << " rows with missing or unparseable cells\n";
  return p;
}

psm::MatchedPairs load_pairs(const std::string& path, const psm::Dataset& data,
                             const psm::StudySpec& spec) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw psm::DataError("cannot open pairs file '" + path + "'");
  auto pairs = psm::io::read_pairs_csv(in);
  psm::validate_pairs(data, spec.treatment, pairs);
  return pairs;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Propensity-score matching: propensity model, greedy 1:1 matching, balance "
               "diagnostics and outcome model"};
  app.require_subcommand(1);

  std::string csv_path, spec_path, pairs_path, out_dir = ".", format = "csv", output;
  std::optional<std::string> order;

  auto add_csv = [&](CLI::App* cmd) {
    cmd->add_option("csv", csv_path, "Input CSV")->required()->check(CLI::ExistingFile);
  };
  auto add_spec = [&](CLI::App* cmd) {
    cmd->add_option("--spec", spec_path, "Study spec file (default: built-in SmokeBan study)")
        ->check(CLI::ExistingFile);
  };

  auto* summarize = app.add_subcommand("summarize", "Per-column level counts and numeric stats");
  add_csv(summarize);
  add_spec(summarize);

  auto* fit = app.add_subcommand("fit-propensity", "Fit the propensity model, print Wald table");
  add_csv(fit);
  add_spec(fit);
  fit->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  fit->add_option("--output", output, "Write to file instead of stdout");

  auto* match = app.add_subcommand("match", "Greedy nearest-neighbour matching");
  add_csv(match);
  add_spec(match);
  match->add_option("--order", order, "Treated visit order")
      ->check(CLI::IsMember({"desc", "asc", "row"}));
  match->add_option("--out", out_dir, "Directory for pairs.csv, jitter.csv, scores.csv");

  auto* balance = app.add_subcommand("balance", "Covariate balance before/after matching");
  add_csv(balance);
  add_spec(balance);
  balance->add_option("--pairs", pairs_path, "pairs.csv from `match`")
      ->required()
      ->check(CLI::ExistingFile);
  balance->add_option("--out", out_dir, "Directory for love_plot.csv, histogram.csv, balance.json");

  auto* estimate = app.add_subcommand("estimate", "Outcome model on the matched rows");
  add_csv(estimate);
  add_spec(estimate);
  estimate->add_option("--pairs", pairs_path, "pairs.csv from `match`")
      ->required()
      ->check(CLI::ExistingFile);
  estimate->add_option("--output", output, "Write to file instead of stdout");

  auto* pipeline = app.add_subcommand("pipeline", "Run every step and write all artifacts");
  add_csv(pipeline);
  add_spec(pipeline);
  pipeline->add_option("--order", order, "Treated visit order")
      ->check(CLI::IsMember({"desc", "asc", "row"}));
  pipeline->add_option("--out", out_dir, "Output directory")->required();

  auto* show_spec = app.add_subcommand("default-spec", "Print the built-in SmokeBan study spec");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*show_spec) {
      std::cout << psm::format_study_spec(psm::smokeban_study());
      return 0;
    }
    const auto spec = resolve_spec(spec_path, order);

    if (*summarize) {
      const auto load = psm::load_study_data(csv_path, spec);
      std::cout << psm::io::summary_json(psm::summarize(load.dataset), load).dump(2) << '\n';
    } else if (*fit) {
      const auto p = load_prepared(csv_path, spec);
      const auto stage = psm::estimate_propensity(p.data, spec);
      const auto table = psm::wald_inference(stage.fit);
      std::ofstream file;
      if (!output.empty()) file = open_file(output);
      std::ostream& os = output.empty() ? std::cout : file;
      if (format == "json")
        os << psm::io::inference_json(table).dump(2) << '\n';
      else
        psm::io::write_inference_csv(os, table);
    } else if (*match) {
      const auto p = load_prepared(csv_path, spec);
      const auto stage = psm::estimate_propensity(p.data, spec);
      const auto pairs = psm::match_nearest(stage.scores, psm::MatchOptions{spec.order});
      const auto dir = ensure_dir(out_dir);
      auto pf = open_file(dir / "pairs.csv");
      psm::io::write_pairs_csv(pf, pairs);
      auto jf = open_file(dir / "jitter.csv");
      psm::io::write_jitter_csv(jf, psm::jitter_points(stage.scores, pairs));
      auto sf = open_file(dir / "scores.csv");
      psm::io::write_scores_csv(sf, stage.scores);
      std::cout << "pairs: " << pairs.pairs.size()
                << ", unmatched controls: " << pairs.unmatched_controls.size()
                << ", unmatched treated: " << pairs.unmatched_treated.size() << '\n';
    } else if (*balance) {
      const auto p = load_prepared(csv_path, spec);
      const auto pairs = load_pairs(pairs_path, p.data, spec);
      const auto stage = psm::estimate_propensity(p.data, spec);
      const auto matched = psm::matched_dataset(p.data, pairs);
      const auto report =
          psm::balance_report(p.data, matched, spec.propensity_model(), spec.balance);
      const auto before = psm::histogram_backtoback(stage.scores, "before", spec.bins);
      const auto after = psm::histogram_backtoback(
          psm::subset_scores(stage.scores, pairs.matched_row_ids()), "after", spec.bins);
      const auto dir = ensure_dir(out_dir);
      auto lf = open_file(dir / "love_plot.csv");
      psm::io::write_love_plot_csv(lf, report);
      auto hf = open_file(dir / "histogram.csv");
      psm::io::write_histogram_csv(hf, {before, after});
      auto bf = open_file(dir / "balance.json");
      bf << psm::io::balance_json(report).dump(2) << '\n';
      std::cout << "max |SMD| before " << report.max_abs_before << ", after "
                << report.max_abs_after << (report.balanced() ? " (balanced)" : " (NOT balanced)")
                << '\n';
    } else if (*estimate) {
      const auto p = load_prepared(csv_path, spec);
      const auto pairs = load_pairs(pairs_path, p.data, spec);
      const auto matched = psm::matched_dataset(p.data, pairs);
      const auto outcome = psm::fit_outcome_model(matched, spec.outcome_model());
      const auto report = psm::effect_summary(outcome, pairs, spec.treatment);
      std::ofstream file;
      if (!output.empty()) file = open_file(output);
      std::ostream& os = output.empty() ? std::cout : file;
      os << psm::io::effect_json(report).dump(2) << '\n';
    } else if (*pipeline) {
      const auto result = psm::run_pipeline(csv_path, spec);
      psm::io::write_pipeline_artifacts(out_dir, result, spec);
      std::cout << "pairs " << result.pairs.pairs.size() << ", unmatched controls "
                << result.pairs.unmatched_controls.size() << ", max |SMD| after "
                << result.balance.max_abs_after << ", treatment log-odds "
                << result.effect.log_odds << '\n';
    }
  } catch (const psm::NumericalError& e) {
    std::cerr << "psm: numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const psm::DataError& e) {
    std::cerr << "psm: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "psm: " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}
