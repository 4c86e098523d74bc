#include "psm/study.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "psm/errors.hpp"

namespace psm {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto comma = s.find(',', start);
    if (comma == std::string_view::npos) comma = s.size();
    auto item = trim(s.substr(start, comma - start));
    if (!item.empty()) out.push_back(std::move(item));
    start = comma + 1;
  }
  return out;
}

Term parse_term(const std::string& value, int line) {
  std::istringstream words(value);
  Term t;
  std::string kind;
  words >> t.column >> kind;
  if (t.column.empty() || kind.empty())
    throw SpecError("line " + std::to_string(line) + ": term needs '<column> <kind>'");
  if (kind == "numeric") {
    t.kind = TermKind::Numeric;
    std::string extra;
    if (words >> extra)
      throw SpecError("line " + std::to_string(line) + ": numeric term takes no reference");
  } else if (kind == "categorical") {
    t.kind = TermKind::Categorical;
    std::string rest;
    std::getline(words, rest);
    t.reference = trim(rest);
    if (t.reference.empty())
      throw SpecError("line " + std::to_string(line) + ": categorical term '" + t.column +
                      "' needs a reference level");
  } else {
    throw SpecError("line " + std::to_string(line) + ": unknown term kind '" + kind + "'");
  }
  return t;
}

template <typename T>
T parse_number(const std::string& value, const std::string& key) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw SpecError("'" + key + "' expects a number, got '" + value + "'");
  return out;
}

}  // namespace

Schema StudySpec::schema() const {
  auto kind_for = [](const std::string& level) {
    return level.empty() ? ColumnKind::Binary : ColumnKind::Categorical;
  };
  Schema s{{treatment, kind_for(treated_level)}, {outcome, kind_for(outcome_level)}};
  for (const auto& t : covariates)
    s.push_back({t.column, t.kind == TermKind::Numeric ? ColumnKind::Numeric
                                                        : ColumnKind::Categorical});
  return s;
}

ModelSpec StudySpec::propensity_model() const { return {treatment, covariates}; }

ModelSpec StudySpec::outcome_model() const {
  ModelSpec m{outcome, {}};
  m.terms.push_back({treatment, TermKind::Numeric, {}, {}});
  m.terms.insert(m.terms.end(), covariates.begin(), covariates.end());
  return m;
}

StudySpec parse_study_spec(std::istream& in) {
  StudySpec spec;
  std::vector<std::pair<std::string, std::vector<std::string>>> level_overrides;
  bool saw_bins = false;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    if (trim(raw).empty()) continue;
    const auto eq = raw.find('=');
    if (eq == std::string::npos)
      throw SpecError("line " + std::to_string(line) + ": expected 'key = value'");
    const auto key = trim(std::string_view(raw).substr(0, eq));
    const auto value = trim(std::string_view(raw).substr(eq + 1));
    if (key == "treatment") {
      spec.treatment = value;
    } else if (key == "treated_level") {
      spec.treated_level = value;
    } else if (key == "outcome") {
      spec.outcome = value;
    } else if (key == "outcome_level") {
      spec.outcome_level = value;
    } else if (key == "term") {
      spec.covariates.push_back(parse_term(value, line));
    } else if (key.rfind("levels.", 0) == 0) {
      level_overrides.emplace_back(key.substr(7), split_list(value));
    } else if (key == "order") {
      try {
        spec.order = parse_match_order(value);
      } catch (const DataError& e) {
        throw SpecError(e.what());
      }
    } else if (key == "bins") {
      spec.bins = parse_number<std::size_t>(value, key);
      saw_bins = true;
    } else if (key == "balance_threshold") {
      spec.balance.threshold = parse_number<double>(value, key);
    } else if (key == "smd_denominator") {
      if (value == "stage")
        spec.balance.denominator = SmdDenominator::StageSpecific;
      else if (value == "pre")
        spec.balance.denominator = SmdDenominator::PreMatching;
      else
        throw SpecError("smd_denominator must be 'stage' or 'pre'");
    } else {
      throw SpecError("line " + std::to_string(line) + ": unknown key '" + key + "'");
    }
  }
  if (spec.treatment.empty()) throw SpecError("spec is missing 'treatment'");
  if (spec.outcome.empty()) throw SpecError("spec is missing 'outcome'");
  if (spec.treatment == spec.outcome) throw SpecError("treatment and outcome must differ");
  if (saw_bins && spec.bins < 2) throw SpecError("'bins' must be at least 2");
  for (const auto& t : spec.covariates) {
    if (t.column == spec.treatment || t.column == spec.outcome)
      throw SpecError("term '" + t.column + "' duplicates the treatment or outcome column");
  }
  for (auto& [column, levels] : level_overrides) {
    auto it = std::find_if(spec.covariates.begin(), spec.covariates.end(),
                           [&](const Term& t) { return t.column == column; });
    if (it == spec.covariates.end() || it->kind != TermKind::Categorical)
      throw SpecError("levels." + column + " does not name a categorical term");
    it->levels = std::move(levels);
  }
  return spec;
}

StudySpec load_study_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open spec file '" + path.string() + "'");
  return parse_study_spec(in);
}

std::string format_study_spec(const StudySpec& spec) {
  std::ostringstream os;
  os << "treatment = " << spec.treatment << '\n';
  if (!spec.treated_level.empty()) os << "treated_level = " << spec.treated_level << '\n';
  os << "outcome = " << spec.outcome << '\n';
  if (!spec.outcome_level.empty()) os << "outcome_level = " << spec.outcome_level << '\n';
  for (const auto& t : spec.covariates) {
    os << "term = " << t.column;
    if (t.kind == TermKind::Numeric)
      os << " numeric\n";
    else
      os << " categorical " << t.reference << '\n';
  }
  for (const auto& t : spec.covariates) {
    if (t.levels.empty()) continue;
    os << "levels." << t.column << " = ";
    for (std::size_t i = 0; i < t.levels.size(); ++i) os << (i ? ", " : "") << t.levels[i];
    os << '\n';
  }
  os << "order = " << to_string(spec.order) << '\n';
  os << "bins = " << spec.bins << '\n';
  os << "balance_threshold = " << spec.balance.threshold << '\n';
  os << "smd_denominator = "
     << (spec.balance.denominator == SmdDenominator::PreMatching ? "pre" : "stage") << '\n';
  return os.str();
}

StudySpec smokeban_study() {
  StudySpec s;
  s.treatment = "ban";
  s.treated_level = "no";
  s.outcome = "smoker";
  s.outcome_level = "yes";
  s.covariates = {
      {"education", TermKind::Categorical, "college",
       {"college", "hs", "hs drop out", "master", "some college"}},
      {"afam", TermKind::Categorical, "no", {"no", "yes"}},
      {"hispanic", TermKind::Categorical, "no", {"no", "yes"}},
      {"gender", TermKind::Categorical, "female", {"female", "male"}},
      {"age", TermKind::Numeric, {}, {}},
  };
  return s;
}

LoadReport load_study_data(const std::filesystem::path& path, const StudySpec& spec) {
  return load_csv(path, spec.schema());
}

Dataset prepare_dataset(const Dataset& raw, const StudySpec& spec) {
  Dataset d = raw;
  if (!spec.treated_level.empty()) d = recode_treatment(d, spec.treatment, spec.treated_level);
  if (!spec.outcome_level.empty()) d = recode_treatment(d, spec.outcome, spec.outcome_level);
  return d;
}

PropensityStage estimate_propensity(const Dataset& prepared, const StudySpec& spec) {
  PropensityStage stage;
  stage.design = encode_design_matrix(prepared, spec.propensity_model());
  stage.fit = fit_logit(stage.design);
  stage.scores = compute_scores(stage.fit, stage.design,
                                prepared.column(spec.treatment).as_binary().values);
  return stage;
}

PipelineResult run_pipeline(const std::filesystem::path& csv_path, const StudySpec& spec) {
  PipelineResult r;
  r.load = load_study_data(csv_path, spec);
  r.summary = summarize(r.load.dataset);
  r.prepared = prepare_dataset(r.load.dataset, spec);
  r.propensity = estimate_propensity(r.prepared, spec);
  r.propensity_table = wald_inference(r.propensity.fit);
  r.pairs = match_nearest(r.propensity.scores, MatchOptions{spec.order});
  r.matched = matched_dataset(r.prepared, r.pairs);
  r.balance = balance_report(r.prepared, r.matched, spec.propensity_model(), spec.balance);
  r.histogram_before = histogram_backtoback(r.propensity.scores, "before", spec.bins);
  r.histogram_after = histogram_backtoback(
      subset_scores(r.propensity.scores, r.pairs.matched_row_ids()), "after", spec.bins);
  r.outcome_fit = fit_outcome_model(r.matched, spec.outcome_model());
  r.effect = effect_summary(r.outcome_fit, r.pairs, spec.treatment);
  return r;
}

}  // namespace psm
