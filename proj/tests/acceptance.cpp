// End-to-end acceptance checks on the SmokeBan data. Prints one PASS/FAIL
// line per criterion and exits non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "psm/balance.hpp"
#include "psm/effect.hpp"
#include "psm/errors.hpp"
#include "psm/study.hpp"
#include "test_support.hpp"

using namespace psm;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Collects failed sub-checks for one criterion.
struct Checker {
  std::vector<std::string> failures;
  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  void near(double got, double want, double tol, const std::string& what) {
    std::ostringstream os;
    os << what << ": got " << got << ", want " << want << " +/- " << tol;
    expect(std::abs(got - want) <= tol, os.str());
  }
};

int failed_criteria = 0;

void report(int id, const std::string& title, const std::function<std::string(Checker&)>& body) {
  Checker c;
  std::string detail;
  try {
    detail = body(c);
  } catch (const std::exception& e) {
    c.failures.push_back(std::string("exception: ") + e.what());
  }
  const bool ok = c.failures.empty();
  if (!ok) ++failed_criteria;
  std::printf("%s [%d] %s%s%s\n", ok ? "PASS" : "FAIL", id, title.c_str(),
              detail.empty() ? "" : " -- ", detail.c_str());
  for (const auto& f : c.failures) std::printf("       - %s\n", f.c_str());
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::map<std::string, std::size_t> counts(const std::vector<ColumnSummary>& all,
                                          const std::string& name) {
  std::map<std::string, std::size_t> m;
  for (const auto& s : all)
    if (s.name == name)
      for (const auto& lc : s.counts) m[lc.level] = lc.count;
  return m;
}

const InferenceRow* find_row(const InferenceTable& t, const std::string& term) {
  for (const auto& r : t)
    if (r.term == term) return &r;
  return nullptr;
}

DesignMatrix random_design(std::mt19937_64& rng, int n, int covariates) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  DesignMatrix dm;
  dm.x.resize(n, covariates + 1);
  dm.y.resize(n);
  Eigen::VectorXd truth(covariates + 1);
  for (int j = 0; j <= covariates; ++j) truth(j) = 0.7 * normal(rng);
  for (int i = 0; i < n; ++i) {
    dm.x(i, 0) = 1.0;
    for (int j = 1; j <= covariates; ++j) dm.x(i, j) = normal(rng);
    dm.y(i) = unif(rng) < logistic(dm.x.row(i).dot(truth)) ? 1.0 : 0.0;
    dm.row_ids.push_back(static_cast<std::size_t>(i));
  }
  dm.column_names.assign(static_cast<std::size_t>(covariates + 1), "x");
  return dm;
}

}  // namespace

int main() {
  const auto spec = smokeban_study();
  const auto csv_path = testing::smokeban_csv();

  LoadReport load;
  Dataset prepared;
  PropensityStage stage;
  MatchedPairs pairs;
  Dataset matched;

  report(1, "data summary matches the published level counts and age moments", [&](Checker& c) {
    const auto start = Clock::now();
    load = load_study_data(csv_path, spec);
    const auto summary = summarize(load.dataset);
    const double elapsed = seconds_since(start);
    prepared = prepare_dataset(load.dataset, spec);

    using M = std::map<std::string, std::size_t>;
    c.expect(load.dataset.n_rows() == 10000, "10000 rows");
    c.expect(counts(summary, "smoker") == M{{"yes", 2423}, {"no", 7577}}, "smoker counts");
    c.expect(counts(summary, "ban") == M{{"no", 3902}, {"yes", 6098}}, "ban counts");
    c.expect(counts(summary, "gender") == M{{"female", 5637}, {"male", 4363}}, "gender counts");
    c.expect(counts(summary, "afam") == M{{"yes", 769}, {"no", 9231}}, "afam counts");
    c.expect(counts(summary, "hispanic") == M{{"yes", 1134}, {"no", 8866}}, "hispanic counts");
    c.expect(counts(summary, "education") == M{{"hs", 3266},
                                               {"hs drop out", 912},
                                               {"some college", 2802},
                                               {"college", 1972},
                                               {"master", 1048}},
             "education counts");
    for (const auto& s : summary) {
      if (s.name != "age") continue;
      c.near(s.numeric->mean, 38.69, 0.01, "age mean");
      c.near(*s.numeric->sd, 12.11, 0.01, "age sd");
    }
    const auto& ban = prepared.column("ban").as_binary().values;
    c.expect(std::accumulate(ban.begin(), ban.end(), 0) == 3902, "3902 treated after recoding");
    c.expect(elapsed < 1.0, "runtime < 1 s");
    return fmt("%.3f s", elapsed);
  });

  report(2, "propensity coefficients and p-values match the published table", [&](Checker& c) {
    const auto start = Clock::now();
    stage = estimate_propensity(prepared, spec);
    const auto table = wald_inference(stage.fit);
    const double elapsed = seconds_since(start);
    const std::pair<const char*, double> published[] = {
        {"(Intercept)", -0.81},           {"education_hs", 0.67},
        {"education_hs_drop_out", 1.0},   {"education_master", -0.14},
        {"education_some_college", 0.36}, {"afam_yes", -0.10},
        {"hispanic_yes", -0.08},          {"gender_male", 0.51},
        {"age", -0.01}};
    for (const auto& [term, value] : published) {
      const auto* row = find_row(table, term);
      c.expect(row != nullptr, std::string("term ") + term);
      if (row) c.near(row->estimate, value, 0.02, term);
    }
    for (const char* term : {"(Intercept)", "education_hs", "education_hs_drop_out",
                             "education_some_college", "gender_male", "age"}) {
      const auto* row = find_row(table, term);
      c.expect(row && row->p && *row->p < 0.001, std::string(term) + " p < 0.001");
    }
    for (const char* term : {"education_master", "afam_yes", "hispanic_yes"}) {
      const auto* row = find_row(table, term);
      c.expect(row && row->p && *row->p >= 0.05 && *row->p <= 0.35,
               std::string(term) + " p in [0.05, 0.35]");
    }
    c.expect(elapsed < 2.0, "runtime < 2 s");
    return fmt("%.3f s", elapsed);
  });

  report(3, "matching forms 3902 pairs, 2196 unmatched controls, deterministically",
         [&](Checker& c) {
           pairs = match_nearest(stage.scores, MatchOptions{spec.order});
           c.expect(pairs.pairs.size() == 3902, "3902 pairs");
           c.expect(pairs.unmatched_controls.size() == 2196, "2196 unmatched controls");
           c.expect(pairs.unmatched_treated.empty(), "no unmatched treated");
           for (int rep = 0; rep < 3; ++rep) {
             const auto again = estimate_propensity(prepared, spec);
             c.expect(match_nearest(again.scores, MatchOptions{spec.order}) == pairs,
                      "repeat run " + std::to_string(rep) + " identical");
           }
           matched = matched_dataset(prepared, pairs);
           return std::to_string(pairs.pairs.size()) + " pairs";
         });

  report(4, "matched sample is balanced on every covariate indicator", [&](Checker& c) {
    const auto start = Clock::now();
    const auto b = balance_report(prepared, matched, spec.propensity_model(), spec.balance);
    const double elapsed = seconds_since(start);
    c.expect(b.entries.size() == 12, "12 indicators");
    for (const auto& e : b.entries) c.expect(!e.degenerate(), e.indicator + " not degenerate");
    c.expect(b.max_abs_after < 0.1, fmt("max |SMD| after %.4f < 0.1", b.max_abs_after));
    c.expect(b.mean_abs_after < b.mean_abs_before, "mean |SMD| decreases");
    c.expect(elapsed < 1.0, "runtime < 1 s");
    return fmt("max |SMD| after %.4f", b.max_abs_after) +
           fmt(", mean %.4f", b.mean_abs_before) + fmt(" -> %.4f", b.mean_abs_after) +
           fmt(", %.3f s", elapsed);
  });

  report(5, "outcome model on the matched sample matches the published table", [&](Checker& c) {
    const auto fit = fit_outcome_model(matched, spec.outcome_model());
    const auto effect = effect_summary(fit, pairs, spec.treatment);
    const auto& table = effect.outcome_table;
    const auto* ban = find_row(table, "ban");
    c.expect(ban != nullptr, "treatment term present");
    if (!ban) return std::string();
    c.expect(ban->estimate > 0, "treatment estimate positive");
    c.expect(ban->p && *ban->p < 0.001, "treatment p < 0.001");
    c.near(ban->estimate, 0.262, 0.10, "treatment estimate");
    const std::pair<const char*, double> published[] = {
        {"(Intercept)", -1.647},          {"age", -0.009},
        {"education_hs", 1.081},          {"education_hs_drop_out", 1.485},
        {"education_master", -0.498},     {"education_some_college", 0.69},
        {"afam_yes", -0.129},             {"hispanic_yes", -0.595},
        {"gender_male", 0.2}};
    for (const auto& [term, value] : published) {
      const auto* row = find_row(table, term);
      c.expect(row != nullptr, std::string("term ") + term);
      if (!row) continue;
      c.near(row->estimate, value, 0.15, term);
      c.expect(std::signbit(row->estimate) == std::signbit(value), std::string(term) + " sign");
    }
    return fmt("treatment %.4f", ban->estimate) + fmt(" (se %.4f)", ban->se);
  });

  report(6, "logit-to-probability conversion", [&](Checker& c) {
    const double p = logit_to_probability(0.262);
    c.expect(p >= 0.5646 && p <= 0.5656, fmt("logistic(0.262) = %.6f in [0.5646, 0.5656]", p));
    c.expect(logit_to_probability(0.0) == 0.5, "logistic(0) == 0.5 exactly");
    return fmt("logistic(0.262) = %.6f", p);
  });

  report(7, "oracle equivalence: greedy replay, closed-form MLE, score equations",
         [&](Checker& c) {
           std::mt19937_64 rng(20240607);
           int instances = 0;
           for (int trial = 0; trial < 200; ++trial) {
             const std::size_t nt = 1 + rng() % 10;
             const std::size_t nc = 1 + rng() % (20 - nt);
             const auto s = testing::random_scores(rng, nt, nc, trial % 2 == 0);
             const MatchOrder order = static_cast<MatchOrder>(trial % 3);
             if (match_nearest(s, {order}) != testing::greedy_oracle(s, order))
               c.expect(false, "matcher differs from replay on instance " + std::to_string(trial));
             ++instances;
           }

           // 10/20 successes at x = 0, 20/25 at x = 1.
           DesignMatrix two;
           two.x.resize(45, 2);
           two.y.resize(45);
           for (int i = 0; i < 45; ++i) {
             two.x(i, 0) = 1.0;
             two.x(i, 1) = i < 20 ? 0.0 : 1.0;
             two.y(i) = (i < 10) || (i >= 20 && i < 40) ? 1.0 : 0.0;
             two.row_ids.push_back(static_cast<std::size_t>(i));
           }
           two.column_names = {"(Intercept)", "x"};
           const auto fit2 = fit_logit(two);
           c.near(fit2.beta(0), 0.0, 1e-8, "2x2 intercept");
           c.near(fit2.beta(1), std::log(4.0), 1e-8, "2x2 slope");

           int fits = 0;
           double worst = 0.0;
           auto check_residual = [&](const FittedLogit& fit, const DesignMatrix& dm) {
             const double r = score_residual(fit, dm);
             const double bound = 1e-6 * static_cast<double>(dm.n_rows());
             worst = std::max(worst, r / bound);
             ++fits;
             c.expect(r < bound, "score residual on fit " + std::to_string(fits));
           };
           check_residual(fit2, two);
           check_residual(stage.fit, stage.design);
           check_residual(fit_outcome_model(matched, spec.outcome_model()),
                          encode_design_matrix(matched, spec.outcome_model()));
           for (int trial = 0; trial < 100; ++trial) {
             const auto dm = random_design(rng, 60 + static_cast<int>(rng() % 400),
                                           1 + static_cast<int>(rng() % 5));
             try {
               check_residual(fit_logit(dm), dm);
             } catch (const SeparationError&) {
             }
           }
           return std::to_string(instances) + " matcher instances, " + std::to_string(fits) +
                  " fits" + fmt(", worst residual %.2g of bound", worst);
         });

  report(8, "property suite and full pipeline runtime", [&](Checker& c) {
    std::mt19937_64 rng(8888);
    std::normal_distribution<double> normal;
    const int cases = 1000;

    // SMD: affine invariance (positive scale) and sign flip on group swap.
    for (int i = 0; i < cases; ++i) {
      const std::size_t n = 6 + rng() % 40;
      std::vector<double> v(n);
      std::vector<std::uint8_t> g(n);
      for (std::size_t k = 0; k < n; ++k) {
        g[k] = k < 3 ? 1 : (k < 6 ? 0 : static_cast<std::uint8_t>(rng() % 2));
        v[k] = normal(rng) + 0.5 * g[k];
      }
      const double base = smd(v, g).value;
      const double a = 0.01 + 10.0 * std::abs(normal(rng)), b = 50.0 * normal(rng);
      auto w = v;
      for (auto& x : w) x = a * x + b;
      auto h = g;
      for (auto& f : h) f = 1 - f;
      if (std::abs(smd(w, g).value - base) > 1e-8 * std::max(1.0, std::abs(base)))
        c.expect(false, "SMD affine invariance case " + std::to_string(i));
      if (std::abs(smd(v, h).value + base) > 1e-12)
        c.expect(false, "SMD sign flip case " + std::to_string(i));
    }

    // Logit: swapping response labels negates every coefficient.
    int symmetric = 0;
    for (int i = 0; symmetric < cases && i < 3 * cases; ++i) {
      const auto dm = random_design(rng, 40 + static_cast<int>(rng() % 80),
                                    1 + static_cast<int>(rng() % 3));
      FittedLogit fit;
      try {
        fit = fit_logit(dm);
      } catch (const SeparationError&) {
        continue;
      }
      auto flipped = dm;
      flipped.y = (1.0 - dm.y.array()).matrix();
      const auto neg = fit_logit(flipped);
      if ((fit.beta + neg.beta).lpNorm<Eigen::Infinity>() > 1e-6)
        c.expect(false, "label symmetry case " + std::to_string(i));
      ++symmetric;
    }
    c.expect(symmetric >= cases, "at least 1000 label-symmetry fits");

    // Logistic complement identity.
    std::uniform_real_distribution<double> wide(-40.0, 40.0);
    for (int i = 0; i < cases; ++i) {
      const double y = wide(rng);
      if (std::abs(logit_to_probability(y) + logit_to_probability(-y) - 1.0) > 1e-12)
        c.expect(false, "complement identity at " + std::to_string(y));
    }

    // Matching: partition of rows, no reuse, pair count = min(group sizes).
    for (int i = 0; i < cases; ++i) {
      const std::size_t nt = 1 + rng() % 25, nc = 1 + rng() % 25;
      const auto s = testing::random_scores(rng, nt, nc, i % 2 == 0);
      const auto m = match_nearest(s, {static_cast<MatchOrder>(i % 3)});
      std::multiset<std::size_t> seen;
      for (const auto& p : m.pairs) {
        seen.insert(p.treated_id);
        seen.insert(p.control_id);
      }
      seen.insert(m.unmatched_controls.begin(), m.unmatched_controls.end());
      seen.insert(m.unmatched_treated.begin(), m.unmatched_treated.end());
      bool ok = seen.size() == s.size() && m.pairs.size() == std::min(nt, nc);
      for (const auto& r : s.rows) ok = ok && seen.count(r.row_id) == 1;
      if (!ok) c.expect(false, "matching partition case " + std::to_string(i));
    }

    const auto start = Clock::now();
    const auto result = run_pipeline(csv_path, spec);
    const double elapsed = seconds_since(start);
    c.expect(result.pairs.pairs.size() == 3902, "pipeline pairs");
    c.expect(elapsed < 5.0, "pipeline runtime < 5 s");
    return std::to_string(cases) + " cases per property, " + std::to_string(symmetric) +
           " symmetry fits" + fmt(", pipeline %.3f s", elapsed);
  });

  std::printf("%d of 8 criteria failed\n", failed_criteria);
  return failed_criteria == 0 ? 0 : 1;
}
