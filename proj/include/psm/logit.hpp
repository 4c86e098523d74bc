#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "psm/design.hpp"

namespace psm {

struct FitOptions {
  int max_iterations = 50;
  double deviance_tolerance = 1e-8;
  double step_tolerance = 1e-10;
  // Any |coefficient| above this is treated as separation.
  double divergence_bound = 30.0;
  int max_step_halvings = 30;
};

struct FittedLogit {
  Eigen::VectorXd beta;  // log-odds scale
  Eigen::MatrixXd cov;   // inverse of X'WX at the optimum
  std::vector<std::string> term_names;
  bool converged = false;
  int iterations = 0;
  double deviance = 0.0;
  // Deviance after each accepted iteration, starting with the initial
  // (all-zero) coefficients.
  std::vector<double> deviance_trace;
  std::size_t n_obs = 0;

  std::optional<std::size_t> term_index(std::string_view name) const;
};

// Overflow-safe e^y / (1 + e^y).
double logistic(double eta);

// Bernoulli deviance -2 * sum(y*eta - log(1 + e^eta)).
double binomial_deviance(const Eigen::VectorXd& y, const Eigen::VectorXd& eta);

// Maximum likelihood by IRLS / Newton with step halving.
// Throws RankDeficientError, SeparationError or ConvergenceError.
FittedLogit fit_logit(const DesignMatrix& dm, const FitOptions& options = {});

// ||X'(y - p)||_inf at the fitted coefficients.
double score_residual(const FittedLogit& fit, const DesignMatrix& dm);

double predict_linear(const FittedLogit& fit, std::span<const double> row);
double predict_linear(const FittedLogit& fit, const Eigen::Ref<const Eigen::RowVectorXd>& row);

struct InferenceRow {
  std::string term;
  double estimate = 0.0;
  double se = 0.0;
  std::optional<double> z;  // absent when se == 0
  std::optional<double> p;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  bool flagged = false;  // zero standard error
};

using InferenceTable = std::vector<InferenceRow>;

// Standard normal CDF.
double normal_cdf(double x);

// Two-sided Wald tests and 95% intervals (estimate +/- 1.96 se).
InferenceTable wald_inference(const FittedLogit& fit);

const InferenceRow& find_term(const InferenceTable& table, std::string_view term);

}  // namespace psm
