#include "psm/logit.hpp"

#include <algorithm>
#include <cmath>

#include "psm/errors.hpp"

namespace psm {

namespace {

// log(1 + e^x) without overflow.
double log1p_exp(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

Eigen::VectorXd fitted_probabilities(const Eigen::VectorXd& eta) {
  return eta.unaryExpr([](double e) { return logistic(e); });
}

Eigen::MatrixXd weighted_gram(const Eigen::MatrixXd& x, const Eigen::VectorXd& w) {
  const Eigen::MatrixXd xw = x.array().colwise() * w.array().sqrt();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(x.cols(), x.cols());
  gram.selfadjointView<Eigen::Lower>().rankUpdate(xw.transpose());
  return gram.selfadjointView<Eigen::Lower>();
}

void check_full_rank(const DesignMatrix& dm) {
  const auto n = dm.x.rows();
  const auto p = dm.x.cols();
  if (n <= p)
    throw RankDeficientError("design has " + std::to_string(n) + " rows for " +
                             std::to_string(p) + " coefficients");
  Eigen::MatrixXd scaled = dm.x;
  for (Eigen::Index j = 0; j < p; ++j) {
    const double norm = scaled.col(j).norm();
    if (norm == 0.0)
      throw RankDeficientError("column '" + dm.column_names[static_cast<std::size_t>(j)] +
                               "' is identically zero");
    scaled.col(j) /= norm;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
  qr.setThreshold(1e-10);
  if (qr.rank() < p) {
    // The last pivoted column is one that lies in the span of the others.
    const auto bad = qr.colsPermutation().indices()(p - 1);
    throw RankDeficientError("design matrix is rank deficient (rank " +
                             std::to_string(qr.rank()) + " < " + std::to_string(p) +
                             "); column '" + dm.column_names[static_cast<std::size_t>(bad)] +
                             "' is collinear with the others");
  }
}

}  // namespace

std::optional<std::size_t> FittedLogit::term_index(std::string_view name) const {
  auto it = std::find(term_names.begin(), term_names.end(), name);
  if (it == term_names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - term_names.begin());
}

double logistic(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

double binomial_deviance(const Eigen::VectorXd& y, const Eigen::VectorXd& eta) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) ll += y(i) * eta(i) - log1p_exp(eta(i));
  return -2.0 * ll;
}

FittedLogit fit_logit(const DesignMatrix& dm, const FitOptions& options) {
  const auto& x = dm.x;
  const auto& y = dm.y;
  const auto p = x.cols();
  if (y.size() != x.rows()) throw DataError("response length does not match design rows");
  if (static_cast<std::size_t>(p) != dm.column_names.size())
    throw DataError("design column names do not match column count");
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y(i) != 0.0 && y(i) != 1.0) throw DataError("response must be 0/1");
  }
  const double successes = y.sum();
  if (successes == 0.0 || successes == static_cast<double>(y.size()))
    throw SeparationError("response is constant; the intercept is not identifiable");
  check_full_rank(dm);

  FittedLogit fit;
  fit.term_names = dm.column_names;
  fit.n_obs = static_cast<std::size_t>(x.rows());

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd eta = Eigen::VectorXd::Zero(x.rows());
  double deviance = binomial_deviance(y, eta);
  fit.deviance_trace.push_back(deviance);

  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    const Eigen::VectorXd mu = fitted_probabilities(eta);
    const Eigen::VectorXd w = mu.array() * (1.0 - mu.array());
    const Eigen::VectorXd score = x.transpose() * (y - mu);
    Eigen::LLT<Eigen::MatrixXd> llt(weighted_gram(x, w));
    if (llt.info() != Eigen::Success)
      throw RankDeficientError("information matrix is not positive definite");
    const Eigen::VectorXd direction = llt.solve(score);

    double step = 1.0;
    Eigen::VectorXd candidate;
    Eigen::VectorXd candidate_eta;
    double candidate_deviance = 0.0;
    bool accepted = false;
    for (int h = 0; h <= options.max_step_halvings; ++h, step *= 0.5) {
      candidate = beta + step * direction;
      candidate_eta = x * candidate;
      candidate_deviance = binomial_deviance(y, candidate_eta);
      if (std::isfinite(candidate_deviance) && candidate_deviance <= deviance) {
        accepted = true;
        break;
      }
    }
    fit.iterations = iter;
    if (!accepted) {
      // No descent possible: the current point is optimal to machine precision.
      if (direction.lpNorm<Eigen::Infinity>() < 1e-6 * (1.0 + beta.lpNorm<Eigen::Infinity>())) {
        fit.converged = true;
        break;
      }
      throw ConvergenceError("step halving failed to decrease the deviance");
    }

    const double beta_change = (candidate - beta).lpNorm<Eigen::Infinity>();
    const double deviance_change = deviance - candidate_deviance;
    beta = std::move(candidate);
    eta = std::move(candidate_eta);
    deviance = candidate_deviance;
    fit.deviance_trace.push_back(deviance);

    for (Eigen::Index j = 0; j < p; ++j) {
      if (std::abs(beta(j)) > options.divergence_bound)
        throw SeparationError("coefficient '" + dm.column_names[static_cast<std::size_t>(j)] +
                              "' diverged past " + std::to_string(options.divergence_bound) +
                              " (complete or quasi-complete separation)");
    }
    // A small deviance change only signals convergence once the
    // coefficients have also settled; under separation the deviance
    // flattens while the coefficients keep drifting.
    if (beta_change < options.step_tolerance ||
        (std::abs(deviance_change) < options.deviance_tolerance && beta_change < 1e-3)) {
      fit.converged = true;
      break;
    }
  }
  if (!fit.converged)
    throw ConvergenceError("no convergence after " + std::to_string(options.max_iterations) +
                           " iterations");

  const Eigen::VectorXd mu = fitted_probabilities(eta);
  const Eigen::VectorXd w = mu.array() * (1.0 - mu.array());
  Eigen::LLT<Eigen::MatrixXd> llt(weighted_gram(x, w));
  if (llt.info() != Eigen::Success)
    throw RankDeficientError("information matrix is singular at the optimum");
  Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(p, p));
  fit.cov = 0.5 * (cov + cov.transpose());
  fit.beta = std::move(beta);
  fit.deviance = deviance;
  return fit;
}

double score_residual(const FittedLogit& fit, const DesignMatrix& dm) {
  const Eigen::VectorXd mu = fitted_probabilities(dm.x * fit.beta);
  return (dm.x.transpose() * (dm.y - mu)).lpNorm<Eigen::Infinity>();
}

double predict_linear(const FittedLogit& fit, std::span<const double> row) {
  if (row.size() != static_cast<std::size_t>(fit.beta.size()))
    throw DataError("row has " + std::to_string(row.size()) + " entries, model has " +
                    std::to_string(fit.beta.size()) + " coefficients");
  return Eigen::Map<const Eigen::VectorXd>(row.data(), fit.beta.size()).dot(fit.beta);
}

double predict_linear(const FittedLogit& fit, const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  if (row.size() != fit.beta.size())
    throw DataError("row has " + std::to_string(row.size()) + " entries, model has " +
                    std::to_string(fit.beta.size()) + " coefficients");
  return row.dot(fit.beta);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

InferenceTable wald_inference(const FittedLogit& fit) {
  if (!fit.converged) throw NumericalError("inference requested for a non-converged fit");
  constexpr double kZ975 = 1.96;
  InferenceTable table;
  table.reserve(static_cast<std::size_t>(fit.beta.size()));
  for (Eigen::Index j = 0; j < fit.beta.size(); ++j) {
    InferenceRow row;
    row.term = j < static_cast<Eigen::Index>(fit.term_names.size())
                   ? fit.term_names[static_cast<std::size_t>(j)]
                   : "b" + std::to_string(j);
    row.estimate = fit.beta(j);
    row.se = std::sqrt(std::max(0.0, fit.cov(j, j)));
    row.ci_lo = row.estimate - kZ975 * row.se;
    row.ci_hi = row.estimate + kZ975 * row.se;
    if (row.se > 0.0) {
      row.z = row.estimate / row.se;
      // 2 * (1 - Phi(|z|)) written as erfc to keep precision in the tail.
      row.p = std::erfc(std::abs(*row.z) / std::sqrt(2.0));
    } else {
      row.flagged = true;
    }
    table.push_back(std::move(row));
  }
  return table;
}

const InferenceRow& find_term(const InferenceTable& table, std::string_view term) {
  for (const auto& row : table) {
    if (row.term == term) return row;
  }
  throw DataError("term '" + std::string(term) + "' not in inference table");
}

}  // namespace psm
