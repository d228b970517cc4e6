#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cate/dgp.hpp"
#include "cate/models.hpp"

namespace cate {

// Inverse propensity weighted ATE: mean(Y Z / p - Y (1 - Z) / (1 - p)).
// Every p must lie strictly inside (0, 1).
double ipw_ate(std::span<const double> y, std::span<const double> z,
               std::span<const double> p);

// Pearson correlation; throws std::domain_error on a constant input.
double pearson_corr(std::span<const double> a, std::span<const double> b);

double mean(std::span<const double> v);

struct TrialMetrics {
  double mean_beta_hat = 0.0;
  double true_ate = 0.0;
  double true_mean_alpha = 0.0;
  double runtime_seconds = 0.0;
  std::optional<double> correlation;  // unset when beta_hat is constant
  double rmse = 0.0;
  double abs_bias = 0.0;

  friend bool operator==(const TrialMetrics&, const TrialMetrics&) = default;
};

TrialMetrics trial_metrics(std::span<const double> beta_hat,
                           std::span<const double> beta_true,
                           std::span<const double> alpha_true, double runtime_seconds);

struct ResultsKey {
  Method method = Method::kShared;
  std::size_t n = 0;
  Regime regime = Regime::kSmallTreatment;

  friend bool operator==(const ResultsKey&, const ResultsKey&) = default;
};

// Trial-averaged metrics for one (method, n, regime) cell.
struct ResultsRow {
  ResultsKey key;
  std::size_t trials = 0;          // completed trials averaged
  std::size_t failed_trials = 0;   // excluded from the averages
  std::size_t undefined_correlations = 0;
  double mean_beta_hat = 0.0;
  double true_ate = 0.0;
  double true_mean_alpha = 0.0;
  double mean_runtime_s = 0.0;
  std::optional<double> mean_correlation;
  double mean_rmse = 0.0;
  double mean_abs_bias = 0.0;
};

using ResultsTable = std::vector<ResultsRow>;

// Arithmetic mean of every metric. Undefined correlations are skipped and
// counted. Throws std::invalid_argument on an empty list.
ResultsRow aggregate_results(std::span<const TrialMetrics> trials, const ResultsKey& key);

}  // namespace cate
