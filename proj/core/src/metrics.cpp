#include "cate/metrics.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cate/errors.hpp"

namespace cate {

double mean(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("mean: empty input");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double ipw_ate(std::span<const double> y, std::span<const double> z,
               std::span<const double> p) {
  if (y.size() != z.size() || y.size() != p.size()) {
    throw ShapeError("ipw_ate: input lengths differ");
  }
  if (y.empty()) throw std::invalid_argument("ipw_ate: empty input");
  require_binary(z, "ipw_ate");
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(p[i] > 0.0 && p[i] < 1.0)) {
      throw std::domain_error("ipw_ate: propensity must lie strictly inside (0, 1)");
    }
    total += y[i] * z[i] / p[i] - y[i] * (1.0 - z[i]) / (1.0 - p[i]);
  }
  return total / static_cast<double>(y.size());
}

double pearson_corr(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("pearson_corr: lengths differ");
  if (a.size() < 2) throw std::invalid_argument("pearson_corr: need at least two points");
  const double ma = mean(a), mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) throw std::domain_error("pearson_corr: zero variance input");
  return sab / std::sqrt(saa * sbb);
}

TrialMetrics trial_metrics(std::span<const double> beta_hat,
                           std::span<const double> beta_true,
                           std::span<const double> alpha_true, double runtime_seconds) {
  if (beta_hat.size() != beta_true.size() || beta_hat.size() != alpha_true.size()) {
    throw ShapeError("trial_metrics: input lengths differ");
  }
  TrialMetrics m;
  m.mean_beta_hat = mean(beta_hat);
  m.true_ate = mean(beta_true);
  m.true_mean_alpha = mean(alpha_true);
  m.runtime_seconds = runtime_seconds;
  double sq = 0.0, diff = 0.0;
  for (std::size_t i = 0; i < beta_hat.size(); ++i) {
    const double e = beta_hat[i] - beta_true[i];
    sq += e * e;
    diff += e;
  }
  const double n = static_cast<double>(beta_hat.size());
  m.rmse = std::sqrt(sq / n);
  m.abs_bias = std::abs(diff / n);
  try {
    m.correlation = pearson_corr(beta_hat, beta_true);
  } catch (const std::domain_error&) {
    m.correlation.reset();
  }
  return m;
}

ResultsRow aggregate_results(std::span<const TrialMetrics> trials, const ResultsKey& key) {
  if (trials.empty()) throw std::invalid_argument("aggregate_results: no trials");
  ResultsRow row;
  row.key = key;
  row.trials = trials.size();
  double corr_sum = 0.0;
  std::size_t corr_count = 0;
  for (const TrialMetrics& t : trials) {
    row.mean_beta_hat += t.mean_beta_hat;
    row.true_ate += t.true_ate;
    row.true_mean_alpha += t.true_mean_alpha;
    row.mean_runtime_s += t.runtime_seconds;
    row.mean_rmse += t.rmse;
    row.mean_abs_bias += t.abs_bias;
    if (t.correlation) {
      corr_sum += *t.correlation;
      ++corr_count;
    }
  }
  const double n = static_cast<double>(trials.size());
  row.mean_beta_hat /= n;
  row.true_ate /= n;
  row.true_mean_alpha /= n;
  row.mean_runtime_s /= n;
  row.mean_rmse /= n;
  row.mean_abs_bias /= n;
  row.undefined_correlations = trials.size() - corr_count;
  if (corr_count > 0) row.mean_correlation = corr_sum / static_cast<double>(corr_count);
  return row;
}

}  // namespace cate
