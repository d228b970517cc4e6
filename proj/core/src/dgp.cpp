#include "cate/dgp.hpp"

#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

#include "cate/csv.hpp"
#include "cate/errors.hpp"
#include "cate/rng.hpp"

namespace cate {
namespace {

void require_dgp_columns(const Matrix& x) {
  if (x.cols() != kDgpCovariates) {
    throw ShapeError("dgp: expected 5 covariate columns, got " + std::to_string(x.cols()));
  }
}

}  // namespace

std::string_view to_string(Regime r) noexcept {
  return r == Regime::kSmallTreatment ? "small" : "large";
}

Regime regime_from_string(std::string_view s) {
  if (s == "small") return Regime::kSmallTreatment;
  if (s == "large") return Regime::kLargeTreatment;
  throw std::invalid_argument("unknown regime: " + std::string(s));
}

double norm_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double sample_sd(std::span<const double> v) {
  if (v.size() < 2) throw std::invalid_argument("sample_sd: need at least two values");
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

Covariates gen_covariates(std::size_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gen_covariates: n must be >= 1");
  Rng rng(seed);
  Covariates c{Matrix(n, kDgpCovariates), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    c.x(i, 0) = rng.normal();
    c.x(i, 1) = rng.normal();
    c.x(i, 2) = rng.normal();
    c.x(i, 3) = rng.binomial(2, 0.5);
    c.x(i, 4) = rng.bernoulli(0.5) ? 1.0 : 0.0;
    c.u[i] = rng.uniform();
  }
  return c;
}

std::vector<double> true_beta(const Matrix& x, Regime regime) {
  require_dgp_columns(x);
  const double base = regime == Regime::kSmallTreatment ? 0.20 : 5.0;
  std::vector<double> b(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) b[i] = base + 0.5 * x(i, 0) * x(i, 3);
  return b;
}

std::vector<double> true_alpha(const Matrix& x) {
  require_dgp_columns(x);
  std::vector<double> a(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    a[i] = 0.5 * std::cos(2.0 * x(i, 0)) + 0.95 * std::abs(x(i, 2) * x(i, 4)) -
           0.2 * x(i, 1) + 1.5;
  }
  return a;
}

std::vector<double> true_pi(std::span<const double> alpha, std::span<const double> u) {
  if (alpha.size() != u.size()) throw ShapeError("true_pi: alpha and u lengths differ");
  const double s = sample_sd(alpha);
  if (!(s > 0.0)) throw std::invalid_argument("true_pi: alpha has zero variance");
  std::vector<double> pi(alpha.size());
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    pi[i] = 0.70 * norm_cdf(alpha[i] / s - 3.5) + u[i] / 10.0 + 0.10;
  }
  return pi;
}

DgpSample sample_outcomes(const Matrix& x, std::span<const double> u, Regime regime,
                          double kappa, std::uint64_t outcome_seed,
                          std::optional<std::uint64_t> treatment_seed) {
  if (u.size() != x.rows()) throw ShapeError("sample_outcomes: u length mismatch");
  if (!(kappa > 0.0)) throw std::invalid_argument("sample_outcomes: kappa must be > 0");
  DgpSample s;
  s.x = x;
  s.u.assign(u.begin(), u.end());
  s.alpha = true_alpha(x);
  s.beta = true_beta(x, regime);
  s.pi = true_pi(s.alpha, s.u);
  s.sigma = sample_sd(s.alpha) * kappa;

  const std::size_t n = x.rows();
  Rng rng(outcome_seed);
  Rng z_rng(treatment_seed.value_or(0));
  Rng& zr = treatment_seed ? z_rng : rng;
  s.z.resize(n);
  s.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.z[i] = zr.bernoulli(s.pi[i]) ? 1.0 : 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    s.y[i] = s.alpha[i] + s.beta[i] * s.z[i] + s.sigma * rng.normal();
  }
  return s;
}

DgpSample sample_dgp(const DgpConfig& cfg) {
  if (cfg.n < 2) throw std::invalid_argument("sample_dgp: n must be >= 2");
  const Covariates c = gen_covariates(cfg.n, derive_seed({cfg.seed, hash_tag("covariates")}));
  return sample_outcomes(c.x, c.u, cfg.regime, cfg.kappa,
                         derive_seed({cfg.seed, hash_tag("outcomes")}));
}

void write_dgp_csv(const DgpSample& s, std::ostream& out) {
  CsvWriter w(out);
  w.row({"x1", "x2", "x3", "x4", "x5", "u", "z", "y", "alpha", "beta", "pi", "sigma"});
  for (std::size_t i = 0; i < s.x.rows(); ++i) {
    std::vector<std::string> r;
    for (std::size_t j = 0; j < s.x.cols(); ++j) r.push_back(format_double(s.x(i, j)));
    for (double v : {s.u[i], s.z[i], s.y[i], s.alpha[i], s.beta[i], s.pi[i], s.sigma}) {
      r.push_back(format_double(v));
    }
    w.row(r);
  }
}

}  // namespace cate
