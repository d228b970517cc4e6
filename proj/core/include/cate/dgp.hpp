#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "cate/matrix.hpp"

namespace cate {

// Treatment-to-prognosis ratio of the simulated effect function.
enum class Regime { kSmallTreatment, kLargeTreatment };

std::string_view to_string(Regime r) noexcept;  // "small" / "large"
Regime regime_from_string(std::string_view s);

inline constexpr std::size_t kDgpCovariates = 5;

struct DgpConfig {
  std::size_t n = 1000;
  Regime regime = Regime::kSmallTreatment;
  double kappa = 1.0;
  std::uint64_t seed = 0;
};

struct Covariates {
  Matrix x;               // n x 5
  std::vector<double> u;  // uniform(0, 1) selection noise
};

// A draw from the targeted-selection process with every latent truth kept.
struct DgpSample {
  Matrix x;
  std::vector<double> u;
  std::vector<double> z;
  std::vector<double> y;
  std::vector<double> alpha;
  std::vector<double> beta;
  std::vector<double> pi;
  double sigma = 0.0;
};

// Standard normal CDF.
double norm_cdf(double x) noexcept;

// Sample standard deviation (n - 1 denominator).
double sample_sd(std::span<const double> v);

// Columns: x1..x3 ~ N(0,1), x4 ~ Binomial(2, 0.5), x5 ~ Bernoulli(0.5).
Covariates gen_covariates(std::size_t n, std::uint64_t seed);

// 0.20 + 0.5 x1 x4 (small) or 5 + 0.5 x1 x4 (large).
std::vector<double> true_beta(const Matrix& x, Regime regime);
// 0.5 cos(2 x1) + 0.95 |x3 x5| - 0.2 x2 + 1.5
std::vector<double> true_alpha(const Matrix& x);
// 0.70 Phi(alpha / sd(alpha) - 3.5) + u / 10 + 0.10
std::vector<double> true_pi(std::span<const double> alpha, std::span<const double> u);

DgpSample sample_dgp(const DgpConfig& cfg);

// Draws Z and Y on a fixed design (x, u). sigma = sd(alpha) * kappa.
// With `treatment_seed` set, Z is drawn from it and only the noise uses
// `outcome_seed`; otherwise both come from `outcome_seed`.
DgpSample sample_outcomes(const Matrix& x, std::span<const double> u, Regime regime,
                          double kappa, std::uint64_t outcome_seed,
                          std::optional<std::uint64_t> treatment_seed = std::nullopt);

// Header: x1,x2,x3,x4,x5,u,z,y,alpha,beta,pi,sigma
void write_dgp_csv(const DgpSample& sample, std::ostream& out);

}  // namespace cate
