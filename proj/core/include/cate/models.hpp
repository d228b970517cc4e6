#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "cate/matrix.hpp"
#include "cate/nn.hpp"

namespace cate {

enum class Method { kShared, kBcf, kNaive, kOls };

// Short identifiers used in files and flags: shared, bcf, naive, ols.
std::string_view to_string(Method m) noexcept;
// Table labels: "Shared Network", "BCF NNet", "Separate Networks", "OLS Approach".
std::string_view display_name(Method m) noexcept;
Method method_from_string(std::string_view s);

// Knobs shared by every network-based estimator.
struct NetworkOptions {
  double dropout = 0.25;
  Activation hidden = Activation::kRelu;
};

// d -> 100 -> 26 -> 2 (alpha and beta heads).
std::vector<LayerSpec> shared_architecture(std::size_t d, const NetworkOptions& opts = {});
// (d + 1) -> 60 -> 32 -> 1; the extra input is the propensity estimate.
std::vector<LayerSpec> bcf_alpha_architecture(std::size_t d, const NetworkOptions& opts = {});
// d -> 30 -> 20 -> 1.
std::vector<LayerSpec> bcf_beta_architecture(std::size_t d, const NetworkOptions& opts = {});
// d -> 50 -> 26 -> 1, one per treatment arm.
std::vector<LayerSpec> naive_architecture(std::size_t d, const NetworkOptions& opts = {});
// d -> 100 -> 25 -> 1 with a sigmoid output.
std::vector<LayerSpec> propensity_architecture(std::size_t d, const NetworkOptions& opts = {});

struct FitDiagnostics {
  std::vector<double> loss_history;
  std::size_t updates = 0;
  // All rows treated or all rows control; the beta part is unidentified.
  bool degenerate_treatment = false;
};

struct PropensityModel {
  MlpNetwork net;
  FitDiagnostics diagnostics;
};

// One network with a two-node parameter layer: column 0 is alpha(x),
// column 1 is beta(x); the fitted outcome is alpha + beta * z.
struct SharedNet {
  MlpNetwork net;
  FitDiagnostics diagnostics;
};

// Separate prognostic and effect networks, no shared weights.
struct BcfNet {
  MlpNetwork alpha_net;  // inputs: x, pi_hat(x)
  MlpNetwork beta_net;   // inputs: x
  std::optional<PropensityModel> propensity;
  FitDiagnostics diagnostics;
};

struct NaiveNets {
  MlpNetwork y1_net;
  MlpNetwork y0_net;
  FitDiagnostics y1_diagnostics;
  FitDiagnostics y0_diagnostics;
};

// y = intercept + beta_z z + x.delta + z x.gamma, fitted by least squares.
struct OlsModel {
  double intercept = 0.0;
  double beta_z = 0.0;
  std::vector<double> delta;
  std::vector<double> gamma;
  bool rank_deficient = false;
};

using CateModel = std::variant<SharedNet, BcfNet, NaiveNets, OlsModel>;

Method method_of(const CateModel& model) noexcept;
std::size_t input_dim(const CateModel& model) noexcept;

// Throws std::invalid_argument unless every entry is exactly 0 or 1.
void require_binary(std::span<const double> z, const char* what);

PropensityModel fit_propensity(const Matrix& x, std::span<const double> z,
                               const TrainConfig& cfg, const NetworkOptions& opts = {});

SharedNet fit_shared(const Matrix& x, std::span<const double> z,
                     std::span<const double> y, const TrainConfig& cfg,
                     const NetworkOptions& opts = {});

// `pi_hat` is held fixed during outcome training.
BcfNet fit_bcf(const Matrix& x, std::span<const double> z, std::span<const double> y,
               std::span<const double> pi_hat, const TrainConfig& cfg,
               const NetworkOptions& opts = {});

NaiveNets fit_naive(const Matrix& x, std::span<const double> z,
                    std::span<const double> y, const TrainConfig& cfg,
                    const NetworkOptions& opts = {});

OlsModel fit_ols(const Matrix& x, std::span<const double> z, std::span<const double> y);

// Estimated beta(x) per row. The BCF effect network does not read pi_hat.
std::vector<double> predict_cate(const CateModel& model, const Matrix& x,
                                 std::optional<std::span<const double>> pi_hat = {});

// Estimated alpha(x) = E[Y | X = x, Z = 0] per row. A BCF model needs
// `pi_hat` or an attached propensity model.
std::vector<double> predict_prognostic(const CateModel& model, const Matrix& x,
                                       std::optional<std::span<const double>> pi_hat = {});

// Entries lie strictly inside (0, 1).
std::vector<double> predict_propensity(const PropensityModel& model, const Matrix& x);

std::size_t count_params(const CateModel& model) noexcept;

}  // namespace cate
