#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "cate/matrix.hpp"
#include "cate/rng.hpp"

namespace cate {

enum class Activation { kRelu, kSigmoid, kIdentity };
enum class LossKind { kMse, kBce };

const char* to_string(Activation a) noexcept;
Activation activation_from_string(std::string_view s);

// One dense layer. `dropout_rate` applies to this layer's output during
// training (inverted dropout); output layers carry 0.
struct LayerSpec {
  std::size_t in_dim = 1;
  std::size_t out_dim = 1;
  Activation activation = Activation::kRelu;
  double dropout_rate = 0.0;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct Layer {
  LayerSpec spec;
  Matrix weights;  // in_dim x out_dim
  Matrix bias;     // 1 x out_dim

  friend bool operator==(const Layer&, const Layer&) = default;
};

struct MlpNetwork {
  std::vector<Layer> layers;
  std::uint64_t seed = 0;

  std::size_t input_dim() const { return layers.front().spec.in_dim; }
  std::size_t output_dim() const { return layers.back().spec.out_dim; }

  friend bool operator==(const MlpNetwork&, const MlpNetwork&) = default;
};

// Builds a network with He-normal weights for ReLU layers and Glorot-normal
// weights otherwise; biases start at zero. Throws ShapeError when
// consecutive specs do not chain or a rate is outside [0, 1).
MlpNetwork init_network(std::span<const LayerSpec> specs, std::uint64_t seed);

std::size_t count_params(const MlpNetwork& net) noexcept;

// Activations recorded by a training forward pass.
struct ForwardCache {
  Matrix input;
  std::vector<Matrix> pre;    // per layer, before activation
  std::vector<Matrix> post;   // per layer, after activation and dropout
  std::vector<Matrix> masks;  // per layer; empty when dropout was not applied
};

struct ForwardResult {
  Matrix output;
  ForwardCache cache;
};

// With training=true, dropout masks are drawn from `dropout_seed`; the same
// seed reproduces the same masks. With training=false dropout is skipped.
ForwardResult forward(const MlpNetwork& net, const Matrix& x, bool training,
                      std::uint64_t dropout_seed);

// Evaluation-mode forward pass without recording a cache.
Matrix predict(const MlpNetwork& net, const Matrix& x);

// Predictions are clamped into this band before BCE logs are taken.
inline constexpr double kBceClamp = 1e-12;

double compute_loss(const Matrix& pred, const Matrix& target, LossKind kind);
// d loss / d pred, same shape as pred.
Matrix loss_gradient(const Matrix& pred, const Matrix& target, LossKind kind);

struct Gradients {
  std::vector<Matrix> weights;
  std::vector<Matrix> biases;
};

Gradients zero_gradients(const MlpNetwork& net);

// Backpropagates `grad_output` (d loss / d output) through the recorded pass.
Gradients backward(const MlpNetwork& net, const ForwardCache& cache,
                   const Matrix& grad_output);
Gradients backward(const MlpNetwork& net, const ForwardCache& cache,
                   const Matrix& target, LossKind kind);

struct AdamState {
  Gradients m;
  Gradients v;
  std::uint64_t t = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_hat = 1e-8;
};

AdamState make_adam_state(const MlpNetwork& net, double lr = 1e-3);

// One bias-corrected Adam step; increments state.t. Throws NonFiniteError on
// a non-finite gradient without touching the network.
void adam_update(MlpNetwork& net, const Gradients& grads, AdamState& state);

struct TrainConfig {
  std::size_t epochs = 250;
  std::size_t batch_size = 64;
  LossKind loss = LossKind::kMse;
  double lr = 1e-3;
  std::uint64_t shuffle_seed = 0;
};

struct TrainResult {
  MlpNetwork net;
  std::vector<double> loss_history;  // mean training loss per epoch
  std::size_t updates = 0;
};

// Per-epoch shuffled minibatches. The final short batch is kept.
class MinibatchSchedule {
 public:
  MinibatchSchedule(std::size_t n, std::size_t batch_size, std::uint64_t seed);

  // Reshuffles and returns the batches for the next epoch.
  const std::vector<std::vector<std::size_t>>& next_epoch();
  // Seed for the next dropout mask draw.
  std::uint64_t next_dropout_seed() { return rng_.next_u64(); }

 private:
  std::size_t batch_size_;
  std::vector<std::size_t> order_;
  std::vector<std::vector<std::size_t>> batches_;
  Rng rng_;
};

// Minibatch Adam training of a single network on (x, y).
TrainResult train(MlpNetwork net, const Matrix& x, const Matrix& y,
                  const TrainConfig& cfg);

void validate(const TrainConfig& cfg, std::size_t n);

}  // namespace cate
