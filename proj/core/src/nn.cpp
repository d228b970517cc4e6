#include "cate/nn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cate/errors.hpp"

namespace cate {
namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void apply_activation(Matrix& m, Activation a) {
  switch (a) {
    case Activation::kRelu:
      for (double& v : m.values()) v = v > 0.0 ? v : 0.0;
      break;
    case Activation::kSigmoid:
      for (double& v : m.values()) v = sigmoid(v);
      break;
    case Activation::kIdentity:
      break;
  }
}

// grad <- grad * act'(pre)
void apply_activation_grad(Matrix& grad, const Matrix& pre, Activation a) {
  auto g = grad.values();
  auto p = pre.values();
  switch (a) {
    case Activation::kRelu:
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (p[i] <= 0.0) g[i] = 0.0;
      }
      break;
    case Activation::kSigmoid:
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double s = sigmoid(p[i]);
        g[i] *= s * (1.0 - s);
      }
      break;
    case Activation::kIdentity:
      break;
  }
}

Matrix affine(const Matrix& x, const Layer& layer) {
  Matrix z = matmul(x, layer.weights);
  const auto b = layer.bias.values();
  for (std::size_t r = 0; r < z.rows(); ++r) {
    auto row = z.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += b[c];
  }
  return z;
}

void check_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(what) + ": shape mismatch (" +
                     std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                     " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()) + ")");
  }
}

void check_input(const MlpNetwork& net, const Matrix& x) {
  if (net.layers.empty()) throw ShapeError("network has no layers");
  if (x.cols() != net.input_dim()) {
    throw ShapeError("network expects " + std::to_string(net.input_dim()) +
                     " inputs, got " + std::to_string(x.cols()));
  }
}

void check_bce_inputs(const Matrix& pred, const Matrix& target) {
  for (double p : pred.values()) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::domain_error("bce: prediction outside [0, 1]: " + std::to_string(p));
    }
  }
  for (double y : target.values()) {
    if (y != 0.0 && y != 1.0) throw std::domain_error("bce: target must be 0 or 1");
  }
}

}  // namespace

const char* to_string(Activation a) noexcept {
  switch (a) {
    case Activation::kRelu: return "relu";
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kIdentity: return "identity";
  }
  return "?";
}

Activation activation_from_string(std::string_view s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "sigmoid") return Activation::kSigmoid;
  if (s == "identity") return Activation::kIdentity;
  throw std::invalid_argument("unknown activation: " + std::string(s));
}

MlpNetwork init_network(std::span<const LayerSpec> specs, std::uint64_t seed) {
  if (specs.empty()) throw ShapeError("init_network: no layers");
  MlpNetwork net;
  net.seed = seed;
  Rng rng(seed);
  for (std::size_t k = 0; k < specs.size(); ++k) {
    const LayerSpec& s = specs[k];
    if (s.in_dim < 1 || s.out_dim < 1) throw ShapeError("init_network: zero-width layer");
    if (!(s.dropout_rate >= 0.0 && s.dropout_rate < 1.0)) {
      throw ShapeError("init_network: dropout rate must lie in [0, 1)");
    }
    if (k > 0 && specs[k - 1].out_dim != s.in_dim) {
      throw ShapeError("init_network: layer " + std::to_string(k - 1) + " outputs " +
                       std::to_string(specs[k - 1].out_dim) + " but layer " +
                       std::to_string(k) + " expects " + std::to_string(s.in_dim));
    }
    const double fan_in = static_cast<double>(s.in_dim);
    const double fan_out = static_cast<double>(s.out_dim);
    const double sd = s.activation == Activation::kRelu
                          ? std::sqrt(2.0 / fan_in)
                          : std::sqrt(2.0 / (fan_in + fan_out));
    Layer layer{s, Matrix(s.in_dim, s.out_dim), Matrix(1, s.out_dim)};
    for (double& w : layer.weights.values()) w = sd * rng.normal();
    net.layers.push_back(std::move(layer));
  }
  return net;
}

std::size_t count_params(const MlpNetwork& net) noexcept {
  std::size_t total = 0;
  for (const Layer& l : net.layers) total += l.spec.in_dim * l.spec.out_dim + l.spec.out_dim;
  return total;
}

ForwardResult forward(const MlpNetwork& net, const Matrix& x, bool training,
                      std::uint64_t dropout_seed) {
  check_input(net, x);
  ForwardResult result;
  ForwardCache& cache = result.cache;
  cache.input = x;
  cache.pre.reserve(net.layers.size());
  cache.post.reserve(net.layers.size());
  cache.masks.resize(net.layers.size());
  Rng rng(dropout_seed);

  const Matrix* in = &cache.input;
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    const Layer& layer = net.layers[k];
    cache.pre.push_back(affine(*in, layer));
    Matrix a = cache.pre.back();
    apply_activation(a, layer.spec.activation);
    const double p = layer.spec.dropout_rate;
    if (training && p > 0.0) {
      Matrix mask(a.rows(), a.cols());
      const double keep_scale = 1.0 / (1.0 - p);
      auto mv = mask.values();
      auto av = a.values();
      for (std::size_t i = 0; i < mv.size(); ++i) {
        mv[i] = rng.uniform() < p ? 0.0 : keep_scale;
        av[i] *= mv[i];
      }
      cache.masks[k] = std::move(mask);
    }
    cache.post.push_back(std::move(a));
    in = &cache.post.back();
  }
  result.output = cache.post.back();
  require_finite(result.output, "forward");
  return result;
}

Matrix predict(const MlpNetwork& net, const Matrix& x) {
  check_input(net, x);
  Matrix a = x;
  for (const Layer& layer : net.layers) {
    a = affine(a, layer);
    apply_activation(a, layer.spec.activation);
  }
  require_finite(a, "predict");
  return a;
}

double compute_loss(const Matrix& pred, const Matrix& target, LossKind kind) {
  check_same_shape(pred, target, "compute_loss");
  if (pred.empty()) throw ShapeError("compute_loss: empty input");
  const auto p = pred.values();
  const auto y = target.values();
  double sum = 0.0;
  if (kind == LossKind::kMse) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double d = p[i] - y[i];
      sum += d * d;
    }
  } else {
    check_bce_inputs(pred, target);
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double q = std::clamp(p[i], kBceClamp, 1.0 - kBceClamp);
      sum -= y[i] * std::log(q) + (1.0 - y[i]) * std::log(1.0 - q);
    }
  }
  return sum / static_cast<double>(p.size());
}

Matrix loss_gradient(const Matrix& pred, const Matrix& target, LossKind kind) {
  check_same_shape(pred, target, "loss_gradient");
  Matrix g(pred.rows(), pred.cols());
  const auto p = pred.values();
  const auto y = target.values();
  auto gv = g.values();
  const double inv_n = 1.0 / static_cast<double>(p.size());
  if (kind == LossKind::kMse) {
    for (std::size_t i = 0; i < p.size(); ++i) gv[i] = 2.0 * (p[i] - y[i]) * inv_n;
  } else {
    check_bce_inputs(pred, target);
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double q = std::clamp(p[i], kBceClamp, 1.0 - kBceClamp);
      gv[i] = (q - y[i]) / (q * (1.0 - q)) * inv_n;
    }
  }
  return g;
}

Gradients zero_gradients(const MlpNetwork& net) {
  Gradients g;
  for (const Layer& l : net.layers) {
    g.weights.emplace_back(l.weights.rows(), l.weights.cols());
    g.biases.emplace_back(1, l.spec.out_dim);
  }
  return g;
}

Gradients backward(const MlpNetwork& net, const ForwardCache& cache,
                   const Matrix& grad_output) {
  const std::size_t depth = net.layers.size();
  if (cache.pre.size() != depth || cache.post.size() != depth ||
      cache.masks.size() != depth) {
    throw ShapeError("backward: cache does not match network depth");
  }
  check_same_shape(grad_output, cache.post.back(), "backward");
  for (std::size_t k = 0; k < depth; ++k) {
    if (cache.pre[k].cols() != net.layers[k].spec.out_dim) {
      throw ShapeError("backward: cache does not match layer widths");
    }
  }

  Gradients grads;
  grads.weights.resize(depth);
  grads.biases.resize(depth);
  Matrix g = grad_output;
  for (std::size_t k = depth; k-- > 0;) {
    const Layer& layer = net.layers[k];
    if (!cache.masks[k].empty()) {
      auto gv = g.values();
      auto mv = cache.masks[k].values();
      for (std::size_t i = 0; i < gv.size(); ++i) gv[i] *= mv[i];
    }
    apply_activation_grad(g, cache.pre[k], layer.spec.activation);
    const Matrix& in = k == 0 ? cache.input : cache.post[k - 1];
    grads.weights[k] = matmul_tn(in, g);
    Matrix db(1, layer.spec.out_dim);
    for (std::size_t r = 0; r < g.rows(); ++r) {
      auto row = g.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) db(0, c) += row[c];
    }
    grads.biases[k] = std::move(db);
    if (k > 0) g = matmul_nt(g, layer.weights);
  }
  return grads;
}

Gradients backward(const MlpNetwork& net, const ForwardCache& cache,
                   const Matrix& target, LossKind kind) {
  if (cache.post.empty()) throw ShapeError("backward: empty cache");
  return backward(net, cache, loss_gradient(cache.post.back(), target, kind));
}

AdamState make_adam_state(const MlpNetwork& net, double lr) {
  AdamState s;
  s.m = zero_gradients(net);
  s.v = zero_gradients(net);
  s.lr = lr;
  return s;
}

void adam_update(MlpNetwork& net, const Gradients& grads, AdamState& state) {
  const std::size_t depth = net.layers.size();
  if (grads.weights.size() != depth || grads.biases.size() != depth ||
      state.m.weights.size() != depth || state.v.weights.size() != depth) {
    throw ShapeError("adam_update: gradient/state depth mismatch");
  }
  for (std::size_t k = 0; k < depth; ++k) {
    check_same_shape(grads.weights[k], net.layers[k].weights, "adam_update");
    check_same_shape(grads.biases[k], net.layers[k].bias, "adam_update");
    require_finite(grads.weights[k], "adam_update gradient");
    require_finite(grads.biases[k], "adam_update gradient");
  }

  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  auto step = [&](Matrix& param, const Matrix& grad, Matrix& m, Matrix& v) {
    auto pv = param.values();
    auto gv = grad.values();
    auto mv = m.values();
    auto vv = v.values();
    for (std::size_t i = 0; i < pv.size(); ++i) {
      mv[i] = state.beta1 * mv[i] + (1.0 - state.beta1) * gv[i];
      vv[i] = state.beta2 * vv[i] + (1.0 - state.beta2) * gv[i] * gv[i];
      const double m_hat = mv[i] / c1;
      const double v_hat = vv[i] / c2;
      pv[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps_hat);
    }
  };
  for (std::size_t k = 0; k < depth; ++k) {
    step(net.layers[k].weights, grads.weights[k], state.m.weights[k], state.v.weights[k]);
    step(net.layers[k].bias, grads.biases[k], state.m.biases[k], state.v.biases[k]);
  }
}

MinibatchSchedule::MinibatchSchedule(std::size_t n, std::size_t batch_size,
                                     std::uint64_t seed)
    : batch_size_(batch_size), order_(n), rng_(seed) {
  if (n == 0) throw ShapeError("MinibatchSchedule: no rows");
  if (batch_size == 0) throw ShapeError("MinibatchSchedule: zero batch size");
  std::iota(order_.begin(), order_.end(), std::size_t{0});
}

const std::vector<std::vector<std::size_t>>& MinibatchSchedule::next_epoch() {
  rng_.shuffle(std::span<std::size_t>(order_));
  batches_.clear();
  for (std::size_t start = 0; start < order_.size(); start += batch_size_) {
    const std::size_t end = std::min(order_.size(), start + batch_size_);
    batches_.emplace_back(order_.begin() + static_cast<std::ptrdiff_t>(start),
                          order_.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches_;
}

void validate(const TrainConfig& cfg, std::size_t n) {
  if (n == 0) throw ShapeError("train: empty data");
  if (cfg.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  if (cfg.batch_size < 1 || cfg.batch_size > n) {
    throw std::invalid_argument("train: batch size must lie in [1, n]");
  }
  if (!(cfg.lr > 0.0) || !std::isfinite(cfg.lr)) {
    throw std::invalid_argument("train: learning rate must be positive");
  }
}

TrainResult train(MlpNetwork net, const Matrix& x, const Matrix& y,
                  const TrainConfig& cfg) {
  if (x.rows() != y.rows()) throw ShapeError("train: x and y row counts differ");
  check_input(net, x);
  if (y.cols() != net.output_dim()) throw ShapeError("train: target width mismatch");
  validate(cfg, x.rows());

  TrainResult result;
  AdamState adam = make_adam_state(net, cfg.lr);
  MinibatchSchedule schedule(x.rows(), cfg.batch_size, cfg.shuffle_seed);
  result.loss_history.reserve(cfg.epochs);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    double total = 0.0;
    for (const auto& batch : schedule.next_epoch()) {
      const Matrix xb = gather_rows(x, batch);
      const Matrix yb = gather_rows(y, batch);
      ForwardResult fwd;
      try {
        fwd = forward(net, xb, true, schedule.next_dropout_seed());
      } catch (const NonFiniteError& e) {
        throw TrainingDiverged(std::string("train: ") + e.what() + " at epoch " +
                                   std::to_string(epoch),
                               epoch);
      }
      const double loss = compute_loss(fwd.output, yb, cfg.loss);
      if (!std::isfinite(loss)) {
        throw TrainingDiverged("train: loss became non-finite at epoch " +
                                   std::to_string(epoch),
                               epoch);
      }
      adam_update(net, backward(net, fwd.cache, yb, cfg.loss), adam);
      ++result.updates;
      total += loss * static_cast<double>(batch.size());
    }
    result.loss_history.push_back(total / static_cast<double>(x.rows()));
  }
  result.net = std::move(net);
  return result;
}

}  // namespace cate
