#include "cate/models.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "cate/errors.hpp"
#include "cate/rng.hpp"

namespace cate {
namespace {

std::vector<LayerSpec> mlp(std::size_t in, std::size_t h1, std::size_t h2,
                           std::size_t out, Activation out_act,
                           const NetworkOptions& opts) {
  return {
      {in, h1, opts.hidden, opts.dropout},
      {h1, h2, opts.hidden, opts.dropout},
      {h2, out, out_act, 0.0},
  };
}

void check_rows(const Matrix& x, std::size_t n, const char* what) {
  if (x.rows() != n) {
    throw ShapeError(std::string(what) + ": expected " + std::to_string(x.rows()) +
                     " rows, got " + std::to_string(n));
  }
}

bool is_degenerate(std::span<const double> z) {
  return std::all_of(z.begin(), z.end(), [&](double v) { return v == z.front(); });
}

std::uint64_t init_seed(const TrainConfig& cfg, std::string_view tag) {
  return derive_seed({cfg.shuffle_seed, hash_tag(tag), 1});
}

std::uint64_t schedule_seed(const TrainConfig& cfg, std::string_view tag) {
  return derive_seed({cfg.shuffle_seed, hash_tag(tag), 2});
}

// Shared minibatch loop for the jointly trained estimators. `step` runs one
// update on a batch and returns its mean loss.
FitDiagnostics run_epochs(std::size_t n, const TrainConfig& cfg, std::uint64_t seed,
                          const std::function<double(std::span<const std::size_t>,
                                                     MinibatchSchedule&)>& step) {
  TrainConfig clamped = cfg;
  clamped.batch_size = std::min(cfg.batch_size, n);  // small arms and toy data
  validate(clamped, n);
  FitDiagnostics diag;
  MinibatchSchedule schedule(n, clamped.batch_size, seed);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    double total = 0.0;
    for (const auto& batch : schedule.next_epoch()) {
      double loss;
      try {
        loss = step(batch, schedule);
      } catch (const NonFiniteError& e) {
        throw TrainingDiverged(std::string(e.what()) + " at epoch " + std::to_string(epoch),
                               epoch);
      }
      if (!std::isfinite(loss)) {
        throw TrainingDiverged("loss became non-finite at epoch " + std::to_string(epoch),
                               epoch);
      }
      ++diag.updates;
      total += loss * static_cast<double>(batch.size());
    }
    diag.loss_history.push_back(total / static_cast<double>(n));
  }
  return diag;
}

std::vector<double> gather(std::span<const double> v, std::span<const std::size_t> idx) {
  std::vector<double> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = v[idx[i]];
  return out;
}

std::vector<double> first_column(const Matrix& m) { return m.col(0); }

void check_pi(std::span<const double> pi_hat, const char* what) {
  for (double p : pi_hat) {
    if (!(p > 0.0 && p < 1.0)) {
      throw std::invalid_argument(std::string(what) + ": propensity outside (0, 1)");
    }
  }
}

const BcfNet* as_bcf(const CateModel& m) { return std::get_if<BcfNet>(&m); }

}  // namespace

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::kShared: return "shared";
    case Method::kBcf: return "bcf";
    case Method::kNaive: return "naive";
    case Method::kOls: return "ols";
  }
  return "?";
}

std::string_view display_name(Method m) noexcept {
  switch (m) {
    case Method::kShared: return "Shared Network";
    case Method::kBcf: return "BCF NNet";
    case Method::kNaive: return "Separate Networks";
    case Method::kOls: return "OLS Approach";
  }
  return "?";
}

Method method_from_string(std::string_view s) {
  for (Method m : {Method::kShared, Method::kBcf, Method::kNaive, Method::kOls}) {
    if (s == to_string(m) || s == display_name(m)) return m;
  }
  throw std::invalid_argument("unknown method: " + std::string(s));
}

std::vector<LayerSpec> shared_architecture(std::size_t d, const NetworkOptions& opts) {
  return mlp(d, 100, 26, 2, Activation::kIdentity, opts);
}
std::vector<LayerSpec> bcf_alpha_architecture(std::size_t d, const NetworkOptions& opts) {
  return mlp(d + 1, 60, 32, 1, Activation::kIdentity, opts);
}
std::vector<LayerSpec> bcf_beta_architecture(std::size_t d, const NetworkOptions& opts) {
  return mlp(d, 30, 20, 1, Activation::kIdentity, opts);
}
std::vector<LayerSpec> naive_architecture(std::size_t d, const NetworkOptions& opts) {
  return mlp(d, 50, 26, 1, Activation::kIdentity, opts);
}
std::vector<LayerSpec> propensity_architecture(std::size_t d, const NetworkOptions& opts) {
  return mlp(d, 100, 25, 1, Activation::kSigmoid, opts);
}

Method method_of(const CateModel& model) noexcept {
  return static_cast<Method>(model.index());
}

std::size_t input_dim(const CateModel& model) noexcept {
  return std::visit(
      [](const auto& m) -> std::size_t {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, SharedNet>) return m.net.input_dim();
        else if constexpr (std::is_same_v<T, BcfNet>) return m.beta_net.input_dim();
        else if constexpr (std::is_same_v<T, NaiveNets>) return m.y1_net.input_dim();
        else return m.delta.size();
      },
      model);
}

void require_binary(std::span<const double> z, const char* what) {
  for (double v : z) {
    if (v != 0.0 && v != 1.0) {
      throw std::invalid_argument(std::string(what) + ": treatment must be 0 or 1");
    }
  }
}

PropensityModel fit_propensity(const Matrix& x, std::span<const double> z,
                               const TrainConfig& cfg, const NetworkOptions& opts) {
  check_rows(x, z.size(), "fit_propensity");
  require_binary(z, "fit_propensity");
  if (z.empty() || is_degenerate(z)) {
    throw std::invalid_argument("fit_propensity: both treatment classes must be present");
  }
  TrainConfig c = cfg;
  c.batch_size = std::min(cfg.batch_size, x.rows());
  c.loss = LossKind::kBce;
  c.shuffle_seed = schedule_seed(cfg, "propensity");
  const auto specs = propensity_architecture(x.cols(), opts);
  TrainResult r = train(init_network(specs, init_seed(cfg, "propensity")), x,
                        Matrix::column(z), c);
  return {std::move(r.net), {std::move(r.loss_history), r.updates, false}};
}

std::vector<double> predict_propensity(const PropensityModel& model, const Matrix& x) {
  std::vector<double> p = first_column(predict(model.net, x));
  for (double& v : p) v = std::clamp(v, kBceClamp, 1.0 - kBceClamp);
  return p;
}

SharedNet fit_shared(const Matrix& x, std::span<const double> z,
                     std::span<const double> y, const TrainConfig& cfg,
                     const NetworkOptions& opts) {
  check_rows(x, z.size(), "fit_shared");
  check_rows(x, y.size(), "fit_shared");
  require_binary(z, "fit_shared");
  SharedNet model{init_network(shared_architecture(x.cols(), opts), init_seed(cfg, "shared")),
                  {}};
  AdamState adam = make_adam_state(model.net, cfg.lr);

  auto step = [&](std::span<const std::size_t> batch, MinibatchSchedule& schedule) {
    const Matrix xb = gather_rows(x, batch);
    const ForwardResult fwd = forward(model.net, xb, true, schedule.next_dropout_seed());
    const double m = static_cast<double>(batch.size());
    Matrix grad(batch.size(), 2);
    double loss = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const double zi = z[batch[i]];
      const double resid = fwd.output(i, 0) + fwd.output(i, 1) * zi - y[batch[i]];
      loss += resid * resid;
      grad(i, 0) = 2.0 * resid / m;
      grad(i, 1) = 2.0 * resid * zi / m;
    }
    adam_update(model.net, backward(model.net, fwd.cache, grad), adam);
    return loss / m;
  };
  model.diagnostics = run_epochs(x.rows(), cfg, schedule_seed(cfg, "shared"), step);
  model.diagnostics.degenerate_treatment = is_degenerate(z);
  return model;
}

BcfNet fit_bcf(const Matrix& x, std::span<const double> z, std::span<const double> y,
               std::span<const double> pi_hat, const TrainConfig& cfg,
               const NetworkOptions& opts) {
  check_rows(x, z.size(), "fit_bcf");
  check_rows(x, y.size(), "fit_bcf");
  check_rows(x, pi_hat.size(), "fit_bcf");
  require_binary(z, "fit_bcf");
  check_pi(pi_hat, "fit_bcf");

  const Matrix x_alpha = append_column(x, pi_hat);
  BcfNet model{
      init_network(bcf_alpha_architecture(x.cols(), opts), init_seed(cfg, "bcf.alpha")),
      init_network(bcf_beta_architecture(x.cols(), opts), init_seed(cfg, "bcf.beta")),
      std::nullopt,
      {}};
  AdamState adam_alpha = make_adam_state(model.alpha_net, cfg.lr);
  AdamState adam_beta = make_adam_state(model.beta_net, cfg.lr);

  auto step = [&](std::span<const std::size_t> batch, MinibatchSchedule& schedule) {
    const Matrix xa = gather_rows(x_alpha, batch);
    const Matrix xb = gather_rows(x, batch);
    const ForwardResult fa = forward(model.alpha_net, xa, true, schedule.next_dropout_seed());
    const ForwardResult fb = forward(model.beta_net, xb, true, schedule.next_dropout_seed());
    const double m = static_cast<double>(batch.size());
    Matrix grad_alpha(batch.size(), 1);
    Matrix grad_beta(batch.size(), 1);
    double loss = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const double zi = z[batch[i]];
      const double resid = fa.output(i, 0) + fb.output(i, 0) * zi - y[batch[i]];
      loss += resid * resid;
      grad_alpha(i, 0) = 2.0 * resid / m;
      grad_beta(i, 0) = 2.0 * resid * zi / m;
    }
    const Gradients ga = backward(model.alpha_net, fa.cache, grad_alpha);
    const Gradients gb = backward(model.beta_net, fb.cache, grad_beta);
    adam_update(model.alpha_net, ga, adam_alpha);
    adam_update(model.beta_net, gb, adam_beta);
    return loss / m;
  };
  model.diagnostics = run_epochs(x.rows(), cfg, schedule_seed(cfg, "bcf"), step);
  model.diagnostics.degenerate_treatment = is_degenerate(z);
  return model;
}

NaiveNets fit_naive(const Matrix& x, std::span<const double> z,
                    std::span<const double> y, const TrainConfig& cfg,
                    const NetworkOptions& opts) {
  check_rows(x, z.size(), "fit_naive");
  check_rows(x, y.size(), "fit_naive");
  require_binary(z, "fit_naive");
  std::vector<std::size_t> treated, control;
  for (std::size_t i = 0; i < z.size(); ++i) (z[i] == 1.0 ? treated : control).push_back(i);
  if (treated.empty() || control.empty()) {
    throw std::invalid_argument("fit_naive: both treatment groups must be nonempty");
  }

  auto fit_arm = [&](const std::vector<std::size_t>& rows, std::string_view tag) {
    TrainConfig c = cfg;
    c.loss = LossKind::kMse;
    c.batch_size = std::min(cfg.batch_size, rows.size());
    c.shuffle_seed = schedule_seed(cfg, tag);
    const auto specs = naive_architecture(x.cols(), opts);
    return train(init_network(specs, init_seed(cfg, tag)), gather_rows(x, rows),
                 Matrix::column(gather(y, rows)), c);
  };
  TrainResult r1 = fit_arm(treated, "naive.y1");
  TrainResult r0 = fit_arm(control, "naive.y0");
  return {std::move(r1.net), std::move(r0.net),
          {std::move(r1.loss_history), r1.updates, false},
          {std::move(r0.loss_history), r0.updates, false}};
}

OlsModel fit_ols(const Matrix& x, std::span<const double> z, std::span<const double> y) {
  check_rows(x, z.size(), "fit_ols");
  check_rows(x, y.size(), "fit_ols");
  require_binary(z, "fit_ols");
  const std::size_t n = x.rows(), d = x.cols();
  const std::size_t p = 2 + 2 * d;
  if (n == 0) throw ShapeError("fit_ols: no rows");

  Eigen::MatrixXd design(n, p);
  Eigen::VectorXd target(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    design(r, 0) = 1.0;
    design(r, 1) = z[i];
    for (std::size_t j = 0; j < d; ++j) {
      design(r, static_cast<Eigen::Index>(2 + j)) = x(i, j);
      design(r, static_cast<Eigen::Index>(2 + d + j)) = z[i] * x(i, j);
    }
    target(r) = y[i];
  }

  OlsModel model;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  Eigen::VectorXd coef;
  if (qr.rank() == static_cast<Eigen::Index>(p)) {
    coef = qr.solve(target);
  } else {
    // Minimum-norm solution, i.e. the pseudo-inverse applied to y.
    model.rank_deficient = true;
    coef = Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(design).solve(target);
  }
  model.intercept = coef(0);
  model.beta_z = coef(1);
  model.delta.resize(d);
  model.gamma.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    model.delta[j] = coef(static_cast<Eigen::Index>(2 + j));
    model.gamma[j] = coef(static_cast<Eigen::Index>(2 + d + j));
  }
  return model;
}

std::vector<double> predict_cate(const CateModel& model, const Matrix& x,
                                 std::optional<std::span<const double>> /*pi_hat*/) {
  if (x.cols() != input_dim(model)) {
    throw ShapeError("predict_cate: model expects " + std::to_string(input_dim(model)) +
                     " covariates, got " + std::to_string(x.cols()));
  }
  return std::visit(
      [&](const auto& m) -> std::vector<double> {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, SharedNet>) {
          return predict(m.net, x).col(1);
        } else if constexpr (std::is_same_v<T, BcfNet>) {
          return first_column(predict(m.beta_net, x));
        } else if constexpr (std::is_same_v<T, NaiveNets>) {
          std::vector<double> y1 = first_column(predict(m.y1_net, x));
          const std::vector<double> y0 = first_column(predict(m.y0_net, x));
          for (std::size_t i = 0; i < y1.size(); ++i) y1[i] -= y0[i];
          return y1;
        } else {
          std::vector<double> out(x.rows(), m.beta_z);
          for (std::size_t i = 0; i < x.rows(); ++i) {
            for (std::size_t j = 0; j < x.cols(); ++j) out[i] += x(i, j) * m.gamma[j];
          }
          return out;
        }
      },
      model);
}

std::vector<double> predict_prognostic(const CateModel& model, const Matrix& x,
                                       std::optional<std::span<const double>> pi_hat) {
  if (x.cols() != input_dim(model)) {
    throw ShapeError("predict_prognostic: model expects " +
                     std::to_string(input_dim(model)) + " covariates, got " +
                     std::to_string(x.cols()));
  }
  if (const BcfNet* bcf = as_bcf(model)) {
    std::vector<double> owned;
    std::span<const double> pi;
    if (pi_hat) {
      pi = *pi_hat;
    } else if (bcf->propensity) {
      owned = predict_propensity(*bcf->propensity, x);
      pi = owned;
    } else {
      throw std::invalid_argument(
          "predict_prognostic: BCF model needs pi_hat or an attached propensity model");
    }
    if (pi.size() != x.rows()) throw ShapeError("predict_prognostic: pi_hat length mismatch");
    check_pi(pi, "predict_prognostic");
    return first_column(predict(bcf->alpha_net, append_column(x, pi)));
  }
  return std::visit(
      [&](const auto& m) -> std::vector<double> {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, SharedNet>) {
          return predict(m.net, x).col(0);
        } else if constexpr (std::is_same_v<T, NaiveNets>) {
          return first_column(predict(m.y0_net, x));
        } else if constexpr (std::is_same_v<T, OlsModel>) {
          std::vector<double> out(x.rows(), m.intercept);
          for (std::size_t i = 0; i < x.rows(); ++i) {
            for (std::size_t j = 0; j < x.cols(); ++j) out[i] += x(i, j) * m.delta[j];
          }
          return out;
        } else {
          return {};
        }
      },
      model);
}

std::size_t count_params(const CateModel& model) noexcept {
  return std::visit(
      [](const auto& m) -> std::size_t {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, SharedNet>) return count_params(m.net);
        else if constexpr (std::is_same_v<T, BcfNet>)
          return count_params(m.alpha_net) + count_params(m.beta_net);
        else if constexpr (std::is_same_v<T, NaiveNets>)
          return count_params(m.y1_net) + count_params(m.y0_net);
        else return 2 + m.delta.size() + m.gamma.size();
      },
      model);
}

}  // namespace cate
