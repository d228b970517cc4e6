#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cate/dgp.hpp"
#include "cate/matrix.hpp"
#include "cate/metrics.hpp"
#include "cate/models.hpp"

namespace cate {

struct Hyperparams {
  std::size_t epochs = 250;
  std::size_t batch_size = 64;
  double lr = 1e-3;
  std::size_t propensity_epochs = 250;
  NetworkOptions network;

  friend bool operator==(const Hyperparams& a, const Hyperparams& b) {
    return a.epochs == b.epochs && a.batch_size == b.batch_size && a.lr == b.lr &&
           a.propensity_epochs == b.propensity_epochs &&
           a.network.dropout == b.network.dropout && a.network.hidden == b.network.hidden;
  }
};

struct ExperimentConfig {
  std::vector<std::size_t> sample_sizes{250, 500, 1000};
  std::size_t n_trials = 100;
  std::size_t test_size = 10000;
  Regime regime = Regime::kSmallTreatment;
  double kappa = 1.0;
  std::vector<Method> methods{Method::kShared, Method::kBcf, Method::kNaive, Method::kOls};
  std::uint64_t base_seed = 42;
  std::size_t parallelism = 1;
  // Redraw Z with the noise on every trial. When false, Z is drawn once per
  // sample size and only the noise varies.
  bool redraw_treatment = true;
  Hyperparams hyper;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

void validate(const ExperimentConfig& cfg);

// Fixed evaluation rows: covariates with their true effect and prognosis.
struct TestSample {
  Matrix x;
  std::vector<double> beta;
  std::vector<double> alpha;
};

TestSample make_test_sample(std::size_t size, Regime regime, std::uint64_t seed);

// Seeds for one trial. `data` drives Z and the noise and is shared by every
// method in the same trial; `fit` drives initialization, dropout and
// shuffling and is specific to the method.
struct TrialSeeds {
  std::uint64_t data = 0;
  std::uint64_t fit = 0;
  std::optional<std::uint64_t> fixed_treatment;  // set when Z is not redrawn
};

std::uint64_t design_seed(std::uint64_t base_seed, std::size_t n);
std::uint64_t test_seed(std::uint64_t base_seed, std::size_t n);
std::uint64_t data_seed(std::uint64_t base_seed, std::size_t n, std::size_t trial);
std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t n, Method method,
                         std::size_t trial);

// Fits `method` to the candidate model on one draw and returns a fitted model.
CateModel fit_method(Method method, const Matrix& x, std::span<const double> z,
                     std::span<const double> y, std::uint64_t fit_seed,
                     const Hyperparams& hyper);

// Draws (Z, noise) on the fixed design, fits `method`, and scores its CATE
// predictions on `test`. Throws TrainingDiverged when training blows up.
TrialMetrics run_trial(const Matrix& x_train, std::span<const double> u_train,
                       const TrialSeeds& seeds, Method method, Regime regime, double kappa,
                       const TestSample& test, const Hyperparams& hyper);

struct TrialRecord {
  Method method = Method::kShared;
  std::size_t n = 0;
  std::size_t trial = 0;
  std::optional<TrialMetrics> metrics;  // empty when the trial failed
  std::string error;
};

struct ExperimentResult {
  ResultsTable table;               // ordered by (n, method)
  std::vector<TrialRecord> trials;  // ordered by (n, method, trial)
};

using TrialCallback = std::function<void(const TrialRecord&)>;

// Runs n_trials x |methods| trials per sample size on up to `parallelism`
// threads. Output order does not depend on scheduling. Throws when every
// trial of a cell fails.
ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                const TrialCallback& on_trial = nullptr);

// results.csv, results.md, trials.csv, bias_vs_n.csv, rmse_vs_n.csv and
// trial_scatter.csv under `dir`. Returns the written paths.
std::vector<std::filesystem::path> write_experiment_outputs(
    const ExperimentResult& result, const ExperimentConfig& cfg,
    const std::filesystem::path& dir);

}  // namespace cate
