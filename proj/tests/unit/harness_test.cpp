#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cate/errors.hpp"
#include "cate/harness.hpp"
#include "cate/report.hpp"

namespace cate {
namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.sample_sizes = {120, 200};
  cfg.n_trials = 2;
  cfg.test_size = 500;
  cfg.methods = {Method::kShared, Method::kOls};
  cfg.hyper.epochs = 3;
  cfg.hyper.propensity_epochs = 3;
  return cfg;
}

TrialMetrics without_runtime(TrialMetrics m) {
  m.runtime_seconds = 0.0;
  return m;
}

TEST(Harness, SameSeedsSameTrial) {
  const Covariates c = gen_covariates(150, 1);
  const TestSample test = make_test_sample(300, Regime::kSmallTreatment, 2);
  Hyperparams h;
  h.epochs = 3;
  h.propensity_epochs = 3;
  const TrialSeeds seeds{11, 12, std::nullopt};
  for (Method m : {Method::kShared, Method::kBcf, Method::kNaive, Method::kOls}) {
    const auto a = run_trial(c.x, c.u, seeds, m, Regime::kSmallTreatment, 1.0, test, h);
    const auto b = run_trial(c.x, c.u, seeds, m, Regime::kSmallTreatment, 1.0, test, h);
    EXPECT_EQ(without_runtime(a), without_runtime(b)) << to_string(m);
  }
}

TEST(Harness, OlsIsExactOnNoiselessLinearData) {
  const Covariates c = gen_covariates(200, 3);
  std::vector<double> z(200), y(200), beta(200);
  for (std::size_t i = 0; i < 200; ++i) {
    z[i] = i % 3 == 0 ? 1.0 : 0.0;
    beta[i] = 0.5 + 0.3 * c.x(i, 0) - 0.2 * c.x(i, 4);
    y[i] = 1.0 + c.x(i, 1) + beta[i] * z[i];
  }
  const CateModel m = fit_method(Method::kOls, c.x, z, y, 0, {});
  const TrialMetrics t = trial_metrics(predict_cate(m, c.x), beta, beta, 0.0);
  EXPECT_LT(t.rmse, 1e-6);
}

TEST(Harness, SeedsDifferAcrossRoles) {
  EXPECT_NE(data_seed(42, 250, 0), data_seed(42, 250, 1));
  EXPECT_NE(data_seed(42, 250, 0), data_seed(42, 500, 0));
  EXPECT_NE(trial_seed(42, 250, Method::kShared, 0), trial_seed(42, 250, Method::kBcf, 0));
  EXPECT_NE(design_seed(42, 250), test_seed(42, 250));
}

TEST(Harness, OneRowPerSampleSizeForSingleMethod) {
  ExperimentConfig cfg = small_config();
  cfg.n_trials = 1;
  cfg.methods = {Method::kOls};
  const auto res = run_experiment(cfg);
  ASSERT_EQ(res.table.size(), 2u);
  EXPECT_EQ(res.table[0].key.n, 120u);
  EXPECT_EQ(res.table[1].key.n, 200u);
  EXPECT_EQ(res.table[0].trials, 1u);
}

TEST(Harness, ParallelRunMatchesSerialRun) {
  ExperimentConfig cfg = small_config();
  const auto serial = run_experiment(cfg);
  cfg.parallelism = 3;
  const auto parallel = run_experiment(cfg);
  ASSERT_EQ(serial.trials.size(), parallel.trials.size());
  for (std::size_t i = 0; i < serial.trials.size(); ++i) {
    ASSERT_TRUE(serial.trials[i].metrics && parallel.trials[i].metrics);
    EXPECT_EQ(without_runtime(*serial.trials[i].metrics),
              without_runtime(*parallel.trials[i].metrics));
  }
}

TEST(Harness, TruthColumnsAgreeAcrossMethodsInACell) {
  ExperimentConfig cfg = small_config();
  cfg.methods = {Method::kShared, Method::kBcf, Method::kNaive, Method::kOls};
  const auto res = run_experiment(cfg);
  ASSERT_EQ(res.table.size(), 8u);
  for (const ResultsRow& r : res.table) {
    for (const ResultsRow& s : res.table) {
      if (r.key.n != s.key.n) continue;
      EXPECT_EQ(r.true_ate, s.true_ate);
      EXPECT_EQ(r.true_mean_alpha, s.true_mean_alpha);
    }
  }
}

TEST(Harness, RepeatedRunsGiveIdenticalCsvApartFromRuntime) {
  const ExperimentConfig cfg = small_config();
  auto render = [&] {
    ResultsTable t = run_experiment(cfg).table;
    for (ResultsRow& r : t) r.mean_runtime_s = 0.0;
    std::ostringstream out;
    write_results_csv(t, out);
    return out.str();
  };
  EXPECT_EQ(render(), render());
}

TEST(Harness, FixedTreatmentKeepsZAcrossTrials) {
  const Covariates c = gen_covariates(100, 4);
  ExperimentConfig cfg = small_config();
  cfg.redraw_treatment = false;
  EXPECT_NO_THROW(run_experiment(cfg));
}

TEST(Harness, WritesAllOutputs) {
  const ExperimentConfig cfg = small_config();
  const auto res = run_experiment(cfg);
  const auto dir = std::filesystem::temp_directory_path() / "cate_harness_outputs";
  std::filesystem::remove_all(dir);
  const auto files = write_experiment_outputs(res, cfg, dir);
  for (const char* name : {"results.csv", "results.md", "trials.csv", "bias_vs_n.csv",
                           "rmse_vs_n.csv", "trial_scatter.csv"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / name)) << name;
  }
  std::ifstream in(dir / "bias_vs_n.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "n,shared,ols");
  std::filesystem::remove_all(dir);
}

TEST(Harness, ConfigValidation) {
  ExperimentConfig cfg = small_config();
  cfg.n_trials = 0;
  EXPECT_THROW(validate(cfg), ConfigError);
  cfg = small_config();
  cfg.methods.clear();
  EXPECT_THROW(validate(cfg), ConfigError);
  cfg = small_config();
  cfg.kappa = 0.0;
  EXPECT_THROW(run_experiment(cfg), ConfigError);
}

}  // namespace
}  // namespace cate
