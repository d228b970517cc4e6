#include "cate/harness.hpp"

#include <atomic>
#include <chrono>
#include <exception>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "cate/csv.hpp"
#include "cate/errors.hpp"
#include "cate/report.hpp"
#include "cate/rng.hpp"

namespace cate {
namespace {

TrainConfig outcome_config(const Hyperparams& h, std::size_t n, std::uint64_t seed) {
  TrainConfig c;
  c.epochs = h.epochs;
  c.batch_size = std::min(h.batch_size, n);
  c.lr = h.lr;
  c.loss = LossKind::kMse;
  c.shuffle_seed = seed;
  return c;
}

std::ofstream open_output(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

const ResultsRow* find_row(const ResultsTable& t, Method m, std::size_t n) {
  for (const ResultsRow& r : t) {
    if (r.key.method == m && r.key.n == n) return &r;
  }
  return nullptr;
}

void write_vs_n(const ExperimentResult& result, const ExperimentConfig& cfg,
                const std::filesystem::path& path, double ResultsRow::*field) {
  std::ofstream out = open_output(path);
  CsvWriter w(out);
  std::vector<std::string> header{"n"};
  for (Method m : cfg.methods) header.emplace_back(to_string(m));
  w.row(header);
  for (std::size_t n : cfg.sample_sizes) {
    std::vector<std::string> r{std::to_string(n)};
    for (Method m : cfg.methods) {
      const ResultsRow* row = find_row(result.table, m, n);
      r.push_back(row ? format_double(row->*field) : "");
    }
    w.row(r);
  }
}

}  // namespace

void validate(const ExperimentConfig& cfg) {
  if (cfg.sample_sizes.empty()) throw ConfigError("experiment: no sample sizes");
  for (std::size_t n : cfg.sample_sizes) {
    if (n < 2) throw ConfigError("experiment: sample sizes must be >= 2");
  }
  if (cfg.n_trials < 1) throw ConfigError("experiment: trials must be >= 1");
  if (cfg.test_size < 2) throw ConfigError("experiment: test_size must be >= 2");
  if (!(cfg.kappa > 0.0)) throw ConfigError("experiment: kappa must be > 0");
  if (cfg.methods.empty()) throw ConfigError("experiment: no methods selected");
  if (cfg.parallelism < 1) throw ConfigError("experiment: parallelism must be >= 1");
  if (cfg.hyper.epochs < 1 || cfg.hyper.propensity_epochs < 1) {
    throw ConfigError("experiment: epochs must be >= 1");
  }
  if (cfg.hyper.batch_size < 1) throw ConfigError("experiment: batch size must be >= 1");
  if (!(cfg.hyper.lr > 0.0)) throw ConfigError("experiment: learning rate must be > 0");
  if (!(cfg.hyper.network.dropout >= 0.0 && cfg.hyper.network.dropout < 1.0)) {
    throw ConfigError("experiment: dropout must lie in [0, 1)");
  }
}

TestSample make_test_sample(std::size_t size, Regime regime, std::uint64_t seed) {
  Covariates c = gen_covariates(size, seed);
  TestSample t;
  t.beta = true_beta(c.x, regime);
  t.alpha = true_alpha(c.x);
  t.x = std::move(c.x);
  return t;
}

std::uint64_t design_seed(std::uint64_t base_seed, std::size_t n) {
  return derive_seed({base_seed, n, hash_tag("design")});
}

std::uint64_t test_seed(std::uint64_t base_seed, std::size_t n) {
  return derive_seed({base_seed, n, hash_tag("test")});
}

std::uint64_t data_seed(std::uint64_t base_seed, std::size_t n, std::size_t trial) {
  return derive_seed({base_seed, n, hash_tag("data"), trial});
}

std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t n, Method method,
                         std::size_t trial) {
  return derive_seed({base_seed, n, hash_tag(to_string(method)), trial});
}

CateModel fit_method(Method method, const Matrix& x, std::span<const double> z,
                     std::span<const double> y, std::uint64_t fit_seed,
                     const Hyperparams& hyper) {
  const TrainConfig cfg = outcome_config(hyper, x.rows(), fit_seed);
  switch (method) {
    case Method::kShared:
      return fit_shared(x, z, y, cfg, hyper.network);
    case Method::kBcf: {
      TrainConfig pcfg = cfg;
      pcfg.epochs = hyper.propensity_epochs;
      pcfg.loss = LossKind::kBce;
      PropensityModel prop = fit_propensity(x, z, pcfg, hyper.network);
      const std::vector<double> pi_hat = predict_propensity(prop, x);
      BcfNet bcf = fit_bcf(x, z, y, pi_hat, cfg, hyper.network);
      bcf.propensity = std::move(prop);
      return bcf;
    }
    case Method::kNaive:
      return fit_naive(x, z, y, cfg, hyper.network);
    case Method::kOls:
      return fit_ols(x, z, y);
  }
  throw std::invalid_argument("fit_method: unknown method");
}

TrialMetrics run_trial(const Matrix& x_train, std::span<const double> u_train,
                       const TrialSeeds& seeds, Method method, Regime regime, double kappa,
                       const TestSample& test, const Hyperparams& hyper) {
  const auto start = std::chrono::steady_clock::now();
  const DgpSample draw =
      sample_outcomes(x_train, u_train, regime, kappa, seeds.data, seeds.fixed_treatment);
  const CateModel model = fit_method(method, x_train, draw.z, draw.y, seeds.fit, hyper);
  const std::vector<double> beta_hat = predict_cate(model, test.x);
  const double runtime =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return trial_metrics(beta_hat, test.beta, test.alpha, runtime);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const TrialCallback& on_trial) {
  validate(cfg);

  struct Design {
    std::size_t n;
    Covariates train;
    TestSample test;
  };
  std::vector<Design> designs;
  for (std::size_t n : cfg.sample_sizes) {
    designs.push_back({n, gen_covariates(n, design_seed(cfg.base_seed, n)),
                       make_test_sample(cfg.test_size, cfg.regime, test_seed(cfg.base_seed, n))});
  }

  struct Work {
    std::size_t design;
    Method method;
    std::size_t trial;
  };
  std::vector<Work> work;
  for (std::size_t d = 0; d < designs.size(); ++d) {
    for (Method m : cfg.methods) {
      for (std::size_t t = 0; t < cfg.n_trials; ++t) work.push_back({d, m, t});
    }
  }

  ExperimentResult result;
  result.trials.resize(work.size());
  std::atomic<std::size_t> next{0};
  std::mutex callback_mutex;
  std::exception_ptr fatal;
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < work.size(); i = next.fetch_add(1)) {
      const Work& w = work[i];
      const Design& d = designs[w.design];
      TrialRecord rec{w.method, d.n, w.trial, std::nullopt, {}};
      TrialSeeds seeds{data_seed(cfg.base_seed, d.n, w.trial),
                       trial_seed(cfg.base_seed, d.n, w.method, w.trial), std::nullopt};
      if (!cfg.redraw_treatment) {
        seeds.fixed_treatment = derive_seed({design_seed(cfg.base_seed, d.n), hash_tag("z")});
      }
      try {
        rec.metrics = run_trial(d.train.x, d.train.u, seeds, w.method, cfg.regime, cfg.kappa,
                                d.test, cfg.hyper);
      } catch (const NonFiniteError& e) {
        rec.error = e.what();
      } catch (const std::invalid_argument& e) {
        // e.g. a draw with an empty treatment arm for the naive fit
        rec.error = e.what();
      } catch (...) {
        std::lock_guard lock(callback_mutex);
        if (!fatal) fatal = std::current_exception();
        next.store(work.size());
        return;
      }
      result.trials[i] = rec;
      if (on_trial) {
        std::lock_guard lock(callback_mutex);
        on_trial(rec);
      }
    }
  };

  const std::size_t threads = std::min(cfg.parallelism, work.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (fatal) std::rethrow_exception(fatal);

  for (const Design& d : designs) {
    for (Method m : cfg.methods) {
      std::vector<TrialMetrics> ok;
      std::size_t failed = 0;
      for (const TrialRecord& r : result.trials) {
        if (r.n != d.n || r.method != m) continue;
        if (r.metrics) ok.push_back(*r.metrics);
        else ++failed;
      }
      if (ok.empty()) {
        throw std::runtime_error("experiment: every trial failed for method " +
                                 std::string(to_string(m)) + " at n=" + std::to_string(d.n));
      }
      ResultsRow row = aggregate_results(ok, {m, d.n, cfg.regime});
      row.failed_trials = failed;
      result.table.push_back(row);
    }
  }
  return result;
}

std::vector<std::filesystem::path> write_experiment_outputs(
    const ExperimentResult& result, const ExperimentConfig& cfg,
    const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written =
      emit_report(result.table, dir, {ReportFormat::kCsv, ReportFormat::kMarkdown});

  {
    const auto path = dir / "trials.csv";
    std::ofstream out = open_output(path);
    CsvWriter w(out);
    w.row({"method", "n", "trial", "status", "mean_beta_hat", "true_ate", "true_mean_alpha",
           "runtime_s", "correlation", "rmse", "abs_bias"});
    for (const TrialRecord& r : result.trials) {
      if (!r.metrics) {
        w.row({std::string(to_string(r.method)), std::to_string(r.n), std::to_string(r.trial),
               "failed", "", "", "", "", "", "", ""});
        continue;
      }
      const TrialMetrics& m = *r.metrics;
      w.row({std::string(to_string(r.method)), std::to_string(r.n), std::to_string(r.trial),
             "ok", format_double(m.mean_beta_hat), format_double(m.true_ate),
             format_double(m.true_mean_alpha), format_double(m.runtime_seconds),
             m.correlation ? format_double(*m.correlation) : "", format_double(m.rmse),
             format_double(m.abs_bias)});
    }
    written.push_back(path);
  }

  write_vs_n(result, cfg, dir / "bias_vs_n.csv", &ResultsRow::mean_abs_bias);
  written.push_back(dir / "bias_vs_n.csv");
  write_vs_n(result, cfg, dir / "rmse_vs_n.csv", &ResultsRow::mean_rmse);
  written.push_back(dir / "rmse_vs_n.csv");

  {
    const auto path = dir / "trial_scatter.csv";
    std::ofstream out = open_output(path);
    CsvWriter w(out);
    w.row({"n", "trial", "method_a", "method_b", "abs_bias_a", "abs_bias_b", "rmse_a",
           "rmse_b"});
    auto lookup = [&](std::size_t n, Method m, std::size_t t) -> const TrialRecord* {
      for (const TrialRecord& r : result.trials) {
        if (r.n == n && r.method == m && r.trial == t) return &r;
      }
      return nullptr;
    };
    for (std::size_t n : cfg.sample_sizes) {
      for (std::size_t t = 0; t < cfg.n_trials; ++t) {
        for (std::size_t a = 0; a < cfg.methods.size(); ++a) {
          for (std::size_t b = a + 1; b < cfg.methods.size(); ++b) {
            const TrialRecord* ra = lookup(n, cfg.methods[a], t);
            const TrialRecord* rb = lookup(n, cfg.methods[b], t);
            if (!ra || !rb || !ra->metrics || !rb->metrics) continue;
            w.row({std::to_string(n), std::to_string(t), std::string(to_string(cfg.methods[a])),
                   std::string(to_string(cfg.methods[b])), format_double(ra->metrics->abs_bias),
                   format_double(rb->metrics->abs_bias), format_double(ra->metrics->rmse),
                   format_double(rb->metrics->rmse)});
          }
        }
      }
    }
    written.push_back(path);
  }
  return written;
}

}  // namespace cate
