#include "cate/cli.hpp"

#include <fstream>
#include <iostream>
#include <mutex>

#include "cate/config.hpp"
#include "cate/csv.hpp"
#include "cate/dataset.hpp"
#include "cate/errors.hpp"
#include "cate/harness.hpp"
#include "cate/report.hpp"
#include "cate/sleep_analysis.hpp"

namespace cate {
namespace {

void write_effective_config(const RunConfig& cfg) {
  std::filesystem::create_directories(cfg.out_dir);
  const auto path = cfg.out_dir / "effective_config.txt";
  std::ofstream f(path, std::ios::binary);
  f << format_config(cfg);
  if (!f) throw std::runtime_error("cannot write " + path.string());
}

int run_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  write_effective_config(cfg);
  const ExperimentConfig& e = cfg.experiment;
  const std::size_t total = e.sample_sizes.size() * e.methods.size() * e.n_trials;
  std::size_t done = 0;
  std::mutex mu;
  const auto result = run_experiment(e, [&](const TrialRecord& r) {
    std::lock_guard lock(mu);
    ++done;
    if (!r.metrics) {
      err << "trial failed: " << to_string(r.method) << " n=" << r.n << " trial=" << r.trial
          << ": " << r.error << '\n';
    }
    if (done % 10 == 0 || done == total) {
      err << "[" << done << "/" << total << "] trials complete\n";
    }
  });
  for (const auto& p : write_experiment_outputs(result, e, cfg.out_dir)) {
    err << "wrote " << p.string() << '\n';
  }
  out << results_markdown(result.table);
  return kExitOk;
}

int run_analyze(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  write_effective_config(cfg);
  const DatasetSchema schema = load_schema(cfg.schema_path);
  const StandardizedDataset data = load_dataset(cfg.data_path, schema);
  err << "loaded " << data.x.rows() << " rows, " << data.x.cols() << " features\n";

  AnalysisConfig ac;
  ac.hyper = cfg.experiment.hyper;
  ac.methods = cfg.experiment.methods;
  ac.tree_depth = cfg.tree_depth;
  ac.min_leaf = cfg.min_leaf;
  ac.seed = cfg.experiment.base_seed;
  const AnalysisReport report = run_sleep_analysis(data, ac);
  for (const auto& p : write_analysis_outputs(report, data, cfg.out_dir)) {
    err << "wrote " << p.string() << '\n';
  }
  out << "method,mean_cate,mean_prognostic\n";
  for (const auto& row : report.rows) {
    out << to_string(row.method) << ',' << format_fixed(row.mean_cate, 2) << ','
        << format_fixed(row.mean_prognostic, 2) << '\n';
  }
  return kExitOk;
}

int run_report(const RunConfig& cfg, std::ostream& err) {
  std::ifstream in(cfg.input_path, std::ios::binary);
  if (!in) throw DataError("cannot read " + cfg.input_path.string());
  const ResultsTable table = read_results_csv(in);
  if (table.empty()) throw DataError("results file has no rows: " + cfg.input_path.string());
  write_effective_config(cfg);
  for (const auto& p : emit_report(table, cfg.out_dir, cfg.formats)) {
    err << "wrote " << p.string() << '\n';
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = parse_config(args);
  } catch (const HelpRequested& h) {
    out << h.text;
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  }

  try {
    switch (cfg.mode) {
      case Mode::kSimulate: return run_simulate(cfg, out, err);
      case Mode::kAnalyze: return run_analyze(cfg, out, err);
      case Mode::kReport: return run_report(cfg, err);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace cate
