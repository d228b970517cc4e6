#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "cate/dataset.hpp"
#include "cate/harness.hpp"
#include "cate/models.hpp"
#include "cate/moderator_tree.hpp"

namespace cate {

struct AnalysisConfig {
  Hyperparams hyper{250, 64, 1e-3, 100, {}};  // 100 propensity epochs on real data
  std::vector<Method> methods{Method::kShared, Method::kBcf, Method::kNaive};
  std::size_t tree_depth = 2;
  std::size_t min_leaf = 10;
  std::uint64_t seed = 42;
};

struct MethodSummary {
  Method method = Method::kShared;
  double mean_cate = 0.0;
  double mean_prognostic = 0.0;
};

// Whole-sample fit of each method on an observational dataset (no
// train/test split), plus a moderator tree on the effect estimates.
struct AnalysisReport {
  std::vector<MethodSummary> rows;
  std::vector<CateModel> models;               // parallel to rows
  std::vector<std::vector<double>> beta_hat;   // parallel to rows
  std::vector<double> pi_hat;                  // empty unless bcf ran
  std::vector<double> alpha_hat;               // bcf prognosis, empty unless bcf ran
  Method tree_method = Method::kBcf;
  ModeratorTree tree;
  // Share of rows with pi_hat inside (0.01, 0.99).
  double propensity_interior_share = 0.0;
};

AnalysisReport run_sleep_analysis(const StandardizedDataset& data, const AnalysisConfig& cfg);

// analysis.csv, analysis.md, cate_estimates.csv, alpha_vs_pi.csv,
// moderator_tree.txt, moderator_tree.json, scaling.csv and models/*.json.
std::vector<std::filesystem::path> write_analysis_outputs(const AnalysisReport& report,
                                                          const StandardizedDataset& data,
                                                          const std::filesystem::path& dir);

}  // namespace cate
