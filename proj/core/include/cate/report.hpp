#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "cate/metrics.hpp"

namespace cate {

enum class ReportFormat { kCsv, kMarkdown };

// Columns: method,n,regime,trials,mean_beta_hat,true_ate,true_mean_alpha,
// mean_runtime_s,mean_correlation,mean_rmse,mean_abs_bias. Numbers use the
// shortest round-trip form so equal inputs give equal bytes.
void write_results_csv(const ResultsTable& table, std::ostream& out);
ResultsTable read_results_csv(std::istream& in);

// Markdown table in the simulation-table column order, 2 decimals.
std::string results_markdown(const ResultsTable& table);

// Writes <stem>.csv and/or <stem>.md under `dir`.
std::vector<std::filesystem::path> emit_report(const ResultsTable& table,
                                               const std::filesystem::path& dir,
                                               const std::vector<ReportFormat>& formats,
                                               const std::string& stem = "results");

}  // namespace cate
