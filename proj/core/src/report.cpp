#include "cate/report.hpp"

#include <fstream>
#include <sstream>

#include "cate/csv.hpp"
#include "cate/errors.hpp"

namespace cate {
namespace {

const std::vector<std::string> kResultsHeader{
    "method",          "n",          "regime",           "trials",
    "mean_beta_hat",   "true_ate",   "true_mean_alpha",  "mean_runtime_s",
    "mean_correlation", "mean_rmse", "mean_abs_bias"};

double parse_number(const std::string& s, const CsvRecord& rec) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("results csv: line " + std::to_string(rec.line) + ": bad number '" + s +
                    "'");
  }
}

}  // namespace

void write_results_csv(const ResultsTable& table, std::ostream& out) {
  CsvWriter w(out);
  w.row(kResultsHeader);
  for (const ResultsRow& r : table) {
    w.row({std::string(to_string(r.key.method)), std::to_string(r.key.n),
           std::string(to_string(r.key.regime)), std::to_string(r.trials),
           format_double(r.mean_beta_hat), format_double(r.true_ate),
           format_double(r.true_mean_alpha), format_double(r.mean_runtime_s),
           r.mean_correlation ? format_double(*r.mean_correlation) : "",
           format_double(r.mean_rmse), format_double(r.mean_abs_bias)});
  }
}

ResultsTable read_results_csv(std::istream& in) {
  const CsvTable csv = read_csv(in);
  if (csv.header != kResultsHeader) throw DataError("results csv: unexpected header");
  ResultsTable table;
  for (const CsvRecord& rec : csv.records) {
    const auto& f = rec.fields;
    ResultsRow r;
    try {
      r.key = {method_from_string(f[0]),
               static_cast<std::size_t>(parse_number(f[1], rec)), regime_from_string(f[2])};
    } catch (const std::invalid_argument& e) {
      throw DataError("results csv: line " + std::to_string(rec.line) + ": " + e.what());
    }
    r.trials = static_cast<std::size_t>(parse_number(f[3], rec));
    r.mean_beta_hat = parse_number(f[4], rec);
    r.true_ate = parse_number(f[5], rec);
    r.true_mean_alpha = parse_number(f[6], rec);
    r.mean_runtime_s = parse_number(f[7], rec);
    if (!f[8].empty()) r.mean_correlation = parse_number(f[8], rec);
    r.mean_rmse = parse_number(f[9], rec);
    r.mean_abs_bias = parse_number(f[10], rec);
    table.push_back(r);
  }
  return table;
}

std::string results_markdown(const ResultsTable& table) {
  std::ostringstream out;
  out << "| Method | n | mean β̂ | True ATE | True Mean α | Mean Runtime | Mean Correlation | "
         "Mean rMSE | mean (magnitude) Bias |\n";
  out << "|---|---:|---:|---:|---:|---:|---:|---:|---:|\n";
  for (const ResultsRow& r : table) {
    out << "| " << display_name(r.key.method) << " | " << r.key.n << " | "
        << format_fixed(r.mean_beta_hat, 2) << " | " << format_fixed(r.true_ate, 2) << " | "
        << format_fixed(r.true_mean_alpha, 2) << " | " << format_fixed(r.mean_runtime_s, 2)
        << " | " << (r.mean_correlation ? format_fixed(*r.mean_correlation, 2) : "NA")
        << " | " << format_fixed(r.mean_rmse, 2) << " | " << format_fixed(r.mean_abs_bias, 2)
        << " |\n";
  }
  return out.str();
}

std::vector<std::filesystem::path> emit_report(const ResultsTable& table,
                                               const std::filesystem::path& dir,
                                               const std::vector<ReportFormat>& formats,
                                               const std::string& stem) {
  if (table.empty()) throw std::invalid_argument("emit_report: empty results");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  std::vector<std::filesystem::path> written;
  for (ReportFormat f : formats) {
    const auto path = dir / (stem + (f == ReportFormat::kCsv ? ".csv" : ".md"));
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    if (f == ReportFormat::kCsv) write_results_csv(table, out);
    else out << results_markdown(table);
    if (!out) throw std::runtime_error("write failed: " + path.string());
    written.push_back(path);
  }
  return written;
}

}  // namespace cate
