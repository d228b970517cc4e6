#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cate/csv.hpp"
#include "cate/errors.hpp"
#include "cate/report.hpp"

namespace cate {
namespace {

TEST(Csv, QuotesOnlyWhenNeeded) {
  std::ostringstream out;
  CsvWriter w(out);
  w.row({"plain", "a,b", "say \"hi\"", "two\nlines"});
  EXPECT_EQ(out.str(), "plain,\"a,b\",\"say \"\"hi\"\"\",\"two\nlines\"\n");
}

TEST(Csv, RoundTripsArbitraryFields) {
  const std::vector<std::vector<std::string>> rows{
      {"h1", "h2", "h3"}, {"x", "", "a,b"}, {"\"q\"", "line\nbreak", "end"}};
  std::ostringstream out;
  CsvWriter w(out);
  for (const auto& r : rows) w.row(r);
  std::istringstream in(out.str());
  const CsvTable t = read_csv(in);
  EXPECT_EQ(t.header, rows[0]);
  ASSERT_EQ(t.records.size(), 2u);
  EXPECT_EQ(t.records[0].fields, rows[1]);
  EXPECT_EQ(t.records[1].fields, rows[2]);
  EXPECT_EQ(t.records[0].line, 2u);
  EXPECT_EQ(t.records[1].line, 3u);
  EXPECT_EQ(t.column("h3"), 2u);
  EXPECT_FALSE(t.column("nope").has_value());
}

TEST(Csv, AcceptsCrLfAndRejectsMalformed) {
  std::istringstream crlf("a,b\r\n1,2\r\n");
  const CsvTable t = read_csv(crlf);
  EXPECT_EQ(t.records.at(0).fields, (std::vector<std::string>{"1", "2"}));
  std::istringstream ragged("a,b\n1,2,3\n");
  EXPECT_THROW(read_csv(ragged), DataError);
  std::istringstream open_quote("a\n\"never closed\n");
  EXPECT_THROW(read_csv(open_quote), DataError);
  std::istringstream empty("");
  EXPECT_THROW(read_csv(empty), DataError);
}

TEST(Csv, NumberFormatting) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.123}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_fixed(0.4749, 2), "0.47");
  EXPECT_EQ(format_fixed(-0.001, 2), "0.00");
  EXPECT_EQ(format_fixed(1.955, 1), "2.0");
}

ResultsRow sample_row() {
  ResultsRow r;
  r.key = {Method::kShared, 250, Regime::kSmallTreatment};
  r.trials = 100;
  r.mean_beta_hat = 0.4711;
  r.true_ate = 0.2;
  r.true_mean_alpha = 1.95;
  r.mean_runtime_s = 0.26;
  r.mean_correlation = 0.7413;
  r.mean_rmse = 0.5;
  r.mean_abs_bias = 0.26;
  return r;
}

TEST(Report, CsvRoundTrip) {
  ResultsTable t{sample_row(), sample_row()};
  t[1].key.method = Method::kOls;
  t[1].mean_correlation.reset();
  std::ostringstream out;
  write_results_csv(t, out);
  std::istringstream in(out.str());
  const ResultsTable back = read_results_csv(in);
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back[i].key, t[i].key);
    EXPECT_EQ(back[i].trials, t[i].trials);
    EXPECT_EQ(back[i].mean_beta_hat, t[i].mean_beta_hat);
    EXPECT_EQ(back[i].mean_correlation, t[i].mean_correlation);
    EXPECT_EQ(back[i].mean_abs_bias, t[i].mean_abs_bias);
  }
  std::ostringstream again;
  write_results_csv(back, again);
  EXPECT_EQ(again.str(), out.str());
}

TEST(Report, MarkdownColumnOrderAndRounding) {
  const std::string md = results_markdown({sample_row()});
  EXPECT_EQ(md.substr(0, md.find('\n')),
            "| Method | n | mean β̂ | True ATE | True Mean α | Mean Runtime | Mean Correlation "
            "| Mean rMSE | mean (magnitude) Bias |");
  EXPECT_NE(md.find("| Shared Network | 250 | 0.47 | 0.20 | 1.95 | 0.26 | 0.74 | 0.50 | 0.26 |"),
            std::string::npos);
}

TEST(Report, EmitsBothFormats) {
  const auto dir = std::filesystem::temp_directory_path() / "cate_report_test";
  std::filesystem::remove_all(dir);
  const auto files =
      emit_report({sample_row()}, dir, {ReportFormat::kCsv, ReportFormat::kMarkdown});
  ASSERT_EQ(files.size(), 2u);
  std::ifstream in(dir / "results.csv");
  EXPECT_EQ(read_results_csv(in).size(), 1u);
  EXPECT_TRUE(std::filesystem::exists(dir / "results.md"));
  std::filesystem::remove_all(dir);
}

TEST(Report, UnwritableDirectoryFails) {
  EXPECT_ANY_THROW(emit_report({sample_row()}, "/proc/cate_cannot_write", {ReportFormat::kCsv}));
}

}  // namespace
}  // namespace cate
