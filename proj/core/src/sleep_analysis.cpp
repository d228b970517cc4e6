#include "cate/sleep_analysis.hpp"

#include <fstream>
#include <stdexcept>

#include "cate/csv.hpp"
#include "cate/metrics.hpp"
#include "cate/rng.hpp"
#include "cate/serialize.hpp"

namespace cate {
namespace {

std::ofstream open_output(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

std::string_view analysis_label(Method m) {
  switch (m) {
    case Method::kShared: return "Shared Network";
    case Method::kBcf: return "BCF NNet";
    case Method::kNaive: return "Naive NN Approach";
    case Method::kOls: return "OLS Approach";
  }
  return "?";
}

}  // namespace

AnalysisReport run_sleep_analysis(const StandardizedDataset& data, const AnalysisConfig& cfg) {
  if (cfg.methods.empty()) throw std::invalid_argument("analysis: no methods selected");
  AnalysisReport report;
  for (Method m : cfg.methods) {
    const std::uint64_t seed = derive_seed({cfg.seed, hash_tag(to_string(m)), hash_tag("analysis")});
    CateModel model = fit_method(m, data.x, data.z, data.y, seed, cfg.hyper);

    std::vector<double> pi_hat;
    if (const auto* bcf = std::get_if<BcfNet>(&model)) {
      pi_hat = predict_propensity(*bcf->propensity, data.x);
    }
    std::vector<double> beta = predict_cate(model, data.x);
    std::vector<double> alpha =
        pi_hat.empty() ? predict_prognostic(model, data.x)
                       : predict_prognostic(model, data.x, std::span<const double>(pi_hat));
    report.rows.push_back({m, mean(beta), mean(alpha)});
    if (m == Method::kBcf) {
      report.pi_hat = pi_hat;
      report.alpha_hat = alpha;
    }
    report.models.push_back(std::move(model));
    report.beta_hat.push_back(std::move(beta));
  }

  std::size_t tree_source = 0;
  for (std::size_t i = 0; i < cfg.methods.size(); ++i) {
    if (cfg.methods[i] == Method::kBcf) tree_source = i;
  }
  report.tree_method = cfg.methods[tree_source];
  report.tree = fit_moderator_tree(data.x, report.beta_hat[tree_source], cfg.tree_depth,
                                   cfg.min_leaf);

  if (!report.pi_hat.empty()) {
    std::size_t inside = 0;
    for (double p : report.pi_hat) inside += (p > 0.01 && p < 0.99) ? 1 : 0;
    report.propensity_interior_share =
        static_cast<double>(inside) / static_cast<double>(report.pi_hat.size());
  }
  return report;
}

std::vector<std::filesystem::path> write_analysis_outputs(const AnalysisReport& report,
                                                          const StandardizedDataset& data,
                                                          const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "models");
  std::vector<std::filesystem::path> written;

  {
    const auto p = dir / "analysis.csv";
    std::ofstream out = open_output(p);
    CsvWriter w(out);
    w.row({"method", "cate_estimate", "mean_prognostic"});
    for (const MethodSummary& r : report.rows) {
      w.row({std::string(to_string(r.method)), format_double(r.mean_cate),
             format_double(r.mean_prognostic)});
    }
    written.push_back(p);
  }
  {
    const auto p = dir / "analysis.md";
    std::ofstream out = open_output(p);
    out << "| Method | CATE Estimate | Mean Prognostic |\n|---|---:|---:|\n";
    for (const MethodSummary& r : report.rows) {
      out << "| " << analysis_label(r.method) << " | " << format_fixed(r.mean_cate, 2) << " | "
          << format_fixed(r.mean_prognostic, 2) << " |\n";
    }
    out << "\nEstimates are on the standardized outcome scale; multiply by "
        << format_fixed(data.outcome_scaling.scale, 4)
        << " (outcome sd) to return to raw units. Rows needing external tools "
           "(BART propensity, R BCF) are not produced.\n";
    if (!report.pi_hat.empty()) {
      out << "\nShare of propensity estimates inside (0.01, 0.99): "
          << format_fixed(report.propensity_interior_share, 3) << "\n";
    }
    written.push_back(p);
  }
  {
    const auto p = dir / "cate_estimates.csv";
    std::ofstream out = open_output(p);
    CsvWriter w(out);
    std::vector<std::string> header{"row"};
    for (const MethodSummary& r : report.rows) header.emplace_back(to_string(r.method));
    w.row(header);
    for (std::size_t i = 0; i < data.x.rows(); ++i) {
      std::vector<std::string> row{std::to_string(i)};
      for (const auto& b : report.beta_hat) row.push_back(format_double(b[i]));
      w.row(row);
    }
    written.push_back(p);
  }
  if (!report.pi_hat.empty()) {
    const auto p = dir / "alpha_vs_pi.csv";
    std::ofstream out = open_output(p);
    CsvWriter w(out);
    w.row({"row", "alpha_hat", "pi_hat", "z"});
    for (std::size_t i = 0; i < report.pi_hat.size(); ++i) {
      w.row({std::to_string(i), format_double(report.alpha_hat[i]),
             format_double(report.pi_hat[i]), format_double(data.z[i])});
    }
    written.push_back(p);
  }
  {
    const auto p = dir / "moderator_tree.txt";
    std::ofstream out = open_output(p);
    out << "# moderator tree on " << to_string(report.tree_method) << " effect estimates\n"
        << report.tree.to_text(data.feature_names);
    written.push_back(p);
    const auto pj = dir / "moderator_tree.json";
    std::ofstream outj = open_output(pj);
    outj << report.tree.to_json(data.feature_names) << '\n';
    written.push_back(pj);
  }
  {
    const auto p = dir / "scaling.csv";
    std::ofstream out = open_output(p);
    CsvWriter w(out);
    w.row({"column", "role", "center", "scale"});
    for (const ColumnScaling& s : data.feature_scaling) {
      w.row({s.name, "feature", format_double(s.center), format_double(s.scale)});
    }
    w.row({data.outcome_scaling.name, "outcome", format_double(data.outcome_scaling.center),
           format_double(data.outcome_scaling.scale)});
    written.push_back(p);
  }
  for (std::size_t i = 0; i < report.models.size(); ++i) {
    const auto p = dir / "models" / (std::string(to_string(report.rows[i].method)) + ".json");
    save_model(report.models[i], p);
    written.push_back(p);
  }
  return written;
}

}  // namespace cate
