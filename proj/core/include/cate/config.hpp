#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cate/harness.hpp"
#include "cate/report.hpp"

namespace cate {

enum class Mode { kSimulate, kAnalyze, kReport };

std::string_view to_string(Mode m) noexcept;

struct RunConfig {
  Mode mode = Mode::kSimulate;
  ExperimentConfig experiment;  // hyperparameters and seed apply to analyze too
  std::filesystem::path out_dir = "out";
  std::filesystem::path data_path;    // analyze
  std::filesystem::path schema_path;  // analyze
  std::size_t tree_depth = 2;         // analyze
  std::size_t min_leaf = 10;          // analyze
  std::filesystem::path input_path;   // report
  std::vector<ReportFormat> formats{ReportFormat::kCsv, ReportFormat::kMarkdown};

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// Thrown for --help; carries the usage text. Not an error.
struct HelpRequested {
  std::string text;
};

// `args` excludes the program name: a subcommand (simulate | analyze |
// report) followed by flags. `--config FILE` loads a key = value file first;
// flags given on the command line override it. Throws ConfigError on unknown
// flags or keys, bad values, keys that do not belong to the mode, or a file
// `mode` that disagrees with the subcommand.
RunConfig parse_config(std::span<const std::string> args);

// Config file grammar: one `key = value` per line, '#' to end of line is a
// comment, blank lines ignored. Lists are comma separated.
std::map<std::string, std::string> parse_config_file(std::istream& in);

// Effective config as a config file. parse_config on its output with the
// same subcommand yields an equal RunConfig.
std::string format_config(const RunConfig& cfg);

std::string usage();

}  // namespace cate
