#include "cate/config.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "cate/csv.hpp"
#include "cate/errors.hpp"

namespace cate {
namespace {

using Settings = std::map<std::string, std::string>;

struct KeyInfo {
  const char* key;
  const char* flag;
  const char* help;
  std::set<Mode> modes;
};

const std::set<Mode> kSim{Mode::kSimulate};
const std::set<Mode> kFit{Mode::kSimulate, Mode::kAnalyze};
const std::set<Mode> kAll{Mode::kSimulate, Mode::kAnalyze, Mode::kReport};

const std::vector<KeyInfo>& keys() {
  static const std::vector<KeyInfo> k{
      {"seed", "--seed", "base random seed", kFit},
      {"out_dir", "--out-dir", "output directory", kAll},
      {"threads", "--threads", "worker threads", kFit},
      {"regime", "--regime", "small | large", kSim},
      {"n", "--n", "training sample sizes, comma separated", kSim},
      {"trials", "--trials", "Monte Carlo trials per cell", kSim},
      {"test_size", "--test-size", "rows in the fixed test sample", kSim},
      {"kappa", "--kappa", "noise scale relative to sd(alpha)", kSim},
      {"redraw_treatment", "--redraw-treatment", "redraw Z each trial (true | false)", kSim},
      {"methods", "--methods", "shared,bcf,naive,ols", kFit},
      {"epochs", "--epochs", "training epochs for outcome networks", kFit},
      {"propensity_epochs", "--propensity-epochs", "training epochs for the propensity net",
       kFit},
      {"batch_size", "--batch-size", "minibatch size", kFit},
      {"lr", "--lr", "Adam learning rate", kFit},
      {"dropout", "--dropout", "hidden-layer dropout rate", kFit},
      {"hidden_activation", "--hidden-activation", "relu | sigmoid", kFit},
      {"data", "--data", "CSV dataset", {Mode::kAnalyze}},
      {"schema", "--schema", "dataset schema file", {Mode::kAnalyze}},
      {"tree_depth", "--tree-depth", "moderator tree depth", {Mode::kAnalyze}},
      {"min_leaf", "--min-leaf", "moderator tree minimum leaf size", {Mode::kAnalyze}},
      {"input", "--input", "results CSV to render", {Mode::kReport}},
      {"format", "--format", "csv,markdown", {Mode::kReport}},
  };
  return k;
}

const KeyInfo* find_key(const std::string& key) {
  for (const KeyInfo& k : keys()) {
    if (key == k.key) return &k;
  }
  return nullptr;
}

Mode mode_from_string(const std::string& s) {
  if (s == "simulate") return Mode::kSimulate;
  if (s == "analyze") return Mode::kAnalyze;
  if (s == "report") return Mode::kReport;
  throw ConfigError("unknown mode '" + s + "'");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::size_t to_count(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    if (!v.empty() && v.front() == '-') throw std::invalid_argument(v);
    const unsigned long long x = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return static_cast<std::size_t>(x);
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' expects a non-negative integer, got '" + v + "'");
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  return static_cast<std::uint64_t>(to_count(key, v));
}

double to_real(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("'" + key + "' expects true or false, got '" + v + "'");
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
  return out;
}

RunConfig build(Mode mode, const Settings& s) {
  RunConfig cfg;
  cfg.mode = mode;
  if (mode == Mode::kAnalyze) cfg.experiment.hyper.propensity_epochs = 100;
  if (mode == Mode::kAnalyze) {
    cfg.experiment.methods = {Method::kShared, Method::kBcf, Method::kNaive};
  }
  ExperimentConfig& e = cfg.experiment;
  for (const auto& [key, v] : s) {
    const KeyInfo* info = find_key(key);
    if (!info) throw ConfigError("unknown config key '" + key + "'");
    if (!info->modes.contains(mode)) {
      throw ConfigError("'" + key + "' does not apply to " + std::string(to_string(mode)));
    }
    try {
      if (key == "seed") e.base_seed = to_u64(key, v);
      else if (key == "out_dir") cfg.out_dir = v;
      else if (key == "threads") e.parallelism = to_count(key, v);
      else if (key == "regime") e.regime = regime_from_string(v);
      else if (key == "n") {
        e.sample_sizes.clear();
        for (const auto& item : split_list(v)) e.sample_sizes.push_back(to_count(key, item));
      } else if (key == "trials") e.n_trials = to_count(key, v);
      else if (key == "test_size") e.test_size = to_count(key, v);
      else if (key == "kappa") e.kappa = to_real(key, v);
      else if (key == "redraw_treatment") e.redraw_treatment = to_bool(key, v);
      else if (key == "methods") {
        e.methods.clear();
        for (const auto& item : split_list(v)) e.methods.push_back(method_from_string(item));
      } else if (key == "epochs") e.hyper.epochs = to_count(key, v);
      else if (key == "propensity_epochs") e.hyper.propensity_epochs = to_count(key, v);
      else if (key == "batch_size") e.hyper.batch_size = to_count(key, v);
      else if (key == "lr") e.hyper.lr = to_real(key, v);
      else if (key == "dropout") e.hyper.network.dropout = to_real(key, v);
      else if (key == "hidden_activation") {
        e.hyper.network.hidden = activation_from_string(v);
      } else if (key == "data") cfg.data_path = v;
      else if (key == "schema") cfg.schema_path = v;
      else if (key == "tree_depth") cfg.tree_depth = to_count(key, v);
      else if (key == "min_leaf") cfg.min_leaf = to_count(key, v);
      else if (key == "input") cfg.input_path = v;
      else if (key == "format") {
        cfg.formats.clear();
        for (const auto& item : split_list(v)) {
          if (item == "csv") cfg.formats.push_back(ReportFormat::kCsv);
          else if (item == "markdown" || item == "md") cfg.formats.push_back(ReportFormat::kMarkdown);
          else throw ConfigError("unknown report format '" + item + "'");
        }
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::invalid_argument& ex) {
      throw ConfigError("'" + key + "': " + ex.what());
    }
  }

  if (mode != Mode::kReport) {
    if (e.methods.empty()) throw ConfigError("no methods selected");
    if (e.hyper.epochs < 1 || e.hyper.propensity_epochs < 1) {
      throw ConfigError("epochs must be >= 1");
    }
    if (e.hyper.batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (e.parallelism < 1) throw ConfigError("threads must be >= 1");
  }
  if (mode == Mode::kSimulate) validate(e);
  if (mode == Mode::kAnalyze) {
    if (cfg.data_path.empty() || cfg.schema_path.empty()) {
      throw ConfigError("analyze needs --data and --schema");
    }
    if (cfg.tree_depth < 1 || cfg.min_leaf < 1) {
      throw ConfigError("tree_depth and min_leaf must be >= 1");
    }
  }
  if (mode == Mode::kReport) {
    if (cfg.input_path.empty()) throw ConfigError("report needs --input");
    if (cfg.formats.empty()) throw ConfigError("report needs at least one format");
  }
  return cfg;
}

}  // namespace

std::string_view to_string(Mode m) noexcept {
  switch (m) {
    case Mode::kSimulate: return "simulate";
    case Mode::kAnalyze: return "analyze";
    case Mode::kReport: return "report";
  }
  return "?";
}

Settings parse_config_file(std::istream& in) {
  Settings s;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (line == 1 && raw.rfind("\xEF\xBB\xBF", 0) == 0) raw.erase(0, 3);
    const auto hash = raw.find('#');
    std::string content = hash == std::string::npos ? raw : raw.substr(0, hash);
    const auto b = content.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line) + ": expected key = value");
    }
    auto trim = [](std::string x) {
      const auto l = x.find_first_not_of(" \t\r");
      if (l == std::string::npos) return std::string{};
      const auto r = x.find_last_not_of(" \t\r");
      return x.substr(l, r - l + 1);
    };
    const std::string key = trim(content.substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(line) + ": empty key");
    if (s.contains(key)) {
      throw ConfigError("config line " + std::to_string(line) + ": duplicate key '" + key + "'");
    }
    s[key] = trim(content.substr(eq + 1));
  }
  return s;
}

std::string usage() {
  return "usage: cate <simulate|analyze|report> [flags]\n"
         "  simulate  Monte Carlo comparison on the targeted-selection simulation\n"
         "  analyze   fit every method to an observational CSV dataset\n"
         "  report    render a results CSV as csv and/or markdown\n"
         "Run `cate <subcommand> --help` for flags.\n";
}

RunConfig parse_config(std::span<const std::string> args) {
  if (args.empty()) throw ConfigError("missing subcommand\n" + usage());
  if (args[0] == "--help" || args[0] == "-h") throw HelpRequested{usage()};
  const Mode mode = mode_from_string(args[0]);

  CLI::App app{"cate " + std::string(to_string(mode))};
  app.name("cate " + std::string(to_string(mode)));
  std::string config_path;
  app.add_option("--config", config_path, "key = value config file");
  std::map<std::string, std::string> flag_values;
  std::map<std::string, CLI::Option*> options;
  for (const KeyInfo& k : keys()) {
    if (!k.modes.contains(mode)) continue;
    options[k.key] = app.add_option(k.flag, flag_values[k.key], k.help);
  }

  std::vector<std::string> rest(args.begin() + 1, args.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested{app.help()};
  } catch (const CLI::ParseError& e) {
    throw ConfigError(std::string(e.what()));
  }

  Settings settings;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot read config file: " + config_path);
    settings = parse_config_file(in);
    if (auto it = settings.find("mode"); it != settings.end()) {
      if (mode_from_string(it->second) != mode) {
        throw ConfigError("config file mode '" + it->second + "' conflicts with subcommand '" +
                          std::string(to_string(mode)) + "'");
      }
      settings.erase(it);
    }
  }
  for (const auto& [key, opt] : options) {
    if (opt->count() > 0) settings[key] = flag_values[key];
  }
  return build(mode, settings);
}

std::string format_config(const RunConfig& cfg) {
  const ExperimentConfig& e = cfg.experiment;
  std::vector<std::string> methods, sizes, formats;
  for (Method m : e.methods) methods.emplace_back(to_string(m));
  for (std::size_t n : e.sample_sizes) sizes.push_back(std::to_string(n));
  for (ReportFormat f : cfg.formats) formats.push_back(f == ReportFormat::kCsv ? "csv" : "markdown");

  const Settings values{
      {"seed", std::to_string(e.base_seed)},
      {"out_dir", cfg.out_dir.string()},
      {"threads", std::to_string(e.parallelism)},
      {"regime", std::string(to_string(e.regime))},
      {"n", join(sizes)},
      {"trials", std::to_string(e.n_trials)},
      {"test_size", std::to_string(e.test_size)},
      {"kappa", format_double(e.kappa)},
      {"redraw_treatment", e.redraw_treatment ? "true" : "false"},
      {"methods", join(methods)},
      {"epochs", std::to_string(e.hyper.epochs)},
      {"propensity_epochs", std::to_string(e.hyper.propensity_epochs)},
      {"batch_size", std::to_string(e.hyper.batch_size)},
      {"lr", format_double(e.hyper.lr)},
      {"dropout", format_double(e.hyper.network.dropout)},
      {"hidden_activation", to_string(e.hyper.network.hidden)},
      {"data", cfg.data_path.string()},
      {"schema", cfg.schema_path.string()},
      {"tree_depth", std::to_string(cfg.tree_depth)},
      {"min_leaf", std::to_string(cfg.min_leaf)},
      {"input", cfg.input_path.string()},
      {"format", join(formats)},
  };

  std::ostringstream out;
  out << "# effective configuration\n";
  out << "mode = " << to_string(cfg.mode) << '\n';
  for (const KeyInfo& k : keys()) {
    if (!k.modes.contains(cfg.mode)) continue;
    out << k.key << " = " << values.at(k.key) << '\n';
  }
  return out.str();
}

}  // namespace cate
