#include "cate/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "cate/csv.hpp"
#include "cate/dgp.hpp"
#include "cate/errors.hpp"

namespace cate {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

FeatureKind kind_from_string(const std::string& s, std::size_t line) {
  if (s == "numeric") return FeatureKind::kNumeric;
  if (s == "binary") return FeatureKind::kBinary;
  if (s == "ordinal") return FeatureKind::kOrdinal;
  throw DataError("schema line " + std::to_string(line) + ": unknown feature kind '" + s + "'");
}

bool is_missing(const std::string& cell) {
  const std::string t = trim(cell);
  return t.empty() || t == "NA" || t == "NaN" || t == "nan" || t == ".";
}

bool parse_double(const std::string& cell, double& out) {
  const std::string t = trim(cell);
  try {
    std::size_t used = 0;
    out = std::stod(t, &used);
    return used == t.size() && std::isfinite(out);
  } catch (const std::exception&) {
    return false;
  }
}

ColumnScaling scaling_for(const std::string& name, std::span<const double> v) {
  ColumnScaling s{name, 0.0, 1.0};
  for (double x : v) s.center += x;
  s.center /= static_cast<double>(v.size());
  s.scale = sample_sd(v);
  if (!(s.scale > 0.0)) throw DataError("column '" + name + "' is constant; cannot standardize");
  return s;
}

}  // namespace

DatasetSchema parse_schema(std::istream& in) {
  DatasetSchema schema;
  std::string raw;
  std::size_t line = 0;
  std::set<std::string> names;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string content = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw DataError("schema line " + std::to_string(line) + ": expected key = value");
    }
    const std::string key = trim(content.substr(0, eq));
    const std::string value = trim(content.substr(eq + 1));
    if (key == "outcome") {
      schema.outcome = value;
    } else if (key == "treatment") {
      schema.treatment = value;
    } else if (key == "treated") {
      schema.treated_label = value;
    } else if (key == "control") {
      schema.control_label = value;
    } else if (key == "feature") {
      std::istringstream ss(value);
      std::string name, kind, levels;
      ss >> name >> kind;
      std::getline(ss, levels);
      if (name.empty() || kind.empty()) {
        throw DataError("schema line " + std::to_string(line) + ": feature needs name and kind");
      }
      FeatureSpec f{name, kind_from_string(kind, line), {}};
      if (!trim(levels).empty()) f.levels = split(trim(levels), ',');
      if (f.kind == FeatureKind::kBinary && !f.levels.empty() && f.levels.size() != 2) {
        throw DataError("schema line " + std::to_string(line) + ": binary feature needs 2 levels");
      }
      schema.features.push_back(std::move(f));
    } else {
      throw DataError("schema line " + std::to_string(line) + ": unknown key '" + key + "'");
    }
  }
  if (schema.outcome.empty() || schema.treatment.empty() || schema.treated_label.empty()) {
    throw DataError("schema: outcome, treatment and treated are required");
  }
  if (schema.features.empty()) throw DataError("schema: no features");
  names.insert(schema.outcome);
  if (!names.insert(schema.treatment).second) {
    throw DataError("schema: duplicate column name '" + schema.treatment + "'");
  }
  for (const FeatureSpec& f : schema.features) {
    if (!names.insert(f.name).second) {
      throw DataError("schema: duplicate column name '" + f.name + "'");
    }
  }
  return schema;
}

DatasetSchema load_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read schema file: " + path.string());
  return parse_schema(in);
}

StandardizedDataset read_dataset(std::istream& in, const DatasetSchema& schema) {
  const CsvTable csv = read_csv(in);
  std::set<std::string> seen;
  for (const std::string& h : csv.header) {
    if (!seen.insert(h).second) throw DataError("csv: duplicate column name '" + h + "'");
  }
  auto column = [&](const std::string& name) {
    const auto idx = csv.column(name);
    if (!idx) throw DataError("csv: missing column '" + name + "'");
    return *idx;
  };
  const std::size_t y_col = column(schema.outcome);
  const std::size_t z_col = column(schema.treatment);
  std::vector<std::size_t> f_cols;
  for (const FeatureSpec& f : schema.features) f_cols.push_back(column(f.name));

  const std::size_t n = csv.records.size();
  const std::size_t d = schema.features.size();
  if (n < 2) throw DataError("csv: need at least two data rows");

  StandardizedDataset ds;
  ds.raw_x = Matrix(n, d);
  ds.raw_y.resize(n);
  ds.z.resize(n);
  std::vector<std::size_t> missing_lines;
  for (std::size_t i = 0; i < n; ++i) {
    const CsvRecord& rec = csv.records[i];
    bool missing = is_missing(rec.fields[y_col]) || is_missing(rec.fields[z_col]);
    for (std::size_t c : f_cols) missing = missing || is_missing(rec.fields[c]);
    if (missing) {
      missing_lines.push_back(rec.line);
      continue;
    }
    auto bad_cell = [&](const std::string& col, const std::string& cell) {
      return DataError("csv line " + std::to_string(rec.line) + ": column '" + col +
                       "': cannot parse '" + cell + "'");
    };

    if (!parse_double(rec.fields[y_col], ds.raw_y[i])) {
      throw bad_cell(schema.outcome, rec.fields[y_col]);
    }
    const std::string zt = trim(rec.fields[z_col]);
    if (zt == schema.treated_label) {
      ds.z[i] = 1.0;
    } else if (schema.control_label.empty() || zt == schema.control_label) {
      ds.z[i] = 0.0;
    } else {
      throw bad_cell(schema.treatment, zt);
    }

    for (std::size_t j = 0; j < d; ++j) {
      const FeatureSpec& f = schema.features[j];
      const std::string cell = trim(rec.fields[f_cols[j]]);
      double v = 0.0;
      if (!f.levels.empty()) {
        const auto it = std::find(f.levels.begin(), f.levels.end(), cell);
        if (it == f.levels.end()) throw bad_cell(f.name, cell);
        v = static_cast<double>(it - f.levels.begin());
      } else if (!parse_double(cell, v)) {
        throw bad_cell(f.name, cell);
      }
      if (f.kind == FeatureKind::kBinary && f.levels.empty() && v != 0.0 && v != 1.0) {
        throw bad_cell(f.name, cell);
      }
      ds.raw_x(i, j) = v;
    }
  }
  if (!missing_lines.empty()) {
    std::string msg = "csv: missing values on line(s)";
    for (std::size_t l : missing_lines) msg += " " + std::to_string(l);
    throw DataError(msg);
  }
  const double treated = std::count(ds.z.begin(), ds.z.end(), 1.0);
  if (treated == 0.0 || treated == static_cast<double>(n)) {
    throw DataError("csv: treatment column has a single class");
  }

  ds.x = Matrix(n, d);
  for (std::size_t j = 0; j < d; ++j) {
    const std::vector<double> col = ds.raw_x.col(j);
    const ColumnScaling s = scaling_for(schema.features[j].name, col);
    for (std::size_t i = 0; i < n; ++i) ds.x(i, j) = (col[i] - s.center) / s.scale;
    ds.feature_scaling.push_back(s);
    ds.feature_names.push_back(schema.features[j].name);
  }
  ds.outcome_scaling = scaling_for(schema.outcome, ds.raw_y);
  ds.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    ds.y[i] = (ds.raw_y[i] - ds.outcome_scaling.center) / ds.outcome_scaling.scale;
  }
  return ds;
}

StandardizedDataset load_dataset(const std::filesystem::path& path, const DatasetSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read data file: " + path.string());
  return read_dataset(in, schema);
}

Matrix unstandardize(const Matrix& x, std::span<const ColumnScaling> scaling) {
  if (x.cols() != scaling.size()) throw ShapeError("unstandardize: column count mismatch");
  Matrix out = x;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      out(i, j) = x(i, j) * scaling[j].scale + scaling[j].center;
    }
  }
  return out;
}

std::vector<double> unstandardize(std::span<const double> y, const ColumnScaling& scaling) {
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] * scaling.scale + scaling.center;
  return out;
}

}  // namespace cate
