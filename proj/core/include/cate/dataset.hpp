#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cate/matrix.hpp"

namespace cate {

enum class FeatureKind { kNumeric, kBinary, kOrdinal };

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::kNumeric;
  // Labels in code order (label i -> i). Empty means the column is numeric.
  std::vector<std::string> levels;
};

struct DatasetSchema {
  std::string outcome;
  std::string treatment;
  std::string treated_label;  // maps to 1
  std::string control_label;  // maps to 0
  std::vector<FeatureSpec> features;
};

// Schema files are flat `key = value` lines, '#' starts a comment:
//   outcome = PoorSleepQuality
//   treatment = Stress
//   treated = high
//   control = normal
//   feature = ClassYear ordinal 1,2,3,4
//   feature = GPA numeric
DatasetSchema parse_schema(std::istream& in);
DatasetSchema load_schema(const std::filesystem::path& path);

struct ColumnScaling {
  std::string name;
  double center = 0.0;
  double scale = 1.0;
};

// Every feature column and the outcome are centered and divided by their
// sample standard deviation; the treatment stays 0/1.
struct StandardizedDataset {
  Matrix x;
  std::vector<double> z;
  std::vector<double> y;
  std::vector<std::string> feature_names;
  std::vector<ColumnScaling> feature_scaling;
  ColumnScaling outcome_scaling;
  Matrix raw_x;               // encoded, unscaled features
  std::vector<double> raw_y;  // unscaled outcome
};

StandardizedDataset read_dataset(std::istream& in, const DatasetSchema& schema);
StandardizedDataset load_dataset(const std::filesystem::path& path, const DatasetSchema& schema);

Matrix unstandardize(const Matrix& x, std::span<const ColumnScaling> scaling);
std::vector<double> unstandardize(std::span<const double> y, const ColumnScaling& scaling);

}  // namespace cate
