#pragma once

#include <cstddef>
#include <initializer_list>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cate {

// RFC-4180 writer: fields containing a comma, quote, CR or LF are quoted and
// embedded quotes doubled. Records end with '\n'.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}
  void row(const std::vector<std::string>& fields);
  void row(std::initializer_list<std::string_view> fields);

 private:
  void field(std::string_view f, bool first);
  std::ostream& out_;
};

struct CsvRecord {
  std::vector<std::string> fields;
  std::size_t line = 0;  // 1-based line where the record starts
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<CsvRecord> records;

  // Index of `name` in the header, if present.
  std::optional<std::size_t> column(std::string_view name) const;
};

// Parses RFC-4180 text with a mandatory header row. Accepts '\n' and "\r\n".
// Throws DataError on unterminated quotes or ragged rows.
CsvTable read_csv(std::istream& in);

// Shortest round-trip representation ("%.17g").
std::string format_double(double v);
// Fixed-point with `digits` decimals.
std::string format_fixed(double v, int digits);

}  // namespace cate
