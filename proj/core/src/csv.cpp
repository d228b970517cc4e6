#include "cate/csv.hpp"

#include <cstdio>
#include <istream>
#include <iterator>
#include <ostream>

#include "cate/errors.hpp"

namespace cate {

void CsvWriter::field(std::string_view f, bool first) {
  if (!first) out_ << ',';
  if (f.find_first_of(",\"\r\n") == std::string_view::npos) {
    out_ << f;
    return;
  }
  out_ << '"';
  for (char c : f) {
    if (c == '"') out_ << '"';
    out_ << c;
  }
  out_ << '"';
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) field(fields[i], i == 0);
  out_ << '\n';
}

void CsvWriter::row(std::initializer_list<std::string_view> fields) {
  bool first = true;
  for (std::string_view f : fields) {
    field(f, first);
    first = false;
  }
  out_ << '\n';
}

std::optional<std::size_t> CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

CsvTable read_csv(std::istream& in) {
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  std::vector<CsvRecord> rows;
  CsvRecord current;
  std::string fld;
  std::size_t line = 1;
  current.line = 1;
  bool in_quotes = false;
  bool record_has_content = false;

  auto end_field = [&] {
    current.fields.push_back(std::move(fld));
    fld.clear();
  };
  auto end_record = [&] {
    end_field();
    if (record_has_content || current.fields.size() > 1 || !current.fields[0].empty()) {
      rows.push_back(std::move(current));
    }
    current = CsvRecord{};
    current.line = line;
    record_has_content = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          fld += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        fld += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        record_has_content = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        fld += c;
        break;
      case '\n':
        ++line;
        end_record();
        break;
      default:
        fld += c;
    }
  }
  if (in_quotes) throw DataError("csv: unterminated quoted field");
  if (!fld.empty() || !current.fields.empty()) end_record();
  if (rows.empty()) throw DataError("csv: missing header row");

  CsvTable table;
  table.header = std::move(rows.front().fields);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].fields.size() != table.header.size()) {
      throw DataError("csv: line " + std::to_string(rows[r].line) + " has " +
                      std::to_string(rows[r].fields.size()) + " fields, expected " +
                      std::to_string(table.header.size()));
    }
    table.records.push_back(std::move(rows[r]));
  }
  return table;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  std::string s = buf;
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
  return s;
}

}  // namespace cate
