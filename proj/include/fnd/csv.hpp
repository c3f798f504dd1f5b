#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace fnd {

struct CsvRow {
  std::vector<std::string> fields;
  std::size_t line = 0;  // 1-based line where the row starts
};

// RFC 4180 reader: quoted fields may contain commas, doubled quotes and
// newlines. Accepts LF or CRLF line endings.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {}

  // Next row, or nullopt at end of input. Throws ParseError on an
  // unterminated quoted field.
  std::optional<CsvRow> next();

 private:
  std::istream& in_;
  std::size_t line_ = 1;
};

std::string csv_escape(const std::string& field);

}  // namespace fnd
