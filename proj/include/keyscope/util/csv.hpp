#pragma once

#include <istream>
#include <string>
#include <vector>

namespace keyscope::csv {

struct Row {
  std::size_t line = 0;  // 1-based line number in the source
  std::vector<std::string> fields;
};

/// Splits one line on commas, honouring double-quoted fields ("" escapes a quote).
std::vector<std::string> split_line(const std::string& line);

/// All non-blank lines, header included. Trailing '\r' is stripped.
std::vector<Row> read_rows(std::istream& in);

/// Quotes a field when it contains a comma, quote or newline.
std::string escape(const std::string& field);

}  // namespace keyscope::csv
