#pragma once

#include <cstddef>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace truthdisc::csv {

/// Splits one delimited line. Fields may be double-quoted; a doubled quote
/// inside a quoted field is a literal quote.
std::vector<std::string> split(std::string_view line, char delimiter);

/// Quotes a field when it contains the delimiter, a quote or surrounding
/// whitespace.
std::string escape(std::string_view field, char delimiter);

std::string join(const std::vector<std::string>& fields, char delimiter);

/// Line reader over a delimited file with a header row. Blank lines are
/// skipped; line numbers are 1-based and count the header.
class Reader {
 public:
  Reader(const std::string& path, char delimiter);

  const std::vector<std::string>& header() const { return header_; }
  /// Column index by header name (case-insensitive).
  std::optional<std::size_t> column(std::string_view name) const;
  std::size_t require_column(std::string_view name) const;

  bool next(std::vector<std::string>& row);
  std::size_t line_number() const { return line_no_; }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ifstream in_;
  char delimiter_;
  std::vector<std::string> header_;
  std::size_t line_no_ = 0;
};

/// Writer that produces '\n'-terminated rows.
class Writer {
 public:
  Writer(const std::string& path, char delimiter = ',');
  void row(const std::vector<std::string>& fields);

 private:
  std::ofstream out_;
  char delimiter_;
};

}  // namespace truthdisc::csv
