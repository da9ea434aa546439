#include "csv.hpp"

#include <algorithm>
#include <cctype>

#include "truthdisc/error.hpp"

namespace truthdisc::csv {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

std::vector<std::string> split(std::string_view line, char delimiter) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"' && trim(field).empty()) {
      field.clear();
      quoted = true;
      was_quoted = true;
    } else if (c == delimiter) {
      fields.push_back(was_quoted ? field : std::string(trim(field)));
      field.clear();
      was_quoted = false;
    } else if (!was_quoted) {
      field.push_back(c);
    }
  }
  if (quoted) throw Error(ErrorCode::Parse, "unterminated quoted field");
  fields.push_back(was_quoted ? field : std::string(trim(field)));
  return fields;
}

std::string escape(std::string_view field, char delimiter) {
  const bool needs_quotes =
      field.find(delimiter) != std::string_view::npos || field.find('"') != std::string_view::npos ||
      (!field.empty() && (std::isspace(static_cast<unsigned char>(field.front())) ||
                          std::isspace(static_cast<unsigned char>(field.back()))));
  if (!needs_quotes) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string join(const std::vector<std::string>& fields, char delimiter) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(delimiter);
    out += escape(fields[i], delimiter);
  }
  return out;
}

Reader::Reader(const std::string& path, char delimiter)
    : path_(path), in_(path), delimiter_(delimiter) {
  if (!in_) throw Error(ErrorCode::Io, "cannot open " + path);
  if (!next(header_)) throw Error(ErrorCode::Parse, path + ": missing header row");
  if (!header_.empty() && header_[0].rfind("\xEF\xBB\xBF", 0) == 0) header_[0].erase(0, 3);
}

std::optional<std::size_t> Reader::column(std::string_view name) const {
  const std::string wanted = lower(name);
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (lower(header_[i]) == wanted) return i;
  }
  return std::nullopt;
}

std::size_t Reader::require_column(std::string_view name) const {
  if (auto c = column(name)) return *c;
  throw Error(ErrorCode::Parse, path_ + ": header lacks column '" + std::string(name) + "'");
}

bool Reader::next(std::vector<std::string>& row) {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    try {
      row = split(line, delimiter_);
    } catch (const Error& e) {
      throw Error(ErrorCode::Parse, path_ + ":" + std::to_string(line_no_) + ": " + e.what());
    }
    return true;
  }
  return false;
}

Writer::Writer(const std::string& path, char delimiter) : out_(path), delimiter_(delimiter) {
  if (!out_) throw Error(ErrorCode::Io, "cannot write " + path);
}

void Writer::row(const std::vector<std::string>& fields) {
  out_ << join(fields, delimiter_) << '\n';
  if (!out_) throw Error(ErrorCode::Io, "write failed");
}

}  // namespace truthdisc::csv
