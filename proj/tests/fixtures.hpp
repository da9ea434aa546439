#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <memory>
#include <string>
#include <tuple>
#include <vector>

#include "truthdisc/error.hpp"
#include "truthdisc/model.hpp"
#include "truthdisc/normalize.hpp"

namespace fixtures {

using namespace truthdisc;

// source, object, attribute, raw value
using Row = std::tuple<std::string, std::string, std::string, std::string>;

inline std::shared_ptr<const Schema> schema(std::vector<AttributeSpec> attrs) {
  return std::make_shared<const Schema>(std::move(attrs));
}

inline std::shared_ptr<const Schema> number_schema(double alpha = 0.01) {
  return schema({{"price", ValueKind::Number, alpha}});
}

inline ClaimSet make_claims(std::shared_ptr<const Schema> s, const std::vector<Row>& rows, std::string label = {}) {
  std::vector<Claim> claims;
  for (const auto& [src, obj, attr, raw] : rows) {
    const auto a = s->find(attr);
    if (!a) throw std::runtime_error("fixture: unknown attribute " + attr);
    claims.push_back({SourceId{src}, ItemKey{obj, *a}, normalize_value(raw, s->at(*a).kind)});
  }
  return ClaimSet(std::move(s), std::move(label), std::move(claims));
}

// One item "d" of the number attribute with one claim per listed value.
inline ClaimSet single_item(const std::vector<std::string>& values, double alpha = 0.01) {
  std::vector<Row> rows;
  for (std::size_t i = 0; i < values.size(); ++i) rows.emplace_back("s" + std::to_string(i), "d", "price", values[i]);
  return make_claims(number_schema(alpha), rows);
}

inline GoldStandard make_gold(const ClaimSet& claims, const std::vector<std::tuple<std::string, std::string, std::string>>& rows) {
  std::map<ItemKey, Value> entries;
  for (const auto& [obj, attr, raw] : rows) {
    const auto a = *claims.schema().find(attr);
    entries.emplace(ItemKey{obj, a}, normalize_value(raw, claims.schema().at(a).kind));
  }
  return GoldStandard(std::move(entries));
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::path(TD_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path.string();
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace fixtures
