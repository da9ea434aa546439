#include "truthdisc/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>

#include <fmt/format.h>

#include "csv.hpp"
#include "truthdisc/error.hpp"
#include "truthdisc/normalize.hpp"

namespace truthdisc {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string at_line(const std::string& path, std::size_t line) {
  return path + ":" + std::to_string(line) + ": ";
}

}  // namespace

std::string_view to_string(ValueKind kind) {
  switch (kind) {
    case ValueKind::Number: return "number";
    case ValueKind::TimeOfDay: return "time";
    case ValueKind::Text: return "text";
  }
  return "?";
}

ValueKind parse_value_kind(std::string_view name) {
  const std::string n = lower(name);
  if (n == "number" || n == "numeric") return ValueKind::Number;
  if (n == "time" || n == "timeofday") return ValueKind::TimeOfDay;
  if (n == "text" || n == "string") return ValueKind::Text;
  throw Error(ErrorCode::Parse, "unknown attribute kind '" + std::string(name) + "'");
}

TolerancePolicy AttributeSpec::policy() const {
  switch (kind) {
    case ValueKind::Number: return TolerancePolicy::RelativeMedian;
    case ValueKind::TimeOfDay: return TolerancePolicy::AbsoluteMinutes;
    case ValueKind::Text: return TolerancePolicy::ExactIgnoreCase;
  }
  return TolerancePolicy::ExactIgnoreCase;
}

Schema::Schema(std::vector<AttributeSpec> attributes) : attributes_(std::move(attributes)) {
  std::set<std::string> seen;
  for (const auto& a : attributes_) {
    if (a.name.empty()) throw Error(ErrorCode::InvalidArgument, "attribute with empty name");
    if (!seen.insert(lower(a.name)).second)
      throw Error(ErrorCode::Duplicate, "attribute '" + a.name + "' declared twice");
    if (a.kind == ValueKind::Number && !(a.tolerance_param > 0.0))
      throw Error(ErrorCode::InvalidArgument, "attribute '" + a.name + "': alpha must be > 0");
    if (a.kind == ValueKind::TimeOfDay && !(a.tolerance_param >= 0.0))
      throw Error(ErrorCode::InvalidArgument, "attribute '" + a.name + "': minutes must be >= 0");
  }
}

std::optional<std::size_t> Schema::find(std::string_view name) const {
  const std::string wanted = lower(name);
  for (std::size_t i = 0; i < attributes_.size(); ++i) {
    if (lower(attributes_[i].name) == wanted) return i;
  }
  return std::nullopt;
}

Schema load_schema(const std::string& path, double default_alpha, double default_minutes) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  std::vector<AttributeSpec> attributes;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[0] == '#') continue;
    const auto fields = csv::split(line, ',');
    if (line_no == 1 && lower(fields[0]) == "name") continue;
    if (fields.size() < 2)
      throw Error(ErrorCode::Parse, at_line(path, line_no) + "expected name,kind[,tolerance_param]");
    AttributeSpec spec;
    spec.name = fields[0];
    try {
      spec.kind = parse_value_kind(fields[1]);
    } catch (const Error& e) {
      throw Error(ErrorCode::Parse, at_line(path, line_no) + e.what());
    }
    spec.tolerance_param = spec.kind == ValueKind::TimeOfDay ? default_minutes : default_alpha;
    if (fields.size() > 2 && !fields[2].empty()) {
      try {
        std::size_t used = 0;
        spec.tolerance_param = std::stod(fields[2], &used);
        if (used != fields[2].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw Error(ErrorCode::Parse, at_line(path, line_no) + "bad tolerance '" + fields[2] + "'");
      }
    }
    attributes.push_back(std::move(spec));
  }
  return Schema(std::move(attributes));
}

void write_schema(const Schema& schema, const std::string& path) {
  csv::Writer out(path);
  out.row({"name", "kind", "tolerance_param"});
  for (const auto& a : schema.attributes()) {
    out.row({a.name, std::string(to_string(a.kind)),
             a.kind == ValueKind::Text ? std::string() : fmt::format("{}", a.tolerance_param)});
  }
}

// --- Value ---------------------------------------------------------------

Value Value::number(double v, std::optional<int> granularity) {
  if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "number must be finite");
  Value out;
  out.payload_ = v;
  out.granularity_ = granularity;
  return out;
}

Value Value::time_of_day(int minutes) {
  if (minutes < 0 || minutes >= 1440)
    throw Error(ErrorCode::InvalidArgument, "time of day out of range: " + std::to_string(minutes));
  Value out;
  out.payload_ = minutes;
  return out;
}

Value Value::text(std::string s) {
  Value out;
  out.payload_ = std::move(s);
  return out;
}

ValueKind Value::kind() const {
  switch (payload_.index()) {
    case 0: return ValueKind::Number;
    case 1: return ValueKind::TimeOfDay;
    default: return ValueKind::Text;
  }
}

double Value::number() const { return std::get<double>(payload_); }
int Value::minutes() const { return std::get<int>(payload_); }
const std::string& Value::text() const { return std::get<std::string>(payload_); }

double Value::as_real() const {
  if (const auto* d = std::get_if<double>(&payload_)) return *d;
  if (const auto* m = std::get_if<int>(&payload_)) return *m;
  throw Error(ErrorCode::InvalidArgument, "text value has no numeric payload");
}

std::string Value::to_string() const {
  switch (kind()) {
    case ValueKind::Number: {
      const double v = number();
      if (granularity_) {
        if (*granularity_ < 0) return fmt::format("{:.{}f}", v, -*granularity_);
        return fmt::format("{:.0f}", v);
      }
      return fmt::format("{}", v);
    }
    case ValueKind::TimeOfDay: return fmt::format("{:02d}:{:02d}", minutes() / 60, minutes() % 60);
    case ValueKind::Text: return text();
  }
  return {};
}

std::weak_ordering operator<=>(const Value& a, const Value& b) {
  if (a.payload_.index() != b.payload_.index()) return a.payload_.index() <=> b.payload_.index();
  switch (a.kind()) {
    case ValueKind::Number: {
      const double x = a.number();
      const double y = b.number();
      if (x < y) return std::weak_ordering::less;
      if (y < x) return std::weak_ordering::greater;
      return std::weak_ordering::equivalent;
    }
    case ValueKind::TimeOfDay: return a.minutes() <=> b.minutes();
    case ValueKind::Text: return a.text().compare(b.text()) <=> 0;
  }
  return std::weak_ordering::equivalent;
}

// --- ClaimSet ------------------------------------------------------------

ClaimSet::ClaimSet(std::shared_ptr<const Schema> schema, std::string snapshot_label,
                   std::vector<Claim> claims)
    : schema_(std::move(schema)), label_(std::move(snapshot_label)) {
  if (!schema_) throw Error(ErrorCode::InvalidArgument, "ClaimSet needs a schema");
  for (const auto& c : claims) {
    if (c.source.value.empty()) throw Error(ErrorCode::InvalidArgument, "empty source id");
    if (c.item.attribute >= schema_->size())
      throw Error(ErrorCode::UnknownAttribute, "attribute index out of range");
    if (c.value.kind() != schema_->at(c.item.attribute).kind)
      throw Error(ErrorCode::InvalidArgument,
                  "value kind does not match attribute '" + schema_->at(c.item.attribute).name + "'");
    sources_.push_back(c.source);
    items_.push_back(c.item);
  }
  std::sort(sources_.begin(), sources_.end());
  sources_.erase(std::unique(sources_.begin(), sources_.end()), sources_.end());
  std::sort(items_.begin(), items_.end());
  items_.erase(std::unique(items_.begin(), items_.end()), items_.end());

  claims_.reserve(claims.size());
  for (auto& c : claims) {
    const auto s = std::lower_bound(sources_.begin(), sources_.end(), c.source) - sources_.begin();
    const auto d = std::lower_bound(items_.begin(), items_.end(), c.item) - items_.begin();
    claims_.push_back({static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(d),
                       std::move(c.value)});
  }
  std::sort(claims_.begin(), claims_.end(), [](const IndexedClaim& a, const IndexedClaim& b) {
    return std::tie(a.item, a.source) < std::tie(b.item, b.source);
  });
  for (std::size_t i = 1; i < claims_.size(); ++i) {
    if (claims_[i].item == claims_[i - 1].item && claims_[i].source == claims_[i - 1].source) {
      const auto& key = items_[claims_[i].item];
      throw Error(ErrorCode::Duplicate, "duplicate claim by " + sources_[claims_[i].source].value +
                                            " on " + key.object + "/" +
                                            schema_->at(key.attribute).name);
    }
  }

  item_offsets_.assign(items_.size() + 1, 0);
  for (const auto& c : claims_) ++item_offsets_[c.item + 1];
  for (std::size_t i = 1; i < item_offsets_.size(); ++i) item_offsets_[i] += item_offsets_[i - 1];

  by_source_.resize(sources_.size());
  for (std::size_t i = 0; i < claims_.size(); ++i)
    by_source_[claims_[i].source].push_back(static_cast<std::uint32_t>(i));
}

std::span<const IndexedClaim> ClaimSet::item_claims(std::size_t item) const {
  return std::span<const IndexedClaim>(claims_).subspan(
      item_offsets_[item], item_offsets_[item + 1] - item_offsets_[item]);
}

std::optional<std::size_t> ClaimSet::find_source(const SourceId& id) const {
  auto it = std::lower_bound(sources_.begin(), sources_.end(), id);
  if (it == sources_.end() || *it != id) return std::nullopt;
  return static_cast<std::size_t>(it - sources_.begin());
}

std::optional<std::size_t> ClaimSet::find_item(const ItemKey& key) const {
  auto it = std::lower_bound(items_.begin(), items_.end(), key);
  if (it == items_.end() || *it != key) return std::nullopt;
  return static_cast<std::size_t>(it - items_.begin());
}

ClaimSet ClaimSet::restrict_to(std::span<const SourceId> keep) const {
  std::set<SourceId> wanted(keep.begin(), keep.end());
  std::vector<Claim> out;
  for (const auto& c : claims_) {
    if (wanted.count(sources_[c.source])) out.push_back({sources_[c.source], items_[c.item], c.value});
  }
  return ClaimSet(schema_, label_, std::move(out));
}

std::vector<Claim> ClaimSet::to_claims() const {
  std::vector<Claim> out;
  out.reserve(claims_.size());
  for (const auto& c : claims_) out.push_back({sources_[c.source], items_[c.item], c.value});
  return out;
}

// --- loading -------------------------------------------------------------

ClaimSet load_claims(const std::string& path, std::shared_ptr<const Schema> schema,
                     const CsvOptions& options, std::string snapshot_label) {
  csv::Reader reader(path, options.delimiter);
  const auto c_source = reader.require_column("source");
  const auto c_object = reader.require_column("object");
  const auto c_attr = reader.require_column("attribute");
  const auto c_value = reader.require_column("value");
  const auto width = std::max({c_source, c_object, c_attr, c_value}) + 1;

  std::vector<Claim> claims;
  std::set<std::tuple<std::string, std::string, std::size_t>> seen;
  std::vector<std::string> row;
  while (reader.next(row)) {
    const auto where = at_line(path, reader.line_number());
    if (row.size() < width) throw Error(ErrorCode::Parse, where + "too few columns");
    auto attr = schema->find(row[c_attr]);
    if (!attr) throw Error(ErrorCode::UnknownAttribute, where + "unknown attribute '" + row[c_attr] + "'");
    if (row[c_source].empty()) throw Error(ErrorCode::Parse, where + "empty source");
    if (!seen.emplace(row[c_source], row[c_object], *attr).second)
      throw Error(ErrorCode::Duplicate, where + "duplicate claim by " + row[c_source] + " on " +
                                            row[c_object] + "/" + row[c_attr]);
    Value value = [&] {
      try {
        return normalize_value(row[c_value], schema->at(*attr).kind);
      } catch (const Error& e) {
        throw Error(ErrorCode::Parse, where + e.what());
      }
    }();
    claims.push_back({SourceId{row[c_source]}, ItemKey{row[c_object], *attr}, std::move(value)});
  }
  return ClaimSet(std::move(schema), std::move(snapshot_label), std::move(claims));
}

void write_claims(const ClaimSet& claims, const std::string& path, const CsvOptions& options) {
  csv::Writer out(path, options.delimiter);
  out.row({"source", "object", "attribute", "value"});
  for (const auto& c : claims.claims()) {
    const auto& item = claims.items()[c.item];
    out.row({claims.sources()[c.source].value, item.object, claims.schema().at(item.attribute).name,
             c.value.to_string()});
  }
}

const Value* GoldStandard::find(const ItemKey& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

GoldStandard load_gold(const std::string& path, const ClaimSet& claims, const CsvOptions& options) {
  csv::Reader reader(path, options.delimiter);
  const auto c_object = reader.require_column("object");
  const auto c_attr = reader.require_column("attribute");
  const auto c_value = reader.require_column("value");
  const auto width = std::max({c_object, c_attr, c_value}) + 1;

  std::map<ItemKey, Value> entries;
  std::size_t missing = 0;
  std::vector<std::string> row;
  while (reader.next(row)) {
    const auto where = at_line(path, reader.line_number());
    if (row.size() < width) throw Error(ErrorCode::Parse, where + "too few columns");
    auto attr = claims.schema().find(row[c_attr]);
    if (!attr) throw Error(ErrorCode::UnknownAttribute, where + "unknown attribute '" + row[c_attr] + "'");
    ItemKey key{row[c_object], *attr};
    Value value = [&] {
      try {
        return normalize_value(row[c_value], claims.schema().at(*attr).kind);
      } catch (const Error& e) {
        throw Error(ErrorCode::Parse, where + e.what());
      }
    }();
    if (!claims.find_item(key)) ++missing;
    if (!entries.emplace(key, std::move(value)).second)
      throw Error(ErrorCode::Duplicate, where + "duplicate gold item " + row[c_object] + "/" + row[c_attr]);
  }
  return GoldStandard(std::move(entries), missing);
}

void write_gold(const GoldStandard& gold, const Schema& schema, const std::string& path) {
  csv::Writer out(path);
  out.row({"object", "attribute", "value"});
  for (const auto& [key, value] : gold.entries())
    out.row({key.object, schema.at(key.attribute).name, value.to_string()});
}

GoldStandard majority_gold(std::span<const SourceId> trusted, const ClaimSet& claims,
                           std::size_t min_providers) {
  if (trusted.empty()) throw Error(ErrorCode::InvalidArgument, "majority_gold needs at least one source");
  if (min_providers < 1) throw Error(ErrorCode::InvalidArgument, "min_providers must be >= 1");
  std::vector<bool> is_trusted(claims.sources().size(), false);
  for (const auto& id : trusted) {
    auto s = claims.find_source(id);
    if (!s) throw Error(ErrorCode::InvalidArgument, "unknown source " + id.value);
    is_trusted[*s] = true;
  }

  std::map<ItemKey, Value> entries;
  for (std::size_t d = 0; d < claims.items().size(); ++d) {
    std::vector<std::pair<Value, std::size_t>> counts;
    std::size_t providers = 0;
    for (const auto& c : claims.item_claims(d)) {
      if (!is_trusted[c.source]) continue;
      ++providers;
      auto it = std::find_if(counts.begin(), counts.end(), [&](const auto& p) { return p.first == c.value; });
      if (it == counts.end()) counts.emplace_back(c.value, 1);
      else ++it->second;
    }
    if (providers < min_providers || counts.empty()) continue;
    std::sort(counts.begin(), counts.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    if (counts.size() > 1 && counts[0].second == counts[1].second) continue;
    entries.emplace(claims.items()[d], counts[0].first);
  }
  return GoldStandard(std::move(entries));
}

}  // namespace truthdisc
