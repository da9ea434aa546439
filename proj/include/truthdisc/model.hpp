#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace truthdisc {

enum class ValueKind { Number, TimeOfDay, Text };

enum class TolerancePolicy { RelativeMedian, AbsoluteMinutes, ExactIgnoreCase };

std::string_view to_string(ValueKind kind);
ValueKind parse_value_kind(std::string_view name);

struct SourceId {
  std::string value;

  auto operator<=>(const SourceId&) const = default;
};

struct AttributeSpec {
  std::string name;
  ValueKind kind = ValueKind::Number;
  /// Alpha for numbers, minutes for times, ignored for text.
  double tolerance_param = 0.01;

  TolerancePolicy policy() const;
};

/// Ordered list of attributes. Attribute indices are stable for the lifetime
/// of every ClaimSet built on the schema.
class Schema {
 public:
  Schema() = default;
  explicit Schema(std::vector<AttributeSpec> attributes);

  std::span<const AttributeSpec> attributes() const { return attributes_; }
  const AttributeSpec& at(std::size_t index) const { return attributes_.at(index); }
  std::size_t size() const { return attributes_.size(); }
  std::optional<std::size_t> find(std::string_view name) const;

 private:
  std::vector<AttributeSpec> attributes_;
};

/// Reads `name,kind,tolerance_param` lines. A blank parameter takes the
/// supplied default for the kind.
Schema load_schema(const std::string& path, double default_alpha = 0.01,
                   double default_minutes = 10.0);
void write_schema(const Schema& schema, const std::string& path);

/// A normalized claim value. Numbers optionally carry the power of ten of
/// their last significant digit as written by the source; it takes no part in
/// equality or ordering.
class Value {
 public:
  static Value number(double v, std::optional<int> granularity = std::nullopt);
  static Value time_of_day(int minutes);
  static Value text(std::string s);

  ValueKind kind() const;
  double number() const;
  int minutes() const;
  const std::string& text() const;
  std::optional<int> granularity() const { return granularity_; }

  /// Numeric payload of Number or TimeOfDay values.
  double as_real() const;

  /// Canonical text form; re-normalizing it yields an equal Value with the
  /// same granularity.
  std::string to_string() const;

  friend bool operator==(const Value& a, const Value& b) { return a.payload_ == b.payload_; }
  /// Total order: kind first, then numeric `<` or lexicographic on text.
  friend std::weak_ordering operator<=>(const Value& a, const Value& b);

 private:
  std::variant<double, int, std::string> payload_;
  std::optional<int> granularity_;
};

struct ItemKey {
  std::string object;
  std::size_t attribute = 0;

  auto operator<=>(const ItemKey&) const = default;
};

struct Claim {
  SourceId source;
  ItemKey item;
  Value value;
};

/// One claim inside a ClaimSet, referencing the set's source and item tables.
struct IndexedClaim {
  std::uint32_t source;
  std::uint32_t item;
  Value value;
};

/// Immutable snapshot of claims. Claims are stored sorted by (item, source)
/// so that every item owns a contiguous range.
class ClaimSet {
 public:
  ClaimSet(std::shared_ptr<const Schema> schema, std::string snapshot_label,
           std::vector<Claim> claims);

  const Schema& schema() const { return *schema_; }
  std::shared_ptr<const Schema> schema_ptr() const { return schema_; }
  const std::string& snapshot_label() const { return label_; }

  std::span<const IndexedClaim> claims() const { return claims_; }
  std::span<const SourceId> sources() const { return sources_; }
  std::span<const ItemKey> items() const { return items_; }
  const AttributeSpec& attribute_of(std::size_t item) const {
    return schema_->at(items_[item].attribute);
  }

  /// Claims on one item: S̄(d).
  std::span<const IndexedClaim> item_claims(std::size_t item) const;
  /// Indices into `claims()` of the claims made by one source.
  std::span<const std::uint32_t> source_claims(std::size_t source) const {
    return by_source_[source];
  }

  std::optional<std::size_t> find_source(const SourceId& id) const;
  std::optional<std::size_t> find_item(const ItemKey& key) const;

  /// New ClaimSet restricted to the listed sources.
  ClaimSet restrict_to(std::span<const SourceId> keep) const;

  std::vector<Claim> to_claims() const;

 private:
  std::shared_ptr<const Schema> schema_;
  std::string label_;
  std::vector<SourceId> sources_;
  std::vector<ItemKey> items_;
  std::vector<IndexedClaim> claims_;
  std::vector<std::size_t> item_offsets_;
  std::vector<std::vector<std::uint32_t>> by_source_;
};

struct CsvOptions {
  char delimiter = ',';
};

ClaimSet load_claims(const std::string& path, std::shared_ptr<const Schema> schema,
                     const CsvOptions& options = {}, std::string snapshot_label = {});
void write_claims(const ClaimSet& claims, const std::string& path,
                  const CsvOptions& options = {});

class GoldStandard {
 public:
  GoldStandard() = default;
  explicit GoldStandard(std::map<ItemKey, Value> entries, std::size_t missing_items = 0)
      : entries_(std::move(entries)), missing_items_(missing_items) {}

  const std::map<ItemKey, Value>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const Value* find(const ItemKey& key) const;
  /// Gold items that have no claim in the ClaimSet used at load time.
  std::size_t missing_items() const { return missing_items_; }

 private:
  std::map<ItemKey, Value> entries_;
  std::size_t missing_items_ = 0;
};

GoldStandard load_gold(const std::string& path, const ClaimSet& claims,
                       const CsvOptions& options = {});
void write_gold(const GoldStandard& gold, const Schema& schema, const std::string& path);

/// Plurality vote among `trusted` on every item they provide at least
/// `min_providers` times. Tied items are left out.
GoldStandard majority_gold(std::span<const SourceId> trusted, const ClaimSet& claims,
                           std::size_t min_providers);

}  // namespace truthdisc
