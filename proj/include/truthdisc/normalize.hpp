#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "truthdisc/model.hpp"

namespace truthdisc {

/// Canonicalizes a raw string for the given kind.
///
/// Numbers accept thousands separators, currency symbols, a trailing '%' and
/// K/M/B unit suffixes ("6.7M" becomes 6700000). The power of ten of the last
/// significant digit written is kept as the value's granularity. Times accept
/// `HH:MM` with an optional am/pm marker. Text is trimmed and case-folded.
/// Throws Error(Parse) carrying the raw string.
Value normalize_value(std::string_view raw, ValueKind kind);

/// Median of a multiset; the mean of the two middle elements for even sizes.
double median(std::vector<double> values);

/// alpha * median of every value provided on a number attribute.
double tolerance(const AttributeSpec& attribute, std::span<const double> all_values);

/// Tolerance per attribute of a ClaimSet: relative-median for numbers, the
/// configured minutes for times and 0 for text.
class Tolerances {
 public:
  Tolerances() = default;
  explicit Tolerances(std::vector<double> per_attribute) : tau_(std::move(per_attribute)) {}

  double of(std::size_t attribute) const { return tau_.at(attribute); }
  std::span<const double> values() const { return tau_; }

 private:
  std::vector<double> tau_;
};

Tolerances compute_tolerances(const ClaimSet& claims);

bool values_match(const Value& a, const Value& b, const AttributeSpec& attribute, double tau);

struct Bucket {
  Value center;
  double half_width = 0.0;
  /// Distinct member values, ascending.
  std::vector<Value> members;
  std::size_t provider_count = 0;
};

/// Half-width of the buckets for an attribute: tau/2 for numbers, the
/// tolerance minutes for times, 0 (exact grouping) for text.
double bucket_half_width(const AttributeSpec& attribute, double tau);

/// Buckets of one item on the grid anchored at its most provided value,
/// sorted by center. Empty buckets are omitted.
std::vector<Bucket> bucketize(const ClaimSet& claims, std::size_t item, double tau);

struct SimilarityParams {
  double decay_width_multiplier = 10.0;
  double time_zero_at = 60.0;
  double rho = 0.5;
};

/// Symmetric similarity in [0, 1]. Linear decay for numbers and times,
/// normalized edit similarity for text.
double similarity(const Value& a, const Value& b, const AttributeSpec& attribute, double tau,
                  const SimilarityParams& params);

/// True when rounding `fine` to the granularity of `coarse` gives `coarse`
/// and `coarse` is strictly coarser (or the two are equal). Times and text
/// subsume only on equality.
bool subsumes(const Value& coarse, const Value& fine, const AttributeSpec& attribute);

/// Every claim of a ClaimSet assigned to its bucket. This is the value domain
/// shared by the metrics and fusion modules.
class BucketedClaims {
 public:
  struct Entry {
    std::size_t source;
    std::size_t bucket;
    std::size_t claim;  // index into ClaimSet::claims()
  };
  struct Item {
    std::size_t attribute;
    std::vector<Bucket> buckets;
    std::vector<Entry> entries;  // ordered by source index
  };
  struct SourceEntry {
    std::size_t item;
    std::size_t entry;
  };

  BucketedClaims(const ClaimSet& claims, Tolerances tolerances);

  const ClaimSet& claims() const { return *claims_; }
  const Tolerances& tolerances() const { return tolerances_; }
  std::span<const Item> items() const { return items_; }
  const Item& item(std::size_t index) const { return items_[index]; }
  std::span<const SourceEntry> source_entries(std::size_t source) const {
    return by_source_[source];
  }
  std::size_t num_sources() const { return by_source_.size(); }

 private:
  const ClaimSet* claims_;
  Tolerances tolerances_;
  std::vector<Item> items_;
  std::vector<std::vector<SourceEntry>> by_source_;
};

}  // namespace truthdisc
