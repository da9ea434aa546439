#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "truthdisc/model.hpp"
#include "truthdisc/normalize.hpp"

namespace truthdisc {

/// Fraction of the ClaimSet's sources that provide the item.
double item_redundancy(const ClaimSet& claims, const ItemKey& item);
/// Fraction of the ClaimSet's sources that provide any attribute of the object.
double object_redundancy(const ClaimSet& claims, std::string_view object_id);

/// Entropy in bits of the bucket provider distribution.
double entropy(std::span<const Bucket> buckets);

/// Relative RMS distance of the distinct bucket centers to the dominant
/// center for numbers; RMS minute distance for times. Throws
/// Error(Undefined) when the dominant number is 0 and for text.
double deviation(std::span<const Bucket> buckets, ValueKind kind);

struct Dominant {
  Value value;
  double factor = 0.0;
  std::size_t bucket = 0;
};

/// Bucket with most providers; the smallest center wins ties.
Dominant dominant(std::span<const Bucket> buckets);

/// Fraction of gold items (that have claims) whose dominant value matches
/// the gold value.
double precision_of_dominant(const BucketedClaims& buckets, const GoldStandard& gold);

/// Fraction of the source's gold-covered claims that match gold; empty when
/// the source covers no gold item.
std::optional<double> source_accuracy(const ClaimSet& claims, std::size_t source,
                                      const GoldStandard& gold, const Tolerances& tolerances);

/// Fraction of gold items the source provides.
double source_coverage(const ClaimSet& claims, std::size_t source, const GoldStandard& gold);

/// Population standard deviation.
double accuracy_deviation(std::span<const double> series);

struct ItemProfile {
  ItemKey item;
  std::size_t num_providers = 0;
  std::size_t num_values = 0;
  double entropy = 0.0;
  std::optional<double> deviation;  // empty for text or a zero dominant value
  Value dominant;
  double dominance_factor = 0.0;
  std::vector<Value> runner_up;  // remaining bucket centers by provider count
};

ItemProfile profile_item(const BucketedClaims& buckets, std::size_t item);

struct SourceProfile {
  SourceId source;
  std::optional<double> accuracy;
  double coverage = 0.0;
  std::vector<std::optional<double>> accuracy_series;
  double accuracy_deviation = 0.0;
};

struct Snapshot {
  const ClaimSet* claims;
  const GoldStandard* gold;
};

/// Accuracy of every source over a sequence of snapshots. `accuracy` and
/// `coverage` refer to the last snapshot; the deviation is taken over the
/// snapshots where the accuracy is defined.
std::vector<SourceProfile> profile_sources(std::span<const Snapshot> snapshots);

}  // namespace truthdisc
