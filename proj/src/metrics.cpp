#include "truthdisc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "truthdisc/error.hpp"

namespace truthdisc {

double item_redundancy(const ClaimSet& claims, const ItemKey& item) {
  if (claims.sources().empty()) return 0.0;
  const auto d = claims.find_item(item);
  if (!d) return 0.0;
  return static_cast<double>(claims.item_claims(*d).size()) /
         static_cast<double>(claims.sources().size());
}

double object_redundancy(const ClaimSet& claims, std::string_view object_id) {
  if (claims.sources().empty()) return 0.0;
  std::set<std::uint32_t> providers;
  for (std::size_t d = 0; d < claims.items().size(); ++d) {
    if (claims.items()[d].object != object_id) continue;
    for (const auto& c : claims.item_claims(d)) providers.insert(c.source);
  }
  return static_cast<double>(providers.size()) / static_cast<double>(claims.sources().size());
}

double entropy(std::span<const Bucket> buckets) {
  std::size_t total = 0;
  for (const auto& b : buckets) total += b.provider_count;
  if (total == 0) return 0.0;
  double e = 0.0;
  for (const auto& b : buckets) {
    if (b.provider_count == 0) continue;
    const double p = static_cast<double>(b.provider_count) / static_cast<double>(total);
    e -= p * std::log2(p);
  }
  return e == 0.0 ? 0.0 : e;  // no negative zero for single-value items
}

Dominant dominant(std::span<const Bucket> buckets) {
  if (buckets.empty()) throw Error(ErrorCode::InvalidArgument, "dominant of an item without claims");
  std::size_t best = 0;
  std::size_t total = 0;
  for (std::size_t i = 0; i < buckets.size(); ++i) {
    total += buckets[i].provider_count;
    const auto& b = buckets[i];
    const auto& cur = buckets[best];
    if (b.provider_count > cur.provider_count ||
        (b.provider_count == cur.provider_count && b.center < cur.center))
      best = i;
  }
  return {buckets[best].center,
          static_cast<double>(buckets[best].provider_count) / static_cast<double>(total), best};
}

double deviation(std::span<const Bucket> buckets, ValueKind kind) {
  if (kind == ValueKind::Text) throw Error(ErrorCode::Undefined, "deviation is undefined for text");
  const auto dom = dominant(buckets);
  const double v0 = dom.value.as_real();
  if (kind == ValueKind::Number && v0 == 0.0)
    throw Error(ErrorCode::Undefined, "deviation is undefined for a zero dominant value");
  double sum = 0.0;
  for (const auto& b : buckets) {
    const double diff = b.center.as_real() - v0;
    const double term = kind == ValueKind::Number ? diff / v0 : diff;
    sum += term * term;
  }
  return std::sqrt(sum / static_cast<double>(buckets.size()));
}

double precision_of_dominant(const BucketedClaims& buckets, const GoldStandard& gold) {
  const auto& claims = buckets.claims();
  std::size_t covered = 0;
  std::size_t correct = 0;
  for (const auto& [key, truth] : gold.entries()) {
    const auto d = claims.find_item(key);
    if (!d) continue;
    ++covered;
    const auto dom = dominant(buckets.item(*d).buckets);
    if (values_match(dom.value, truth, claims.schema().at(key.attribute),
                     buckets.tolerances().of(key.attribute)))
      ++correct;
  }
  if (covered == 0) return 0.0;
  return static_cast<double>(correct) / static_cast<double>(covered);
}

std::optional<double> source_accuracy(const ClaimSet& claims, std::size_t source,
                                      const GoldStandard& gold, const Tolerances& tolerances) {
  std::size_t covered = 0;
  std::size_t correct = 0;
  for (auto idx : claims.source_claims(source)) {
    const auto& c = claims.claims()[idx];
    const auto& key = claims.items()[c.item];
    const Value* truth = gold.find(key);
    if (!truth) continue;
    ++covered;
    if (values_match(c.value, *truth, claims.schema().at(key.attribute), tolerances.of(key.attribute)))
      ++correct;
  }
  if (covered == 0) return std::nullopt;
  return static_cast<double>(correct) / static_cast<double>(covered);
}

double source_coverage(const ClaimSet& claims, std::size_t source, const GoldStandard& gold) {
  if (gold.empty()) return 0.0;
  std::size_t covered = 0;
  for (auto idx : claims.source_claims(source)) {
    if (gold.find(claims.items()[claims.claims()[idx].item])) ++covered;
  }
  return static_cast<double>(covered) / static_cast<double>(gold.size());
}

double accuracy_deviation(std::span<const double> series) {
  if (series.empty()) throw Error(ErrorCode::InvalidArgument, "accuracy_deviation of an empty series");
  double mean = 0.0;
  for (double a : series) mean += a;
  mean /= static_cast<double>(series.size());
  double sum = 0.0;
  for (double a : series) sum += (a - mean) * (a - mean);
  return std::sqrt(sum / static_cast<double>(series.size()));
}

ItemProfile profile_item(const BucketedClaims& buckets, std::size_t item) {
  const auto& claims = buckets.claims();
  const auto& it = buckets.item(item);
  ItemProfile p;
  p.item = claims.items()[item];
  p.num_providers = it.entries.size();
  p.num_values = it.buckets.size();
  p.entropy = entropy(it.buckets);
  const auto dom = dominant(it.buckets);
  p.dominant = dom.value;
  p.dominance_factor = dom.factor;
  const auto kind = claims.schema().at(it.attribute).kind;
  if (kind != ValueKind::Text && !(kind == ValueKind::Number && dom.value.number() == 0.0))
    p.deviation = deviation(it.buckets, kind);

  std::vector<std::size_t> order;
  for (std::size_t b = 0; b < it.buckets.size(); ++b)
    if (b != dom.bucket) order.push_back(b);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return it.buckets[a].provider_count > it.buckets[b].provider_count;
  });
  for (auto b : order) p.runner_up.push_back(it.buckets[b].center);
  return p;
}

std::vector<SourceProfile> profile_sources(std::span<const Snapshot> snapshots) {
  std::map<SourceId, SourceProfile> by_source;
  for (std::size_t t = 0; t < snapshots.size(); ++t) {
    const auto& claims = *snapshots[t].claims;
    const auto& gold = *snapshots[t].gold;
    const auto tolerances = compute_tolerances(claims);
    for (std::size_t s = 0; s < claims.sources().size(); ++s) {
      auto& p = by_source[claims.sources()[s]];
      p.source = claims.sources()[s];
      p.accuracy_series.resize(t);
      p.accuracy_series.push_back(source_accuracy(claims, s, gold, tolerances));
      p.accuracy = p.accuracy_series.back();
      p.coverage = source_coverage(claims, s, gold);
    }
  }
  std::vector<SourceProfile> out;
  for (auto& [id, p] : by_source) {
    p.accuracy_series.resize(snapshots.size());
    if (p.accuracy_series.size() != 0 && !p.accuracy_series.back()) {
      p.accuracy.reset();
      p.coverage = 0.0;
    }
    std::vector<double> defined;
    for (const auto& a : p.accuracy_series)
      if (a) defined.push_back(*a);
    p.accuracy_deviation = defined.empty() ? 0.0 : accuracy_deviation(defined);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace truthdisc
