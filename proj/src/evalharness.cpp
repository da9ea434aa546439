#include "truthdisc/evalharness.hpp"

#include <algorithm>
#include <cmath>

#include "truthdisc/error.hpp"

namespace truthdisc {

FusionResult run_method(const MethodSpec& method, const BucketedClaims& buckets, const RunSettings& settings) {
  if (method.method == Method::AccuCopy)
    return run_accucopy(buckets, settings.fusion, settings.copy, method.per_attribute, settings.input_trust,
                        settings.known_copiers)
        .fusion;
  return run_fusion(method, buckets, settings.fusion, settings.input_trust);
}

PrecisionRecall precision_recall(std::span<const Selection> selections, const BucketedClaims& buckets,
                                 const GoldStandard& gold) {
  if (gold.empty()) throw Error(ErrorCode::InvalidArgument, "precision/recall needs a non-empty gold standard");
  const auto& claims = buckets.claims();
  PrecisionRecall pr;
  for (const auto& s : selections) {
    const auto& key = claims.items()[s.item];
    const Value* truth = gold.find(key);
    if (!truth) continue;
    ++pr.evaluated;
    if (values_match(s.selected, *truth, claims.schema().at(key.attribute), buckets.tolerances().of(key.attribute)))
      ++pr.correct;
  }
  pr.precision = pr.evaluated ? static_cast<double>(pr.correct) / static_cast<double>(pr.evaluated) : 0.0;
  pr.recall = static_cast<double>(pr.correct) / static_cast<double>(gold.size());
  return pr;
}

std::optional<double> trust_deviation(const TrustMap& sampled, const TrustMap& computed) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& [key, t] : sampled) {
    const auto it = computed.find(key);
    if (it == computed.end()) continue;
    sum += (t - it->second) * (t - it->second);
    ++n;
  }
  if (n == 0) return std::nullopt;
  return std::sqrt(sum / static_cast<double>(n));
}

std::optional<double> trust_difference(const TrustMap& sampled, const TrustMap& computed) {
  double s_sum = 0.0, c_sum = 0.0;
  std::size_t n = 0;
  for (const auto& [key, t] : sampled) {
    const auto it = computed.find(key);
    if (it == computed.end()) continue;
    s_sum += t;
    c_sum += it->second;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return (c_sum - s_sum) / static_cast<double>(n);
}

EvalReport timed_run(const MethodSpec& method, const BucketedClaims& buckets, const GoldStandard& gold,
                     const RunSettings& settings, FusionResult* result_out) {
  FusionResult result = run_method(method, buckets, settings);
  EvalReport report;
  report.method = method;
  const auto pr = precision_recall(result.selections, buckets, gold);
  report.precision = pr.precision;
  report.recall = pr.recall;
  if (method.method != Method::Vote) {
    const auto sampled = sample_trust(method, buckets, gold, settings.fusion);
    report.trust_deviation = trust_deviation(sampled, result.trust);
    report.trust_difference = trust_difference(sampled, result.trust);
  }
  report.wall_time = result.wall_time;
  report.rounds = result.rounds_used;
  report.converged = result.converged;
  report.ties = result.ties;
  if (result_out) *result_out = std::move(result);
  return report;
}

std::vector<SourceId> rank_sources(const ClaimSet& claims, const GoldStandard& gold, const Tolerances& tolerances) {
  struct Ranked {
    SourceId id;
    std::optional<double> score;
  };
  std::vector<Ranked> ranked;
  for (std::size_t s = 0; s < claims.sources().size(); ++s) {
    const auto acc = source_accuracy(claims, s, gold, tolerances);
    std::optional<double> score;
    if (acc) score = *acc * source_coverage(claims, s, gold);
    ranked.push_back({claims.sources()[s], score});
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.score.has_value() != b.score.has_value()) return a.score.has_value();
    if (a.score && *a.score != *b.score) return *a.score > *b.score;
    return a.id < b.id;
  });
  std::vector<SourceId> out;
  for (auto& r : ranked) out.push_back(std::move(r.id));
  return out;
}

std::vector<CurvePoint> incremental_curve(const MethodSpec& method, const ClaimSet& claims, const GoldStandard& gold,
                                          const RunSettings& settings) {
  if (gold.empty()) throw Error(ErrorCode::InvalidArgument, "incremental curve needs a non-empty gold standard");
  const auto tolerances = compute_tolerances(claims);
  const auto order = rank_sources(claims, gold, tolerances);
  std::vector<CurvePoint> curve;
  std::vector<SourceId> prefix;
  for (std::size_t k = 1; k <= order.size(); ++k) {
    prefix.push_back(order[k - 1]);
    const ClaimSet subset = claims.restrict_to(prefix);
    CurvePoint p;
    p.k = k;
    p.added_source = order[k - 1];
    if (!subset.claims().empty()) {
      const BucketedClaims buckets(subset, tolerances);
      RunSettings local = settings;
      local.input_trust = nullptr;
      const auto result = run_method(method, buckets, local);
      const auto pr = precision_recall(result.selections, buckets, gold);
      p.recall = pr.recall;
      p.precision = pr.precision;
    }
    curve.push_back(p);
  }
  return curve;
}

std::vector<DominanceRow> precision_by_dominance(std::span<const Selection> method_selections,
                                                 std::span<const Selection> vote_selections,
                                                 const BucketedClaims& buckets, const GoldStandard& gold,
                                                 double width) {
  if (!(width > 0.0 && width <= 1.0)) throw Error(ErrorCode::InvalidArgument, "bucket width must lie in (0, 1]");
  const auto n = static_cast<std::size_t>(std::ceil(1.0 / width - 1e-9));
  std::vector<DominanceRow> rows(n);
  std::vector<std::size_t> method_correct(n, 0), vote_correct(n, 0);
  for (std::size_t b = 0; b < n; ++b) {
    rows[b].lower = static_cast<double>(b) * width;
    rows[b].upper = b + 1 == n ? 1.0 : static_cast<double>(b + 1) * width;
  }
  const auto& claims = buckets.claims();
  auto correct = [&](std::span<const Selection> sel, std::size_t item, const Value& truth) {
    const auto& key = claims.items()[item];
    return values_match(sel[item].selected, truth, claims.schema().at(key.attribute),
                        buckets.tolerances().of(key.attribute));
  };
  for (const auto& [key, truth] : gold.entries()) {
    const auto d = claims.find_item(key);
    if (!d) continue;
    const double factor = dominant(buckets.item(*d).buckets).factor;
    const auto b = std::min(n - 1, static_cast<std::size_t>(std::floor(factor / width + 1e-9)));
    ++rows[b].count;
    if (correct(method_selections, *d, truth)) ++method_correct[b];
    if (correct(vote_selections, *d, truth)) ++vote_correct[b];
  }
  for (std::size_t b = 0; b < n; ++b) {
    if (rows[b].count == 0) continue;
    const auto c = static_cast<double>(rows[b].count);
    rows[b].method_precision = static_cast<double>(method_correct[b]) / c;
    rows[b].vote_precision = static_cast<double>(vote_correct[b]) / c;
  }
  return rows;
}

SeriesSummary time_series_summary(std::span<const double> precisions) {
  if (precisions.empty()) throw Error(ErrorCode::InvalidArgument, "time series summary of no snapshots");
  SeriesSummary s;
  double sum = 0.0;
  s.minimum = precisions.front();
  for (double p : precisions) {
    sum += p;
    s.minimum = std::min(s.minimum, p);
  }
  s.average = sum / static_cast<double>(precisions.size());
  double sq = 0.0;
  for (double p : precisions) sq += (p - s.average) * (p - s.average);
  s.stddev = std::sqrt(sq / static_cast<double>(precisions.size()));
  return s;
}

std::vector<double> snapshot_precisions(const MethodSpec& method, std::span<const Snapshot> snapshots,
                                        const RunSettings& settings) {
  std::vector<double> out;
  for (const auto& snap : snapshots) {
    const BucketedClaims buckets(*snap.claims, compute_tolerances(*snap.claims));
    RunSettings local = settings;
    local.input_trust = nullptr;
    const auto result = run_method(method, buckets, local);
    out.push_back(precision_recall(result.selections, buckets, *snap.gold).precision);
  }
  return out;
}

}  // namespace truthdisc
