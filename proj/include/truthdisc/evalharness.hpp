#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "truthdisc/copydetect.hpp"
#include "truthdisc/fusion.hpp"
#include "truthdisc/metrics.hpp"

namespace truthdisc {

/// Everything a fusion run needs besides the data.
struct RunSettings {
  FusionConfig fusion;
  CopyParams copy;
  const TrustMap* input_trust = nullptr;
  const KnownCopiers* known_copiers = nullptr;
};

/// run_fusion, or run_accucopy for AccuCopy.
FusionResult run_method(const MethodSpec& method, const BucketedClaims& buckets, const RunSettings& settings);

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  std::size_t correct = 0;
  std::size_t evaluated = 0;  // output items present in gold
};

/// Precision over the output items that are in gold, recall over all of gold.
PrecisionRecall precision_recall(std::span<const Selection> selections, const BucketedClaims& buckets,
                                 const GoldStandard& gold);

/// RMS of sampled minus computed trust over the keys both maps share; empty
/// when they share none.
std::optional<double> trust_deviation(const TrustMap& sampled, const TrustMap& computed);
/// Mean computed minus mean sampled trust over the shared keys.
std::optional<double> trust_difference(const TrustMap& sampled, const TrustMap& computed);

struct EvalReport {
  MethodSpec method;
  double precision = 0.0;
  double recall = 0.0;
  std::optional<double> trust_deviation;
  std::optional<double> trust_difference;
  std::chrono::nanoseconds wall_time{0};
  std::size_t rounds = 0;
  bool converged = true;
  std::size_t ties = 0;
};

/// Runs one method on in-memory data and scores it against gold. The
/// reported time covers the fusion run only.
EvalReport timed_run(const MethodSpec& method, const BucketedClaims& buckets, const GoldStandard& gold,
                     const RunSettings& settings, FusionResult* result_out = nullptr);

struct CurvePoint {
  std::size_t k = 0;
  double recall = 0.0;
  double precision = 0.0;
  SourceId added_source;
};

/// Sources ordered by coverage times accuracy against gold, descending; ties
/// by id; sources without a defined accuracy last.
std::vector<SourceId> rank_sources(const ClaimSet& claims, const GoldStandard& gold, const Tolerances& tolerances);

/// Recall after fusing each prefix of the ranked sources. Tolerances are
/// those of the full ClaimSet; gold is held fixed.
std::vector<CurvePoint> incremental_curve(const MethodSpec& method, const ClaimSet& claims,
                                          const GoldStandard& gold, const RunSettings& settings);

struct DominanceRow {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count = 0;
  std::optional<double> method_precision;
  std::optional<double> vote_precision;
};

/// Gold items (with claims) partitioned by dominance factor into buckets
/// [lower, upper) of the given width; the last bucket includes 1.0.
std::vector<DominanceRow> precision_by_dominance(std::span<const Selection> method_selections,
                                                 std::span<const Selection> vote_selections,
                                                 const BucketedClaims& buckets, const GoldStandard& gold,
                                                 double width = 0.1);

struct SeriesSummary {
  double average = 0.0;
  double minimum = 0.0;
  double stddev = 0.0;
};

/// Average, minimum and population standard deviation.
SeriesSummary time_series_summary(std::span<const double> precisions);

/// Precision of one method on each snapshot.
std::vector<double> snapshot_precisions(const MethodSpec& method, std::span<const Snapshot> snapshots,
                                        const RunSettings& settings);

}  // namespace truthdisc
