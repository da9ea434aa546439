#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "truthdisc/fusion.hpp"
#include "truthdisc/model.hpp"
#include "truthdisc/normalize.hpp"

namespace truthdisc {

struct CopyParams {
  /// Prior of each copying direction; independence gets 1 - 2 * prior.
  double prior_copy_prob = 0.1;
  /// Probability that a copier copies a given item.
  double copy_rate = 0.8;
  double n_false = 10.0;

  void validate() const;
};

/// Directed copy probabilities over the sources of one ClaimSet (dense,
/// indexed by source position) and the per-claim independence weights
/// derived from them.
class CopyMatrix {
 public:
  CopyMatrix() = default;
  explicit CopyMatrix(std::size_t num_sources)
      : n_(num_sources), prob_(num_sources * num_sources, 0.0) {}

  std::size_t num_sources() const { return n_; }
  /// Probability that `copier` copies from `original`.
  double prob(std::size_t copier, std::size_t original) const { return prob_[copier * n_ + original]; }
  void set(std::size_t copier, std::size_t original, double p) { prob_[copier * n_ + original] = p; }
  std::span<const double> values() const { return prob_; }

  /// Indexed like ClaimSet::claims().
  std::vector<double> independence;

 private:
  std::size_t n_ = 0;
  std::vector<double> prob_;
};

/// Known copying relation: (copier, original) -> probability. An entry fixes
/// both directions of its pair; the reverse direction is 0 unless listed.
using KnownCopiers = std::map<std::pair<SourceId, SourceId>, double>;

/// Reads `copier,original,probability` rows.
KnownCopiers load_known_copiers(const std::string& path, char delimiter = ',');

/// Posterior copy probabilities of every ordered pair from the values two
/// sources share on contested items (items with at least two buckets).
/// `selected[item]` is the bucket currently taken as true; `accuracy` holds
/// one accuracy per claim (indexed like ClaimSet::claims()).
CopyMatrix detect_copying(const BucketedClaims& buckets, std::span<const std::size_t> selected,
                          std::span<const double> accuracy, const CopyParams& params);

/// Overrides the pairs listed in `known`. Unknown source ids are ignored.
void apply_known_copiers(CopyMatrix& matrix, const ClaimSet& claims, const KnownCopiers& known);

/// I(s) per claim: product over the other providers of the same bucket of
/// (1 - c * prob(s copies s')). Stores the result in `matrix.independence`.
void independence_weights(CopyMatrix& matrix, const BucketedClaims& buckets, double copy_rate);

struct CopyPair {
  SourceId copier;
  SourceId original;
  double probability;
};

/// Ordered pairs whose copy probability exceeds `min_probability`, ordered
/// by (copier, original).
std::vector<CopyPair> copy_pairs(const CopyMatrix& matrix, const ClaimSet& claims,
                                 double min_probability);

/// Connected components of the pairs whose two directions sum to at least
/// `threshold`. Singletons are dropped.
std::vector<std::vector<SourceId>> copy_groups(const CopyMatrix& matrix, const ClaimSet& claims,
                                               double threshold = 0.5);

struct GroupCommonality {
  double schema_sim = 0.0;
  double object_sim = 0.0;
  double value_sim = 0.0;
  std::optional<double> avg_accuracy;
  std::size_t size = 0;  // members with claims
  std::vector<std::string> warnings;
};

GroupCommonality group_commonality(std::span<const SourceId> group, const ClaimSet& claims,
                                   const GoldStandard& gold, const Tolerances& tolerances);

struct AccuCopyResult {
  FusionResult fusion;
  CopyMatrix copies;
};

/// Copy-aware fusion: AccuFormat votes scaled by the independence weights,
/// re-estimating copying against the current selection every round.
/// `override_matrix`, when given, replaces detection altogether.
AccuCopyResult run_accucopy(const BucketedClaims& buckets, const FusionConfig& config,
                            const CopyParams& params, bool per_attribute = false,
                            const TrustMap* input_trust = nullptr,
                            const KnownCopiers* known = nullptr,
                            const CopyMatrix* override_matrix = nullptr);

void write_copy_pairs(std::span<const CopyPair> pairs, const std::string& path);

}  // namespace truthdisc
