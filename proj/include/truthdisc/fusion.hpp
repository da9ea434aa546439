#pragma once

#include <chrono>
#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "truthdisc/model.hpp"
#include "truthdisc/normalize.hpp"

namespace truthdisc {

enum class Method {
  Vote,
  Hub,
  AvgLog,
  Invest,
  PooledInvest,
  Cosine,
  TwoEstimates,
  ThreeEstimates,
  TruthFinder,
  AccuPr,
  PopAccu,
  AccuSim,
  AccuFormat,
  AccuCopy,
};

struct MethodSpec {
  Method method = Method::Vote;
  /// Separate trust per (source, attribute): the "Attr" variants.
  bool per_attribute = false;

  auto operator<=>(const MethodSpec&) const = default;
};

/// "AccuFormatAttr", "2-Estimates", ... Case-insensitive. Throws
/// Error(UnknownMethod) listing the valid names.
MethodSpec parse_method(std::string_view name);
std::string method_name(const MethodSpec& spec);
/// Every base method name, in table order.
std::vector<std::string> method_names();
bool is_iterative(Method method);

/// Method constants. Defaults reproduce the documented constants ledger.
struct FusionConfig {
  double epsilon = 1e-6;
  std::size_t max_rounds = 100;
  /// Trust is kept inside [eps_cap, 1 - eps_cap] wherever a logarithm or an
  /// odds ratio of it is taken.
  double eps_cap = 1e-4;
  /// Number of false values per item assumed by AccuPr (and copy detection).
  double n_false = 10.0;
  SimilarityParams similarity;
  double format_weight = 0.5;
  double invest_exponent = 1.2;
  double pooled_exponent = 1.4;
  double cosine_damping = 0.8;
  double cosine_power = 3.0;
  double truthfinder_gamma = 0.3;
  double init_vote_hub = 0.5;
  double init_trust_cosine = 1.0;
  double init_trust_estimates = 1.0;
  double init_value_trust = 0.9;
  double init_trust_bayes = 0.8;
  /// Attributes with fewer claims by a source share that source's pooled
  /// trust in per-attribute mode.
  std::size_t min_attribute_observations = 5;
};

/// Trust is per source, or per (source, attribute) for the Attr variants.
struct TrustKey {
  SourceId source;
  std::optional<std::string> attribute;

  auto operator<=>(const TrustKey&) const = default;
};

using TrustMap = std::map<TrustKey, double>;

/// Reads `source,trust` rows (an optional `attribute` column selects
/// per-attribute entries).
TrustMap load_trust(const std::string& path, char delimiter = ',');
void write_trust(const TrustMap& trust, const std::string& path);

/// Claim graph shared by all rounds of one run: values are the buckets of
/// every item flattened into one index space, and each claim votes through
/// one trust slot.
class FusionGraph {
 public:
  struct Options {
    bool per_attribute = false;
    std::size_t min_attribute_observations = 5;
    /// Precompute pairwise bucket similarities.
    std::optional<SimilarityParams> similarity;
    /// Precompute formatting (subsumption) links.
    bool formatting = false;
  };

  struct ClaimRef {
    std::size_t item;
    std::size_t value;
    std::size_t slot;
    std::size_t source;
  };

  /// A claim whose value subsumes a finer bucket of the same item.
  struct FormatLink {
    std::size_t claim;
    std::size_t value;
  };

  FusionGraph(const BucketedClaims& buckets, const Options& options);

  const BucketedClaims& buckets() const { return *buckets_; }
  std::size_t num_items() const { return item_values_.size() - 1; }
  std::size_t num_values() const { return value_item_.size(); }
  std::size_t num_slots() const { return slot_keys_.size(); }

  std::span<const ClaimRef> claims() const { return claims_; }
  std::span<const ClaimRef> item_claims(std::size_t item) const {
    return std::span<const ClaimRef>(claims_).subspan(item_claims_[item],
                                                      item_claims_[item + 1] - item_claims_[item]);
  }
  std::size_t item_claim_begin(std::size_t item) const { return item_claims_[item]; }
  std::size_t value_begin(std::size_t item) const { return item_values_[item]; }
  std::size_t value_end(std::size_t item) const { return item_values_[item + 1]; }
  std::size_t item_of_value(std::size_t value) const { return value_item_[value]; }
  std::size_t value_support(std::size_t value) const { return value_support_[value]; }
  const Value& value(std::size_t value) const;

  /// Claim indices voting through the slot.
  std::span<const std::size_t> slot_claims(std::size_t slot) const { return slot_claims_[slot]; }
  const TrustKey& slot_key(std::size_t slot) const { return slot_keys_[slot]; }

  /// Row-major similarity matrix of one item's buckets (empty unless
  /// requested in Options).
  std::span<const double> similarity_matrix(std::size_t item) const;
  std::span<const FormatLink> format_links(std::size_t item) const;

 private:
  const BucketedClaims* buckets_;
  std::vector<ClaimRef> claims_;
  std::vector<std::size_t> item_claims_;
  std::vector<std::size_t> item_values_;
  std::vector<std::size_t> value_item_;
  std::vector<std::size_t> value_bucket_;
  std::vector<std::size_t> value_support_;
  std::vector<std::vector<std::size_t>> slot_claims_;
  std::vector<TrustKey> slot_keys_;
  std::vector<std::size_t> sim_offsets_;
  std::vector<double> sim_;
  std::vector<std::size_t> link_offsets_;
  std::vector<FormatLink> links_;
};

FusionGraph::Options graph_options(const MethodSpec& method, const FusionConfig& config);

struct FusionState {
  std::size_t round = 0;
  std::vector<double> trust;        // per slot: T(s)
  std::vector<double> votes;        // per value: C(v)
  std::vector<double> value_trust;  // per value, 3-Estimates only: T(v)
  std::vector<double> posterior;    // per value, Accu family
};

FusionState initial_state(const MethodSpec& method, const FusionGraph& graph,
                          const FusionConfig& config);

/// HUB: T(s) = sum of votes of its values; C(v) = sum of trust of its
/// providers; both divided by their maxima.
void round_hub(FusionState& state, const FusionGraph& graph);
/// AvgLog: HUB with T(s) = avg C(v) * ln(1 + |V_s|).
void round_avglog(FusionState& state, const FusionGraph& graph);
void round_invest(FusionState& state, const FusionGraph& graph, const FusionConfig& config);
void round_pooledinvest(FusionState& state, const FusionGraph& graph, const FusionConfig& config);
void round_cosine(FusionState& state, const FusionGraph& graph, const FusionConfig& config);
/// 2-Estimates (order 2) and 3-Estimates (order 3).
void round_estimates(FusionState& state, const FusionGraph& graph, const FusionConfig& config,
                     int order);

enum class BayesVariant { TruthFinder, AccuPr, PopAccu };

struct BayesOptions {
  BayesVariant variant = BayesVariant::AccuPr;
  bool similarity = false;
  bool formatting = false;
};

/// Vote pass of the Bayesian methods: fills `votes` (after formatting credit
/// and similarity boost) and, for the Accu variants, the per-item posterior.
/// `claim_weights`, when given, scales each claim's contribution
/// (independence weights for copy-aware fusion).
void bayes_vote(FusionState& state, const FusionGraph& graph, const FusionConfig& config,
                const BayesOptions& options, std::span<const double> claim_weights = {});
/// Trust pass of the Bayesian methods from the last bayes_vote.
void bayes_trust(FusionState& state, const FusionGraph& graph, const FusionConfig& config,
                 BayesVariant variant);

/// Posterior of one item's values under AccuPr given the vote counts.
std::vector<double> accupr_posterior(std::span<const double> votes, double n_false);

/// C'(v) = C(v) + rho * sum_{v' != v} sim(v, v') C(v').
std::vector<double> similarity_boost(std::span<const double> votes, std::span<const Value> values,
                                     const AttributeSpec& attribute, double tau,
                                     const SimilarityParams& params);

/// Adds `weight * contribution[claim]` to every finer value a claim's value
/// subsumes.
void format_credit(std::span<double> votes, std::span<const FusionGraph::FormatLink> links,
                   std::span<const double> claim_contribution, double weight);

struct Selection {
  std::size_t item;
  std::size_t value;  // index into the graph's values
  Value selected;
  double vote = 0.0;
  double confidence = 0.0;
};

/// Argmax vote per item; ties go to the smallest value and are counted.
std::vector<Selection> select_values(const FusionGraph& graph, std::span<const double> score,
                                     std::span<const double> confidence, std::size_t* ties);

struct FusionResult {
  MethodSpec method;
  std::vector<Selection> selections;  // one per item, ClaimSet item order
  TrustMap trust;
  std::size_t rounds_used = 0;
  bool converged = true;
  std::vector<double> round_deltas;  // max |T^k - T^(k-1)| per round
  std::size_t ties = 0;
  std::chrono::nanoseconds wall_time{0};
};

/// Runs a fusion method to convergence (or the round cap). With
/// `input_trust`, trust is held fixed and a single vote pass is made.
/// AccuCopy is served by run_accucopy.
FusionResult run_fusion(const MethodSpec& method, const BucketedClaims& buckets,
                        const FusionConfig& config, const TrustMap* input_trust = nullptr);

/// Trust a method would assign each source if the gold standard were the
/// selected truth. Slots without gold coverage get the mean of the others.
TrustMap sample_trust(const MethodSpec& method, const BucketedClaims& buckets,
                      const GoldStandard& gold, const FusionConfig& config);

/// Trust map to per-slot values of a graph. Missing per-attribute keys fall
/// back to the source's global key.
std::vector<double> trust_for_slots(const FusionGraph& graph, const TrustMap& trust);
TrustMap trust_from_slots(const FusionGraph& graph, std::span<const double> trust);

void write_selection(const FusionResult& result, const BucketedClaims& buckets,
                     const std::string& path);
void write_convergence_log(const FusionResult& result, const std::string& path);

}  // namespace truthdisc
