#include "truthdisc/copydetect.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "csv.hpp"
#include "truthdisc/error.hpp"
#include "truthdisc/metrics.hpp"

namespace truthdisc {

namespace {

constexpr double kAccuracyCap = 1e-4;

double log_or_ninf(double x) { return x > 0.0 ? std::log(x) : -std::numeric_limits<double>::infinity(); }

double parse_probability(const std::string& s, const std::string& where) {
  double p = 0.0;
  try {
    std::size_t used = 0;
    p = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw Error(ErrorCode::Parse, where + "bad probability '" + s + "'");
  }
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::Parse, where + "probability outside [0,1]");
  return p;
}

}  // namespace

void CopyParams::validate() const {
  if (!(prior_copy_prob > 0.0 && prior_copy_prob < 0.5))
    throw Error(ErrorCode::InvalidArgument, "copy.prior_copy_prob must lie in (0, 0.5)");
  if (!(copy_rate > 0.0 && copy_rate <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "copy.copy_rate must lie in (0, 1]");
  if (!(n_false >= 1.0)) throw Error(ErrorCode::InvalidArgument, "copy.n_false must be at least 1");
}

KnownCopiers load_known_copiers(const std::string& path, char delimiter) {
  csv::Reader reader(path, delimiter);
  const auto c_copier = reader.require_column("copier");
  const auto c_original = reader.require_column("original");
  const auto c_prob = reader.column("probability");
  KnownCopiers out;
  std::vector<std::string> row;
  while (reader.next(row)) {
    const auto where = path + ":" + std::to_string(reader.line_number()) + ": ";
    if (row.size() <= std::max(c_copier, c_original)) throw Error(ErrorCode::Parse, where + "too few columns");
    if (row[c_copier] == row[c_original]) throw Error(ErrorCode::Parse, where + "a source cannot copy itself");
    const double p = c_prob && *c_prob < row.size() ? parse_probability(row[*c_prob], where) : 1.0;
    if (!out.emplace(std::make_pair(SourceId{row[c_copier]}, SourceId{row[c_original]}), p).second)
      throw Error(ErrorCode::Duplicate, where + "duplicate copier pair");
  }
  return out;
}

CopyMatrix detect_copying(const BucketedClaims& buckets, std::span<const std::size_t> selected,
                          std::span<const double> accuracy, const CopyParams& params) {
  params.validate();
  const auto& claims = buckets.claims();
  const std::size_t n = claims.sources().size();
  if (selected.size() != buckets.items().size())
    throw Error(ErrorCode::InvalidArgument, "selection must cover every item");
  if (accuracy.size() != claims.claims().size())
    throw Error(ErrorCode::InvalidArgument, "accuracy must be given per claim");

  // Log-likelihoods of the pair (a < b) under independence, a copies b, b copies a.
  std::vector<double> l_ind(n * n, 0.0), l_ab(n * n, 0.0), l_ba(n * n, 0.0);
  const double c = params.copy_rate;
  const double nf = params.n_false;
  for (std::size_t d = 0; d < buckets.items().size(); ++d) {
    const auto& item = buckets.item(d);
    if (item.buckets.size() < 2) continue;
    for (std::size_t i = 0; i < item.entries.size(); ++i) {
      const auto& ei = item.entries[i];
      const double a1 = std::clamp(accuracy[ei.claim], kAccuracyCap, 1.0 - kAccuracyCap);
      for (std::size_t j = i + 1; j < item.entries.size(); ++j) {
        const auto& ej = item.entries[j];
        const double a2 = std::clamp(accuracy[ej.claim], kAccuracyCap, 1.0 - kAccuracyCap);
        const bool ij_first = ei.source < ej.source;
        const std::size_t a = ij_first ? ei.source : ej.source;
        const std::size_t b = ij_first ? ej.source : ei.source;
        const double acc_a = ij_first ? a1 : a2;
        const double acc_b = ij_first ? a2 : a1;
        double ind = 0.0, ab = 0.0, ba = 0.0;
        if (ei.bucket == ej.bucket) {
          if (ei.bucket == selected[d]) {
            ind = acc_a * acc_b;
            ab = c * acc_b + (1.0 - c) * ind;
            ba = c * acc_a + (1.0 - c) * ind;
          } else {
            ind = (1.0 - acc_a) * (1.0 - acc_b) / nf;
            ab = c * (1.0 - acc_b) + (1.0 - c) * ind;
            ba = c * (1.0 - acc_a) + (1.0 - c) * ind;
          }
        } else {
          ind = 1.0 - acc_a * acc_b - (1.0 - acc_a) * (1.0 - acc_b) / nf;
          ab = (1.0 - c) * ind;
          ba = ab;
        }
        const auto k = a * n + b;
        l_ind[k] += log_or_ninf(ind);
        l_ab[k] += log_or_ninf(ab);
        l_ba[k] += log_or_ninf(ba);
      }
    }
  }

  CopyMatrix out(n);
  const double log_prior = std::log(params.prior_copy_prob);
  const double log_indep = std::log(1.0 - 2.0 * params.prior_copy_prob);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const auto k = a * n + b;
      const double x_ind = log_indep + l_ind[k];
      const double x_ab = log_prior + l_ab[k];
      const double x_ba = log_prior + l_ba[k];
      const double top = std::max({x_ind, x_ab, x_ba});
      const double e_ind = std::exp(x_ind - top);
      const double e_ab = std::exp(x_ab - top);
      const double e_ba = std::exp(x_ba - top);
      const double total = e_ind + e_ab + e_ba;
      out.set(a, b, e_ab / total);
      out.set(b, a, e_ba / total);
    }
  }
  return out;
}

void apply_known_copiers(CopyMatrix& matrix, const ClaimSet& claims, const KnownCopiers& known) {
  for (const auto& [pair, p] : known) {
    const auto a = claims.find_source(pair.first);
    const auto b = claims.find_source(pair.second);
    if (!a || !b) continue;
    matrix.set(*a, *b, p);
    if (!known.count({pair.second, pair.first})) matrix.set(*b, *a, 0.0);
  }
}

void independence_weights(CopyMatrix& matrix, const BucketedClaims& buckets, double copy_rate) {
  const auto& claims = buckets.claims();
  matrix.independence.assign(claims.claims().size(), 1.0);
  for (std::size_t d = 0; d < buckets.items().size(); ++d) {
    const auto& entries = buckets.item(d).entries;
    for (const auto& e : entries) {
      double w = 1.0;
      for (const auto& other : entries) {
        if (other.source == e.source || other.bucket != e.bucket) continue;
        w *= 1.0 - copy_rate * matrix.prob(e.source, other.source);
      }
      matrix.independence[e.claim] = std::clamp(w, 0.0, 1.0);
    }
  }
}

std::vector<CopyPair> copy_pairs(const CopyMatrix& matrix, const ClaimSet& claims, double min_probability) {
  std::vector<CopyPair> out;
  for (std::size_t a = 0; a < matrix.num_sources(); ++a)
    for (std::size_t b = 0; b < matrix.num_sources(); ++b)
      if (a != b && matrix.prob(a, b) > min_probability)
        out.push_back({claims.sources()[a], claims.sources()[b], matrix.prob(a, b)});
  return out;
}

std::vector<std::vector<SourceId>> copy_groups(const CopyMatrix& matrix, const ClaimSet& claims,
                                               double threshold) {
  const std::size_t n = matrix.num_sources();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      if (matrix.prob(a, b) + matrix.prob(b, a) >= threshold) parent[std::max(find(a), find(b))] = std::min(find(a), find(b));
  std::map<std::size_t, std::vector<SourceId>> groups;
  for (std::size_t s = 0; s < n; ++s) groups[find(s)].push_back(claims.sources()[s]);
  std::vector<std::vector<SourceId>> out;
  for (auto& [root, members] : groups)
    if (members.size() > 1) out.push_back(std::move(members));
  return out;
}

GroupCommonality group_commonality(std::span<const SourceId> group, const ClaimSet& claims,
                                   const GoldStandard& gold, const Tolerances& tolerances) {
  if (group.size() < 2) throw Error(ErrorCode::InvalidArgument, "a group needs at least two sources");
  struct Member {
    std::size_t index;
    std::set<std::size_t> attributes;
    std::set<std::string> objects;
    std::map<std::size_t, std::size_t> claim_of_item;
  };
  GroupCommonality out;
  std::vector<Member> members;
  for (const auto& id : group) {
    const auto s = claims.find_source(id);
    if (!s || claims.source_claims(*s).empty()) {
      out.warnings.push_back("source " + id.value + " has no claims; excluded from the group");
      continue;
    }
    Member m{*s, {}, {}, {}};
    for (auto idx : claims.source_claims(*s)) {
      const auto& c = claims.claims()[idx];
      const auto& key = claims.items()[c.item];
      m.attributes.insert(key.attribute);
      m.objects.insert(key.object);
      m.claim_of_item.emplace(c.item, idx);
    }
    members.push_back(std::move(m));
  }
  out.size = members.size();
  if (members.size() < 2) return out;

  auto jaccard = [](const auto& x, const auto& y) {
    std::size_t common = 0;
    for (const auto& e : x) common += y.count(e);
    const std::size_t uni = x.size() + y.size() - common;
    return uni ? static_cast<double>(common) / static_cast<double>(uni) : 0.0;
  };

  double schema = 0.0, object = 0.0, value = 0.0;
  std::size_t pairs = 0, value_pairs = 0;
  for (std::size_t i = 0; i < members.size(); ++i) {
    for (std::size_t j = i + 1; j < members.size(); ++j) {
      const auto& x = members[i];
      const auto& y = members[j];
      schema += jaccard(x.attributes, y.attributes);
      object += jaccard(x.objects, y.objects);
      ++pairs;
      std::size_t shared = 0, same = 0;
      for (const auto& [item, cx] : x.claim_of_item) {
        const auto it = y.claim_of_item.find(item);
        if (it == y.claim_of_item.end()) continue;
        ++shared;
        const auto attr = claims.items()[item].attribute;
        if (values_match(claims.claims()[cx].value, claims.claims()[it->second].value, claims.schema().at(attr),
                         tolerances.of(attr)))
          ++same;
      }
      if (shared) {
        value += static_cast<double>(same) / static_cast<double>(shared);
        ++value_pairs;
      }
    }
  }
  out.schema_sim = schema / static_cast<double>(pairs);
  out.object_sim = object / static_cast<double>(pairs);
  out.value_sim = value_pairs ? value / static_cast<double>(value_pairs) : 0.0;

  double acc = 0.0;
  std::size_t defined = 0;
  for (const auto& m : members) {
    if (const auto a = source_accuracy(claims, m.index, gold, tolerances)) {
      acc += *a;
      ++defined;
    }
  }
  if (defined) out.avg_accuracy = acc / static_cast<double>(defined);
  return out;
}

AccuCopyResult run_accucopy(const BucketedClaims& buckets, const FusionConfig& config, const CopyParams& params,
                            bool per_attribute, const TrustMap* input_trust, const KnownCopiers* known,
                            const CopyMatrix* override_matrix) {
  params.validate();
  const auto& claims = buckets.claims();
  if (claims.claims().empty()) throw Error(ErrorCode::InvalidArgument, "empty ClaimSet");
  const auto start = std::chrono::steady_clock::now();
  const MethodSpec method{Method::AccuCopy, per_attribute};
  const FusionGraph graph(buckets, graph_options(method, config));
  FusionState st = initial_state(method, graph, config);
  if (input_trust) st.trust = trust_for_slots(graph, *input_trust);

  // Graph claim index -> ClaimSet claim index.
  std::vector<std::size_t> claim_of(graph.claims().size());
  for (std::size_t d = 0; d < graph.num_items(); ++d) {
    const auto& entries = buckets.item(d).entries;
    for (std::size_t i = 0; i < entries.size(); ++i) claim_of[graph.item_claim_begin(d) + i] = entries[i].claim;
  }

  const BayesOptions opts{BayesVariant::AccuPr, true, true};
  const std::size_t n = claims.sources().size();
  CopyMatrix copies(n);
  if (override_matrix) {
    copies = *override_matrix;
  } else if (known) {
    apply_known_copiers(copies, claims, *known);
  }
  independence_weights(copies, buckets, params.copy_rate);
  std::vector<double> weights(graph.claims().size(), 1.0);
  auto refresh_weights = [&] {
    for (std::size_t g = 0; g < weights.size(); ++g) weights[g] = copies.independence[claim_of[g]];
  };
  refresh_weights();

  AccuCopyResult out;
  auto& r = out.fusion;
  r.method = method;
  r.converged = false;
  std::vector<double> accuracy(claims.claims().size());
  std::vector<std::size_t> selected_bucket(graph.num_items());
  const std::size_t rounds = input_trust ? 1 : config.max_rounds;
  for (std::size_t k = 1; k <= rounds; ++k) {
    bayes_vote(st, graph, config, opts, weights);
    std::size_t ignored = 0;
    const auto sel = select_values(graph, st.votes, st.posterior, &ignored);
    for (std::size_t d = 0; d < sel.size(); ++d) selected_bucket[d] = sel[d].value - graph.value_begin(d);

    const CopyMatrix previous = copies;
    if (!override_matrix) {
      for (std::size_t g = 0; g < weights.size(); ++g) accuracy[claim_of[g]] = st.trust[graph.claims()[g].slot];
      copies = detect_copying(buckets, selected_bucket, accuracy, params);
      if (known) apply_known_copiers(copies, claims, *known);
      independence_weights(copies, buckets, params.copy_rate);
      refresh_weights();
    }
    bayes_vote(st, graph, config, opts, weights);
    r.rounds_used = k;
    if (input_trust) {
      r.converged = true;
      break;
    }

    const auto before = st.trust;
    bayes_trust(st, graph, config, BayesVariant::AccuPr);
    ++st.round;
    double delta = 0.0;
    for (std::size_t s = 0; s < before.size(); ++s) delta = std::max(delta, std::abs(st.trust[s] - before[s]));
    for (std::size_t i = 0; i < previous.values().size(); ++i)
      delta = std::max(delta, std::abs(copies.values()[i] - previous.values()[i]));
    r.round_deltas.push_back(delta);
    if (delta < config.epsilon) {
      r.converged = true;
      break;
    }
  }
  r.selections = select_values(graph, st.votes, st.posterior, &r.ties);
  r.trust = trust_from_slots(graph, st.trust);
  r.wall_time = std::chrono::steady_clock::now() - start;
  out.copies = std::move(copies);
  return out;
}

void write_copy_pairs(std::span<const CopyPair> pairs, const std::string& path) {
  csv::Writer out(path);
  out.row({"copier", "original", "probability"});
  for (const auto& p : pairs) out.row({p.copier.value, p.original.value, fmt::format("{}", p.probability)});
}

}  // namespace truthdisc
