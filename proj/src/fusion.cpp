#include "truthdisc/fusion.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "csv.hpp"
#include "truthdisc/error.hpp"
#include "truthdisc/metrics.hpp"

namespace truthdisc {

namespace {

struct MethodInfo {
  Method method;
  std::string_view name;
  std::string_view alias;
};

constexpr std::array<MethodInfo, 14> kMethods{{
    {Method::Vote, "Vote", "Vote"},
    {Method::Hub, "HUB", "Hub"},
    {Method::AvgLog, "AvgLog", "AvgLog"},
    {Method::Invest, "Invest", "Invest"},
    {Method::PooledInvest, "PooledInvest", "PooledInvest"},
    {Method::Cosine, "Cosine", "Cosine"},
    {Method::TwoEstimates, "2-Estimates", "TwoEstimates"},
    {Method::ThreeEstimates, "3-Estimates", "ThreeEstimates"},
    {Method::TruthFinder, "TruthFinder", "TruthFinder"},
    {Method::AccuPr, "AccuPr", "AccuPr"},
    {Method::PopAccu, "PopAccu", "PopAccu"},
    {Method::AccuSim, "AccuSim", "AccuSim"},
    {Method::AccuFormat, "AccuFormat", "AccuFormat"},
    {Method::AccuCopy, "AccuCopy", "AccuCopy"},
}};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

double clamp_trust(double t, double eps) { return std::clamp(t, eps, 1.0 - eps); }

void normalize_by_max(std::vector<double>& xs) {
  if (xs.empty()) return;
  const double m = *std::max_element(xs.begin(), xs.end());
  if (m > 0.0)
    for (auto& x : xs) x /= m;
}

// Affine rescale to [0, 1]; an all-equal family passes through unchanged.
void rescale_unit(std::vector<double>& xs) {
  if (xs.empty()) return;
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  const double min = *lo;
  const double span = *hi - *lo;
  if (!(span > 0.0)) return;
  for (auto& x : xs) x = (x - min) / span;
}

double signed_pow(double x, double p) { return std::copysign(std::pow(std::abs(x), p), x); }

std::size_t item_width(const FusionGraph& g, std::size_t d) { return g.value_end(d) - g.value_begin(d); }

// --- HUB family -------------------------------------------------------------

void hub_votes(FusionState& st, const FusionGraph& g) {
  st.votes.assign(g.num_values(), 0.0);
  for (const auto& c : g.claims()) st.votes[c.value] += st.trust[c.slot];
  normalize_by_max(st.votes);
}

void hub_trust(FusionState& st, const FusionGraph& g, bool avglog) {
  std::vector<double> t(g.num_slots(), 0.0);
  for (std::size_t s = 0; s < g.num_slots(); ++s) {
    const auto members = g.slot_claims(s);
    for (auto ci : members) t[s] += st.votes[g.claims()[ci].value];
    if (avglog && !members.empty()) {
      const double n = static_cast<double>(members.size());
      t[s] = t[s] / n * std::log1p(n);
    }
  }
  normalize_by_max(t);
  st.trust = std::move(t);
}

// --- Invest family ----------------------------------------------------------

std::vector<double> invest_trust(const FusionState& st, const FusionGraph& g) {
  const auto claims = g.claims();
  std::vector<double> invested(claims.size());
  std::vector<double> pool(g.num_values(), 0.0);
  for (std::size_t i = 0; i < claims.size(); ++i) {
    const auto n = static_cast<double>(g.slot_claims(claims[i].slot).size());
    invested[i] = st.trust[claims[i].slot] / n;
    pool[claims[i].value] += invested[i];
  }
  std::vector<double> t(g.num_slots(), 0.0);
  for (std::size_t s = 0; s < g.num_slots(); ++s) {
    for (auto ci : g.slot_claims(s)) {
      const auto v = claims[ci].value;
      if (pool[v] > 0.0) t[s] += st.votes[v] * invested[ci] / pool[v];
    }
  }
  return t;
}

std::vector<double> invested_votes(const FusionState& st, const FusionGraph& g) {
  std::vector<double> c0(g.num_values(), 0.0);
  for (const auto& c : g.claims())
    c0[c.value] += st.trust[c.slot] / static_cast<double>(g.slot_claims(c.slot).size());
  return c0;
}

void invest_votes(FusionState& st, const FusionGraph& g, const FusionConfig& cfg) {
  auto c0 = invested_votes(st, g);
  for (auto& c : c0) c = std::pow(c, cfg.invest_exponent);
  normalize_by_max(c0);
  st.votes = std::move(c0);
}

void pooled_votes(FusionState& st, const FusionGraph& g, const FusionConfig& cfg) {
  const auto c0 = invested_votes(st, g);
  st.votes.assign(g.num_values(), 0.0);
  for (std::size_t d = 0; d < g.num_items(); ++d) {
    double invested = 0.0;
    double powered = 0.0;
    for (auto v = g.value_begin(d); v < g.value_end(d); ++v) {
      invested += c0[v];
      powered += std::pow(c0[v], cfg.pooled_exponent);
    }
    if (!(powered > 0.0)) continue;
    for (auto v = g.value_begin(d); v < g.value_end(d); ++v)
      st.votes[v] = std::pow(c0[v], cfg.pooled_exponent) / powered * invested;
  }
}

// --- Cosine -----------------------------------------------------------------

void cosine_votes(FusionState& st, const FusionGraph& g, const FusionConfig& cfg) {
  st.votes.assign(g.num_values(), 0.0);
  for (std::size_t d = 0; d < g.num_items(); ++d) {
    double total = 0.0;
    double signed_total = 0.0;
    for (const auto& c : g.item_claims(d)) {
      const double w = signed_pow(st.trust[c.slot], cfg.cosine_power);
      total += std::abs(w);
      signed_total += w;
      st.votes[c.value] += w;
    }
    for (auto v = g.value_begin(d); v < g.value_end(d); ++v) {
      // supporters minus dissenters = 2 * supporters - everyone
      st.votes[v] = total > 0.0 ? (2.0 * st.votes[v] - signed_total) / total : 0.0;
    }
  }
}

// Cosine between a slot's +1/-1 claim vector and the given value vector.
std::vector<double> cosine_against(const FusionGraph& g, std::span<const double> target,
                                   const std::vector<bool>* item_filter) {
  std::vector<double> sum(g.num_items(), 0.0);
  std::vector<double> sq(g.num_items(), 0.0);
  for (std::size_t d = 0; d < g.num_items(); ++d) {
    for (auto v = g.value_begin(d); v < g.value_end(d); ++v) {
      sum[d] += target[v];
      sq[d] += target[v] * target[v];
    }
  }
  std::vector<double> out(g.num_slots(), 0.0);
  for (std::size_t s = 0; s < g.num_slots(); ++s) {
    double dot = 0.0;
    double width = 0.0;
    double norm = 0.0;
    for (auto ci : g.slot_claims(s)) {
      const auto& c = g.claims()[ci];
      if (item_filter && !(*item_filter)[c.item]) continue;
      dot += target[c.value] - (sum[c.item] - target[c.value]);
      width += static_cast<double>(item_width(g, c.item));
      norm += sq[c.item];
    }
    out[s] = width > 0.0 && norm > 0.0 ? dot / std::sqrt(width * norm) : 0.0;
  }
  return out;
}

void cosine_trust(FusionState& st, const FusionGraph& g, const FusionConfig& cfg) {
  const auto cos = cosine_against(g, st.votes, nullptr);
  for (std::size_t s = 0; s < g.num_slots(); ++s)
    st.trust[s] = cfg.cosine_damping * st.trust[s] + (1.0 - cfg.cosine_damping) * cos[s];
}

// --- 2-/3-Estimates -----------------------------------------------------------

void estimates_votes(FusionState& st, const FusionGraph& g, int order) {
  st.votes.assign(g.num_values(), 0.0);
  for (std::size_t d = 0; d < g.num_items(); ++d) {
    const auto claims = g.item_claims(d);
    const double providers = static_cast<double>(claims.size());
    for (auto v = g.value_begin(d); v < g.value_end(d); ++v) {
      double sum = 0.0;
      for (const auto& c : claims) {
        const double t = order == 3 ? st.trust[c.slot] * st.value_trust[v] : st.trust[c.slot];
        sum += c.value == v ? t : 1.0 - t;
      }
      st.votes[v] = sum / providers;
    }
  }
  rescale_unit(st.votes);
}

void estimates_value_trust(FusionState& st, const FusionGraph& g, const FusionConfig& cfg) {
  std::vector<double> tv(g.num_values(), 0.0);
  for (std::size_t d = 0; d < g.num_items(); ++d) {
    const auto claims = g.item_claims(d);
    for (auto v = g.value_begin(d); v < g.value_end(d); ++v) {
      double sum = 0.0;
      for (const auto& c : claims) {
        const double err = 1.0 - clamp_trust(st.trust[c.slot], cfg.eps_cap);
        sum += (c.value == v ? st.votes[v] : 1.0 - st.votes[v]) / err;
      }
      tv[v] = sum / static_cast<double>(claims.size());
    }
  }
  rescale_unit(tv);
  st.value_trust = std::move(tv);
}

void estimates_trust(FusionState& st, const FusionGraph& g, const FusionConfig& cfg, int order) {
  std::vector<double> t(g.num_slots(), 0.0);
  for (std::size_t s = 0; s < g.num_slots(); ++s) {
    double sum = 0.0;
    double width = 0.0;
    for (auto ci : g.slot_claims(s)) {
      const auto& c = g.claims()[ci];
      for (auto v = g.value_begin(c.item); v < g.value_end(c.item); ++v) {
        const double vote = v == c.value ? st.votes[v] : 1.0 - st.votes[v];
        sum += order == 3 ? vote / (1.0 - clamp_trust(st.value_trust[v], cfg.eps_cap)) : vote;
      }
      width += static_cast<double>(item_width(g, c.item));
    }
    t[s] = width > 0.0 ? sum / width : 0.0;
  }
  rescale_unit(t);
  st.trust = std::move(t);
}

// --- Bayesian -----------------------------------------------------------------

BayesOptions bayes_options(Method m) {
  switch (m) {
    case Method::TruthFinder: return {BayesVariant::TruthFinder, true, false};
    case Method::AccuPr: return {BayesVariant::AccuPr, false, false};
    case Method::PopAccu: return {BayesVariant::PopAccu, false, false};
    case Method::AccuSim: return {BayesVariant::AccuPr, true, false};
    case Method::AccuFormat:
    case Method::AccuCopy: return {BayesVariant::AccuPr, true, true};
    default: throw Error(ErrorCode::InvalidArgument, "not a Bayesian method");
  }
}

bool votes_initialized(Method m) {
  return m == Method::Hub || m == Method::AvgLog || m == Method::Invest || m == Method::PooledInvest ||
         m == Method::Cosine;
}

bool is_bayesian(Method m) {
  return m == Method::TruthFinder || m == Method::AccuPr || m == Method::PopAccu ||
         m == Method::AccuSim || m == Method::AccuFormat || m == Method::AccuCopy;
}

void boost_in_place(std::span<double> votes, std::span<const double> sim, double rho) {
  const std::size_t k = votes.size();
  std::vector<double> base(votes.begin(), votes.end());
  for (std::size_t i = 0; i < k; ++i) {
    double extra = 0.0;
    for (std::size_t j = 0; j < k; ++j)
      if (j != i) extra += sim[i * k + j] * base[j];
    votes[i] = base[i] + rho * extra;
  }
}

// One vote pass with trust held fixed.
void vote_pass(const MethodSpec& m, FusionState& st, const FusionGraph& g, const FusionConfig& cfg) {
  switch (m.method) {
    case Method::Hub:
    case Method::AvgLog: hub_votes(st, g); break;
    case Method::Invest: invest_votes(st, g, cfg); break;
    case Method::PooledInvest: pooled_votes(st, g, cfg); break;
    case Method::Cosine: cosine_votes(st, g, cfg); break;
    case Method::TwoEstimates: estimates_votes(st, g, 2); break;
    case Method::ThreeEstimates: estimates_votes(st, g, 3); break;
    default: bayes_vote(st, g, cfg, bayes_options(m.method)); break;
  }
}

void step(const MethodSpec& m, FusionState& st, const FusionGraph& g, const FusionConfig& cfg) {
  switch (m.method) {
    case Method::Hub: round_hub(st, g); break;
    case Method::AvgLog: round_avglog(st, g); break;
    case Method::Invest: round_invest(st, g, cfg); break;
    case Method::PooledInvest: round_pooledinvest(st, g, cfg); break;
    case Method::Cosine: round_cosine(st, g, cfg); break;
    case Method::TwoEstimates: round_estimates(st, g, cfg, 2); break;
    case Method::ThreeEstimates: round_estimates(st, g, cfg, 3); break;
    default: {
      const auto opts = bayes_options(m.method);
      bayes_vote(st, g, cfg, opts);
      bayes_trust(st, g, cfg, opts.variant);
      ++st.round;
      break;
    }
  }
}

std::vector<double> confidences(const MethodSpec& m, const FusionState& st, const FusionGraph& g,
                                const FusionConfig& cfg) {
  if (m.method != Method::TruthFinder && is_bayesian(m.method)) return st.posterior;
  std::vector<double> out(g.num_values(), 0.0);
  if (m.method == Method::TruthFinder) {
    for (std::size_t v = 0; v < out.size(); ++v)
      out[v] = 1.0 - std::exp(-cfg.truthfinder_gamma * st.votes[v]);
    return out;
  }
  for (std::size_t d = 0; d < g.num_items(); ++d) {
    double mass = 0.0;
    for (auto v = g.value_begin(d); v < g.value_end(d); ++v) mass += std::max(0.0, st.votes[v]);
    for (auto v = g.value_begin(d); v < g.value_end(d); ++v)
      out[v] = mass > 0.0 ? std::max(0.0, st.votes[v]) / mass
                          : 1.0 / static_cast<double>(item_width(g, d));
  }
  return out;
}

FusionResult vote_result(const BucketedClaims& buckets) {
  FusionResult r;
  r.method = {Method::Vote, false};
  const auto& claims = buckets.claims();
  std::size_t first_value = 0;
  for (std::size_t d = 0; d < claims.items().size(); ++d) {
    const auto& bs = buckets.item(d).buckets;
    const auto dom = dominant(bs);
    for (std::size_t b = 0; b < bs.size(); ++b)
      if (b != dom.bucket && bs[b].provider_count == bs[dom.bucket].provider_count) {
        ++r.ties;
        break;
      }
    r.selections.push_back({d, first_value + dom.bucket, dom.value,
                            static_cast<double>(bs[dom.bucket].provider_count), dom.factor});
    first_value += bs.size();
  }
  return r;
}

std::string fmt_real(double x) { return fmt::format("{}", x); }

}  // namespace

// --- method names ---------------------------------------------------------------

MethodSpec parse_method(std::string_view name) {
  std::string n = lower(name);
  bool per_attribute = false;
  if (n.size() > 4 && n.compare(n.size() - 4, 4, "attr") == 0) {
    per_attribute = true;
    n.resize(n.size() - 4);
  }
  for (const auto& info : kMethods) {
    if (n == lower(info.name) || n == lower(info.alias)) return {info.method, per_attribute};
  }
  std::string valid;
  for (const auto& info : kMethods) valid += (valid.empty() ? "" : ", ") + std::string(info.name);
  throw Error(ErrorCode::UnknownMethod,
              "unknown method '" + std::string(name) + "'; valid methods: " + valid +
                  " (append 'Attr' for per-attribute trust)");
}

std::string method_name(const MethodSpec& spec) {
  for (const auto& info : kMethods) {
    if (info.method == spec.method) return std::string(info.name) + (spec.per_attribute ? "Attr" : "");
  }
  return "?";
}

std::vector<std::string> method_names() {
  std::vector<std::string> out;
  for (const auto& info : kMethods) out.emplace_back(info.name);
  return out;
}

bool is_iterative(Method method) { return method != Method::Vote; }

// --- trust files ----------------------------------------------------------------

TrustMap load_trust(const std::string& path, char delimiter) {
  csv::Reader reader(path, delimiter);
  const auto c_source = reader.require_column("source");
  const auto c_trust = reader.require_column("trust");
  const auto c_attr = reader.column("attribute");
  TrustMap out;
  std::vector<std::string> row;
  while (reader.next(row)) {
    const auto where = path + ":" + std::to_string(reader.line_number()) + ": ";
    if (row.size() <= std::max(c_source, c_trust)) throw Error(ErrorCode::Parse, where + "too few columns");
    TrustKey key{SourceId{row[c_source]}, std::nullopt};
    if (c_attr && *c_attr < row.size() && !row[*c_attr].empty() && row[*c_attr] != "*")
      key.attribute = row[*c_attr];
    double t = 0.0;
    try {
      std::size_t used = 0;
      t = std::stod(row[c_trust], &used);
      if (used != row[c_trust].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(ErrorCode::Parse, where + "bad trust '" + row[c_trust] + "'");
    }
    if (!std::isfinite(t)) throw Error(ErrorCode::Parse, where + "trust must be finite");
    if (!out.emplace(key, t).second) throw Error(ErrorCode::Duplicate, where + "duplicate trust row");
  }
  return out;
}

void write_trust(const TrustMap& trust, const std::string& path) {
  csv::Writer out(path);
  out.row({"source", "attribute", "trust"});
  for (const auto& [key, t] : trust) out.row({key.source.value, key.attribute.value_or("*"), fmt_real(t)});
}

// --- graph ------------------------------------------------------------------------

FusionGraph::FusionGraph(const BucketedClaims& buckets, const Options& options) : buckets_(&buckets) {
  const auto& claims = buckets.claims();
  const auto& schema = claims.schema();
  const std::size_t num_sources = claims.sources().size();
  const std::size_t num_attrs = schema.size();

  // Trust slots.
  std::vector<std::size_t> attr_slot(num_sources * num_attrs, 0);
  if (!options.per_attribute) {
    for (std::size_t s = 0; s < num_sources; ++s) {
      slot_keys_.push_back({claims.sources()[s], std::nullopt});
      for (std::size_t a = 0; a < num_attrs; ++a) attr_slot[s * num_attrs + a] = s;
    }
  } else {
    std::vector<std::size_t> count(num_sources * num_attrs, 0);
    for (const auto& c : claims.claims()) ++count[c.source * num_attrs + claims.items()[c.item].attribute];
    for (std::size_t s = 0; s < num_sources; ++s) {
      bool sparse = false;
      for (std::size_t a = 0; a < num_attrs; ++a) {
        const auto n = count[s * num_attrs + a];
        if (n == 0) continue;
        if (n >= options.min_attribute_observations) {
          attr_slot[s * num_attrs + a] = slot_keys_.size();
          slot_keys_.push_back({claims.sources()[s], schema.at(a).name});
        } else {
          sparse = true;
        }
      }
      if (sparse) {
        const auto pooled = slot_keys_.size();
        slot_keys_.push_back({claims.sources()[s], std::nullopt});
        for (std::size_t a = 0; a < num_attrs; ++a) {
          const auto n = count[s * num_attrs + a];
          if (n > 0 && n < options.min_attribute_observations) attr_slot[s * num_attrs + a] = pooled;
        }
      }
    }
  }
  slot_claims_.resize(slot_keys_.size());

  // Values and claims.
  item_claims_.push_back(0);
  item_values_.push_back(0);
  for (std::size_t d = 0; d < buckets.items().size(); ++d) {
    const auto& item = buckets.item(d);
    const auto base = value_item_.size();
    for (std::size_t b = 0; b < item.buckets.size(); ++b) {
      value_item_.push_back(d);
      value_bucket_.push_back(b);
      value_support_.push_back(item.buckets[b].provider_count);
    }
    for (const auto& e : item.entries) {
      const auto slot = attr_slot[e.source * num_attrs + item.attribute];
      slot_claims_[slot].push_back(claims_.size());
      claims_.push_back({d, base + e.bucket, slot, e.source});
    }
    item_claims_.push_back(claims_.size());
    item_values_.push_back(value_item_.size());
  }

  if (options.similarity) {
    sim_offsets_.push_back(0);
    for (std::size_t d = 0; d < num_items(); ++d) {
      const auto& item = buckets.item(d);
      const auto& attr = schema.at(item.attribute);
      const double tau = buckets.tolerances().of(item.attribute);
      for (const auto& a : item.buckets)
        for (const auto& b : item.buckets)
          sim_.push_back(similarity(a.center, b.center, attr, tau, *options.similarity));
      sim_offsets_.push_back(sim_.size());
    }
  }

  if (options.formatting) {
    link_offsets_.push_back(0);
    for (std::size_t d = 0; d < num_items(); ++d) {
      const auto& item = buckets.item(d);
      const auto& attr = schema.at(item.attribute);
      for (std::size_t i = 0; i < item.entries.size(); ++i) {
        const auto& entry = item.entries[i];
        const Value& provided = claims.claims()[entry.claim].value;
        for (std::size_t b = 0; b < item.buckets.size(); ++b) {
          if (b == entry.bucket) continue;
          const auto& members = item.buckets[b].members;
          if (std::any_of(members.begin(), members.end(), [&](const Value& m) {
                return m != provided && subsumes(provided, m, attr);
              }))
            links_.push_back({item_claims_[d] + i, item_values_[d] + b});
        }
      }
      link_offsets_.push_back(links_.size());
    }
  }
}

const Value& FusionGraph::value(std::size_t v) const {
  return buckets_->item(value_item_[v]).buckets[value_bucket_[v]].center;
}

std::span<const double> FusionGraph::similarity_matrix(std::size_t item) const {
  if (sim_offsets_.empty()) return {};
  return std::span<const double>(sim_).subspan(sim_offsets_[item], sim_offsets_[item + 1] - sim_offsets_[item]);
}

std::span<const FusionGraph::FormatLink> FusionGraph::format_links(std::size_t item) const {
  if (link_offsets_.empty()) return {};
  return std::span<const FormatLink>(links_).subspan(link_offsets_[item],
                                                     link_offsets_[item + 1] - link_offsets_[item]);
}

FusionGraph::Options graph_options(const MethodSpec& method, const FusionConfig& config) {
  FusionGraph::Options o;
  o.per_attribute = method.per_attribute;
  o.min_attribute_observations = config.min_attribute_observations;
  if (is_bayesian(method.method)) {
    const auto b = bayes_options(method.method);
    if (b.similarity) o.similarity = config.similarity;
    o.formatting = b.formatting;
  }
  return o;
}

// --- state and rounds --------------------------------------------------------------

FusionState initial_state(const MethodSpec& method, const FusionGraph& g, const FusionConfig& cfg) {
  FusionState st;
  st.trust.assign(g.num_slots(), 1.0);
  st.votes.assign(g.num_values(), 0.0);
  switch (method.method) {
    case Method::Vote: break;
    case Method::Hub:
    case Method::AvgLog: st.votes.assign(g.num_values(), cfg.init_vote_hub); break;
    case Method::Invest:
      for (std::size_t v = 0; v < g.num_values(); ++v) {
        const auto d = g.item_of_value(v);
        st.votes[v] = static_cast<double>(g.value_support(v)) / static_cast<double>(g.item_claims(d).size());
      }
      break;
    case Method::PooledInvest:
      for (std::size_t v = 0; v < g.num_values(); ++v)
        st.votes[v] = 1.0 / static_cast<double>(item_width(g, g.item_of_value(v)));
      break;
    case Method::Cosine:
      st.trust.assign(g.num_slots(), cfg.init_trust_cosine);
      st.votes.assign(g.num_values(), 1.0);
      break;
    case Method::TwoEstimates: st.trust.assign(g.num_slots(), cfg.init_trust_estimates); break;
    case Method::ThreeEstimates:
      st.trust.assign(g.num_slots(), cfg.init_trust_estimates);
      st.value_trust.assign(g.num_values(), cfg.init_value_trust);
      break;
    default: st.trust.assign(g.num_slots(), cfg.init_trust_bayes); break;
  }
  return st;
}

void round_hub(FusionState& state, const FusionGraph& graph) {
  hub_trust(state, graph, false);
  hub_votes(state, graph);
  ++state.round;
}

void round_avglog(FusionState& state, const FusionGraph& graph) {
  hub_trust(state, graph, true);
  hub_votes(state, graph);
  ++state.round;
}

void round_invest(FusionState& state, const FusionGraph& graph, const FusionConfig& config) {
  auto t = invest_trust(state, graph);
  normalize_by_max(t);
  state.trust = std::move(t);
  invest_votes(state, graph, config);
  ++state.round;
}

void round_pooledinvest(FusionState& state, const FusionGraph& graph, const FusionConfig& config) {
  state.trust = invest_trust(state, graph);
  pooled_votes(state, graph, config);
  ++state.round;
}

void round_cosine(FusionState& state, const FusionGraph& graph, const FusionConfig& config) {
  cosine_trust(state, graph, config);
  cosine_votes(state, graph, config);
  ++state.round;
}

void round_estimates(FusionState& state, const FusionGraph& graph, const FusionConfig& config,
                     int order) {
  if (order != 2 && order != 3) throw Error(ErrorCode::InvalidArgument, "estimates order must be 2 or 3");
  estimates_votes(state, graph, order);
  if (order == 3) estimates_value_trust(state, graph, config);
  estimates_trust(state, graph, config, order);
  ++state.round;
}

std::vector<double> accupr_posterior(std::span<const double> votes, double n_false) {
  std::vector<double> p(votes.size(), 0.0);
  if (votes.empty()) return p;
  const double top = *std::max_element(votes.begin(), votes.end());
  double denom = 0.0;
  for (std::size_t i = 0; i < votes.size(); ++i) {
    p[i] = std::exp(votes[i] - top);
    denom += p[i];
  }
  const double unseen = std::max(0.0, n_false + 1.0 - static_cast<double>(votes.size()));
  denom += unseen * std::exp(-top);
  for (auto& x : p) x = std::isfinite(denom) ? x / denom : 0.0;
  return p;
}

void bayes_vote(FusionState& st, const FusionGraph& g, const FusionConfig& cfg,
                const BayesOptions& options, std::span<const double> claim_weights) {
  st.votes.assign(g.num_values(), 0.0);
  if (options.variant != BayesVariant::TruthFinder) st.posterior.assign(g.num_values(), 0.0);
  std::vector<double> contribution;
  for (std::size_t d = 0; d < g.num_items(); ++d) {
    const auto first = g.value_begin(d);
    const auto k = item_width(g, d);
    const auto claims = g.item_claims(d);
    std::span<double> votes(st.votes.data() + first, k);
    contribution.assign(claims.size(), 0.0);
    for (std::size_t i = 0; i < claims.size(); ++i) {
      const double t = clamp_trust(st.trust[claims[i].slot], cfg.eps_cap);
      double score = 0.0;
      switch (options.variant) {
        case BayesVariant::TruthFinder: score = -std::log(1.0 - t); break;
        case BayesVariant::AccuPr: score = std::log(cfg.n_false * t / (1.0 - t)); break;
        case BayesVariant::PopAccu: score = std::log(t / (1.0 - t)); break;
      }
      if (!claim_weights.empty()) score *= claim_weights[g.item_claim_begin(d) + i];
      contribution[i] = score;
      votes[claims[i].value - first] += score;
    }
    if (options.variant == BayesVariant::PopAccu) {
      // Wrong providers choose among wrong values by observed popularity.
      const double providers = static_cast<double>(claims.size());
      std::vector<double> extra(k, 0.0);
      for (std::size_t i = 0; i < k; ++i) {
        const double rest = providers - static_cast<double>(g.value_support(first + i));
        for (std::size_t j = 0; j < k; ++j) {
          if (j == i) continue;
          const double n = static_cast<double>(g.value_support(first + j));
          extra[i] += n * std::log(n / rest);
        }
      }
      for (std::size_t i = 0; i < k; ++i) votes[i] += extra[i];
    }
    if (options.formatting) {
      std::vector<double> local(votes.begin(), votes.end());
      auto links = g.format_links(d);
      std::vector<FusionGraph::FormatLink> shifted(links.begin(), links.end());
      for (auto& l : shifted) {
        l.claim -= g.item_claim_begin(d);
        l.value -= first;
      }
      format_credit(local, shifted, contribution, cfg.format_weight);
      std::copy(local.begin(), local.end(), votes.begin());
    }
    if (options.similarity && k > 1) boost_in_place(votes, g.similarity_matrix(d), cfg.similarity.rho);
    if (options.variant == BayesVariant::AccuPr) {
      const auto p = accupr_posterior(votes, cfg.n_false);
      std::copy(p.begin(), p.end(), st.posterior.begin() + static_cast<std::ptrdiff_t>(first));
    } else if (options.variant == BayesVariant::PopAccu) {
      const auto p = accupr_posterior(votes, static_cast<double>(k) - 1.0);
      std::copy(p.begin(), p.end(), st.posterior.begin() + static_cast<std::ptrdiff_t>(first));
    }
  }
}

void bayes_trust(FusionState& st, const FusionGraph& g, const FusionConfig& cfg, BayesVariant variant) {
  for (std::size_t s = 0; s < g.num_slots(); ++s) {
    const auto members = g.slot_claims(s);
    if (members.empty()) continue;
    double sum = 0.0;
    for (auto ci : members) {
      const auto v = g.claims()[ci].value;
      sum += variant == BayesVariant::TruthFinder ? 1.0 - std::exp(-cfg.truthfinder_gamma * st.votes[v])
                                                  : st.posterior[v];
    }
    st.trust[s] = clamp_trust(sum / static_cast<double>(members.size()), cfg.eps_cap);
  }
}

std::vector<double> similarity_boost(std::span<const double> votes, std::span<const Value> values,
                                     const AttributeSpec& attribute, double tau,
                                     const SimilarityParams& params) {
  if (votes.size() != values.size()) throw Error(ErrorCode::InvalidArgument, "votes/values size mismatch");
  const auto k = values.size();
  std::vector<double> sim(k * k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) sim[i * k + j] = similarity(values[i], values[j], attribute, tau, params);
  std::vector<double> out(votes.begin(), votes.end());
  boost_in_place(out, sim, params.rho);
  return out;
}

void format_credit(std::span<double> votes, std::span<const FusionGraph::FormatLink> links,
                   std::span<const double> claim_contribution, double weight) {
  for (const auto& l : links) votes[l.value] += weight * claim_contribution[l.claim];
}

std::vector<Selection> select_values(const FusionGraph& g, std::span<const double> score,
                                     std::span<const double> confidence, std::size_t* ties) {
  std::vector<Selection> out;
  out.reserve(g.num_items());
  for (std::size_t d = 0; d < g.num_items(); ++d) {
    auto best = g.value_begin(d);
    bool tied = false;
    for (auto v = best + 1; v < g.value_end(d); ++v) {
      if (score[v] > score[best]) {
        best = v;
        tied = false;
      } else if (score[v] == score[best]) {
        tied = true;
      }
    }
    if (tied && ties) ++*ties;
    out.push_back({d, best, g.value(best), score[best], confidence.empty() ? 0.0 : confidence[best]});
  }
  return out;
}

std::vector<double> trust_for_slots(const FusionGraph& g, const TrustMap& trust) {
  std::vector<double> out(g.num_slots());
  for (std::size_t s = 0; s < g.num_slots(); ++s) {
    const auto& key = g.slot_key(s);
    auto it = trust.find(key);
    if (it == trust.end() && key.attribute) it = trust.find(TrustKey{key.source, std::nullopt});
    if (it == trust.end())
      throw Error(ErrorCode::InvalidArgument, "input trust lacks source " + key.source.value);
    out[s] = it->second;
  }
  return out;
}

TrustMap trust_from_slots(const FusionGraph& g, std::span<const double> trust) {
  TrustMap out;
  for (std::size_t s = 0; s < g.num_slots(); ++s) out.emplace(g.slot_key(s), trust[s]);
  return out;
}

FusionResult run_fusion(const MethodSpec& method, const BucketedClaims& buckets,
                        const FusionConfig& config, const TrustMap* input_trust) {
  if (buckets.claims().claims().empty()) throw Error(ErrorCode::InvalidArgument, "empty ClaimSet");
  if (method.method == Method::AccuCopy)
    throw Error(ErrorCode::InvalidArgument, "AccuCopy runs through run_accucopy");
  const auto start = std::chrono::steady_clock::now();
  if (method.method == Method::Vote) {
    auto r = vote_result(buckets);
    r.rounds_used = input_trust ? 1 : 0;
    r.wall_time = std::chrono::steady_clock::now() - start;
    return r;
  }

  const FusionGraph graph(buckets, graph_options(method, config));
  FusionState st = initial_state(method, graph, config);
  FusionResult r;
  r.method = method;
  if (input_trust) {
    st.trust = trust_for_slots(graph, *input_trust);
    vote_pass(method, st, graph, config);
    r.rounds_used = 1;
    r.converged = true;
  } else {
    r.converged = false;
    // Methods initialized on votes have no trust estimate before round 1.
    const std::size_t first_check = votes_initialized(method.method) ? 2 : 1;
    for (std::size_t k = 1; k <= config.max_rounds; ++k) {
      const auto previous = st.trust;
      step(method, st, graph, config);
      double delta = 0.0;
      for (std::size_t s = 0; s < previous.size(); ++s)
        delta = std::max(delta, std::abs(st.trust[s] - previous[s]));
      r.round_deltas.push_back(delta);
      r.rounds_used = k;
      if (k >= first_check && delta < config.epsilon) {
        r.converged = true;
        break;
      }
    }
  }
  const auto conf = confidences(method, st, graph, config);
  r.selections = select_values(graph, st.votes, conf, &r.ties);
  r.trust = trust_from_slots(graph, st.trust);
  r.wall_time = std::chrono::steady_clock::now() - start;
  return r;
}

// --- sampled trust ---------------------------------------------------------------

TrustMap sample_trust(const MethodSpec& method, const BucketedClaims& buckets, const GoldStandard& gold,
                      const FusionConfig& config) {
  if (method.method == Method::Vote) return {};
  FusionGraph::Options opts;
  opts.per_attribute = method.per_attribute;
  opts.min_attribute_observations = config.min_attribute_observations;
  const FusionGraph g(buckets, opts);
  const auto& claims = buckets.claims();

  // Gold value per item: the matching bucket nearest to the gold value.
  std::vector<const Value*> gold_value(g.num_items(), nullptr);
  std::vector<std::optional<std::size_t>> gold_bucket(g.num_items());
  std::vector<bool> covered_item(g.num_items(), false);
  for (std::size_t d = 0; d < g.num_items(); ++d) {
    const auto& key = claims.items()[d];
    gold_value[d] = gold.find(key);
    if (!gold_value[d]) continue;
    covered_item[d] = true;
    const auto& attr = claims.schema().at(key.attribute);
    const double tau = buckets.tolerances().of(key.attribute);
    double best = std::numeric_limits<double>::infinity();
    for (auto v = g.value_begin(d); v < g.value_end(d); ++v) {
      if (!values_match(g.value(v), *gold_value[d], attr, tau)) continue;
      const double dist = attr.kind == ValueKind::Text ? 0.0 : std::abs(g.value(v).as_real() - gold_value[d]->as_real());
      if (dist < best) {
        best = dist;
        gold_bucket[d] = v;
      }
    }
  }
  std::vector<double> truth(g.num_values(), 0.0);
  for (std::size_t d = 0; d < g.num_items(); ++d)
    if (gold_bucket[d]) truth[*gold_bucket[d]] = 1.0;

  std::vector<double> t(g.num_slots(), 0.0);
  std::vector<bool> defined(g.num_slots(), false);
  for (std::size_t s = 0; s < g.num_slots(); ++s)
    for (auto ci : g.slot_claims(s))
      if (covered_item[g.claims()[ci].item]) defined[s] = true;

  double fallback = 1.0;
  switch (method.method) {
    case Method::Hub:
    case Method::AvgLog: {
      for (std::size_t s = 0; s < g.num_slots(); ++s) {
        double n = 0.0;
        for (auto ci : g.slot_claims(s)) {
          const auto& c = g.claims()[ci];
          if (!covered_item[c.item]) continue;
          t[s] += truth[c.value];
          n += 1.0;
        }
        if (method.method == Method::AvgLog && n > 0.0) t[s] = t[s] / n * std::log1p(n);
      }
      normalize_by_max(t);
      break;
    }
    case Method::Invest:
    case Method::PooledInvest: {
      FusionState st;
      st.trust.assign(g.num_slots(), 1.0);
      st.votes = truth;
      t = invest_trust(st, g);
      if (method.method == Method::Invest) normalize_by_max(t);
      break;
    }
    case Method::Cosine: {
      std::vector<double> target(g.num_values(), -1.0);
      for (std::size_t v = 0; v < g.num_values(); ++v)
        if (truth[v] > 0.0) target[v] = 1.0;
      t = cosine_against(g, target, &covered_item);
      fallback = config.init_trust_cosine;
      break;
    }
    case Method::TwoEstimates:
    case Method::ThreeEstimates: {
      for (std::size_t s = 0; s < g.num_slots(); ++s) {
        double sum = 0.0;
        double width = 0.0;
        for (auto ci : g.slot_claims(s)) {
          const auto& c = g.claims()[ci];
          if (!covered_item[c.item]) continue;
          for (auto v = g.value_begin(c.item); v < g.value_end(c.item); ++v)
            sum += v == c.value ? truth[v] : 1.0 - truth[v];
          width += static_cast<double>(item_width(g, c.item));
        }
        t[s] = width > 0.0 ? sum / width : 0.0;
      }
      fallback = config.init_trust_estimates;
      break;
    }
    default: {
      // Bayesian methods: trust is the source's accuracy.
      for (std::size_t s = 0; s < g.num_slots(); ++s) {
        double n = 0.0;
        double correct = 0.0;
        for (auto ci : g.slot_claims(s)) {
          const auto& c = g.claims()[ci];
          if (!covered_item[c.item]) continue;
          n += 1.0;
          const auto& entry = buckets.item(c.item).entries[ci - g.item_claim_begin(c.item)];
          const auto& key = claims.items()[c.item];
          if (values_match(claims.claims()[entry.claim].value, *gold_value[c.item],
                           claims.schema().at(key.attribute), buckets.tolerances().of(key.attribute)))
            correct += 1.0;
        }
        if (n > 0.0) t[s] = clamp_trust(correct / n, config.eps_cap);
      }
      fallback = config.init_trust_bayes;
      break;
    }
  }

  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t s = 0; s < g.num_slots(); ++s)
    if (defined[s]) {
      sum += t[s];
      ++count;
    }
  const double mean = count ? sum / static_cast<double>(count) : fallback;
  for (std::size_t s = 0; s < g.num_slots(); ++s)
    if (!defined[s]) t[s] = mean;
  return trust_from_slots(g, t);
}

void write_selection(const FusionResult& result, const BucketedClaims& buckets, const std::string& path) {
  const auto& claims = buckets.claims();
  csv::Writer out(path);
  out.row({"object", "attribute", "value", "vote", "confidence"});
  for (const auto& s : result.selections) {
    const auto& key = claims.items()[s.item];
    out.row({key.object, claims.schema().at(key.attribute).name, s.selected.to_string(), fmt_real(s.vote),
             fmt_real(s.confidence)});
  }
}

void write_convergence_log(const FusionResult& result, const std::string& path) {
  csv::Writer out(path);
  out.row({"round", "max_trust_change"});
  for (std::size_t k = 0; k < result.round_deltas.size(); ++k)
    out.row({std::to_string(k + 1), fmt_real(result.round_deltas[k])});
}

}  // namespace truthdisc
