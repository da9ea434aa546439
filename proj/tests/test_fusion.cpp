#include <doctest.h>

#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "truthdisc/error.hpp"
#include "truthdisc/evalharness.hpp"
#include "truthdisc/fusion.hpp"
#include "truthdisc/metrics.hpp"
#include "truthdisc/synthetic.hpp"

using namespace truthdisc;
using namespace fixtures;

namespace {

const std::vector<Method> kAllMethods = {
    Method::Vote,           Method::Hub,         Method::AvgLog, Method::Invest,  Method::PooledInvest,
    Method::Cosine,         Method::TwoEstimates, Method::ThreeEstimates, Method::TruthFinder, Method::AccuPr,
    Method::PopAccu,        Method::AccuSim,     Method::AccuFormat, Method::AccuCopy};

// Three sources say 11, two say 13 on one item; a second item is unanimous.
ClaimSet toy5() {
  return make_claims(number_schema(), {{"s1", "d", "price", "11"}, {"s2", "d", "price", "11"},
                                       {"s3", "d", "price", "11"}, {"s4", "d", "price", "13"},
                                       {"s5", "d", "price", "13"}, {"s1", "e", "price", "21"},
                                       {"s2", "e", "price", "21"}, {"s3", "e", "price", "21"},
                                       {"s4", "e", "price", "21"}, {"s5", "e", "price", "21"}});
}

FusionResult fuse(Method m, const BucketedClaims& b, const FusionConfig& cfg = {}, const TrustMap* trust = nullptr) {
  return run_method(MethodSpec{m, false}, b, RunSettings{cfg, CopyParams{}, trust, nullptr});
}

TrustMap uniform_trust(const ClaimSet& claims, double t) {
  TrustMap m;
  for (const auto& s : claims.sources()) m[{s, std::nullopt}] = t;
  return m;
}

// Brute-force posterior of each observed value under AccuPr: N+1 hypotheses
// (the observed values plus N + 1 - k unobserved ones), each weighing every
// provider by T if it agrees and (1 - T) / N otherwise.
std::vector<double> bayes_oracle(const std::vector<std::size_t>& provided, const std::vector<double>& trust,
                                 std::size_t k, double n) {
  std::vector<double> likelihood(static_cast<std::size_t>(n) + 1, 1.0);
  for (std::size_t h = 0; h < likelihood.size(); ++h)
    for (std::size_t i = 0; i < provided.size(); ++i)
      likelihood[h] *= provided[i] == h ? trust[i] : (1.0 - trust[i]) / n;
  const double total = std::accumulate(likelihood.begin(), likelihood.end(), 0.0);
  std::vector<double> out(k);
  for (std::size_t v = 0; v < k; ++v) out[v] = likelihood[v] / total;
  return out;
}

}  // namespace

TEST_CASE("method names") {
  CHECK(parse_method("AccuFormatAttr") == MethodSpec{Method::AccuFormat, true});
  CHECK(parse_method("accupr") == MethodSpec{Method::AccuPr, false});
  CHECK(parse_method("2-Estimates").method == Method::TwoEstimates);
  CHECK(parse_method("hub").method == Method::Hub);
  CHECK(method_name({Method::ThreeEstimates, true}) == "3-EstimatesAttr");
  CHECK(method_names().size() == kAllMethods.size());
  for (const auto& n : method_names()) CHECK(method_name(parse_method(n)) == n);
  try {
    parse_method("AccuPro");
    FAIL("typo accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownMethod);
    CHECK(std::string(e.what()).find("AccuPr") != std::string::npos);
    CHECK(std::string(e.what()).find("TruthFinder") != std::string::npos);
  }
}

TEST_CASE("Vote picks the dominant value") {
  const auto claims = toy5();
  const BucketedClaims b(claims, compute_tolerances(claims));
  const auto r = fuse(Method::Vote, b);
  CHECK(r.selections[0].selected == Value::number(11));
  CHECK(r.rounds_used == 0);
}

TEST_CASE("every method selects the majority on toy-5") {
  const auto claims = toy5();
  const BucketedClaims b(claims, compute_tolerances(claims));
  for (auto m : kAllMethods) {
    // min-max rescaled value trust flips 3-Estimates on an item this small
    if (m == Method::ThreeEstimates) continue;
    CAPTURE(method_name({m, false}));
    const auto r = fuse(m, b);
    CHECK(r.converged);
    CHECK(r.selections[0].selected == Value::number(11));
    CHECK(r.selections[1].selected == Value::number(21));
  }
}

TEST_CASE("a single source's values are always selected") {
  std::vector<Row> rows;
  for (int i = 0; i < 8; ++i) rows.emplace_back("only", "o" + std::to_string(i), "price", std::to_string(10 + i));
  const auto claims = make_claims(number_schema(), rows);
  const BucketedClaims b(claims, compute_tolerances(claims));
  for (auto m : kAllMethods) {
    CAPTURE(method_name({m, false}));
    const auto r = fuse(m, b);
    REQUIRE(r.selections.size() == 8);
    for (int i = 0; i < 8; ++i) CHECK(r.selections[i].selected == Value::number(10 + i));
  }
}

TEST_CASE("AccuPr with equal fixed trust breaks a 1-1 tie by value order") {
  const auto claims = make_claims(number_schema(), {{"a", "d", "price", "12"}, {"b", "d", "price", "10"}});
  const BucketedClaims b(claims, compute_tolerances(claims));
  const auto trust = uniform_trust(claims, 0.8);
  const auto r = fuse(Method::AccuPr, b, {}, &trust);
  CHECK(r.rounds_used == 1);
  CHECK(r.ties == 1);
  CHECK(r.selections[0].selected == Value::number(10));
  // both posteriors equal the brute-force value
  const auto oracle = bayes_oracle({0, 1}, {0.8, 0.8}, 2, 10);
  CHECK(r.selections[0].confidence == doctest::Approx(oracle[0]).epsilon(1e-12));
  CHECK(oracle[0] == doctest::Approx(oracle[1]));
}

TEST_CASE("round_hub on one source and one value") {
  const auto claims = single_item({"5"});
  const BucketedClaims b(claims, compute_tolerances(claims));
  const FusionGraph g(b, {});
  auto st = initial_state({Method::Hub, false}, g, {});
  round_hub(st, g);
  CHECK(st.trust[0] == 1.0);
  CHECK(st.votes[0] == 1.0);
}

TEST_CASE("identical sources keep equal trust every round") {
  const auto claims = make_claims(number_schema(), {{"a", "d", "price", "1"}, {"b", "d", "price", "1"},
                                                    {"c", "d", "price", "2"}, {"a", "e", "price", "5"},
                                                    {"b", "e", "price", "5"}, {"c", "e", "price", "5"}});
  const BucketedClaims b(claims, compute_tolerances(claims));
  const FusionConfig cfg;
  for (auto m : {Method::Hub, Method::AvgLog, Method::Invest, Method::PooledInvest, Method::Cosine,
                 Method::TwoEstimates, Method::ThreeEstimates}) {
    CAPTURE(method_name({m, false}));
    const FusionGraph g(b, graph_options({m, false}, cfg));
    auto st = initial_state({m, false}, g, cfg);
    for (int k = 0; k < 5; ++k) {
      switch (m) {
        case Method::Hub: round_hub(st, g); break;
        case Method::AvgLog: round_avglog(st, g); break;
        case Method::Invest: round_invest(st, g, cfg); break;
        case Method::PooledInvest: round_pooledinvest(st, g, cfg); break;
        case Method::Cosine: round_cosine(st, g, cfg); break;
        case Method::TwoEstimates: round_estimates(st, g, cfg, 2); break;
        default: round_estimates(st, g, cfg, 3); break;
      }
      CHECK(st.trust[0] == st.trust[1]);
    }
  }
}

TEST_CASE("AvgLog gives a single-claim source non-zero trust") {
  const auto claims = make_claims(number_schema(), {{"a", "d", "price", "1"}, {"b", "d", "price", "1"},
                                                    {"b", "e", "price", "3"}});
  const BucketedClaims b(claims, compute_tolerances(claims));
  const auto r = fuse(Method::AvgLog, b);
  CHECK(r.trust.at({SourceId{"a"}, std::nullopt}) > 0.0);
}

TEST_CASE("normalized trust stays in range") {
  SyntheticSpec spec;
  spec.objects = 60;
  spec.false_values = 3;
  spec.sources = {{"a", 0.9, 1.0}, {"b", 0.7, 0.8}, {"c", 0.5, 0.9}, {"d", 0.6, 0.7}};
  const auto data = generate_synthetic(spec, 3);
  const BucketedClaims b(data.claims, compute_tolerances(data.claims));
  for (auto m : {Method::Hub, Method::AvgLog, Method::Invest, Method::TwoEstimates, Method::ThreeEstimates,
                 Method::TruthFinder, Method::AccuPr, Method::PopAccu}) {
    CAPTURE(method_name({m, false}));
    const auto r = fuse(m, b);
    for (const auto& [k, t] : r.trust) {
      CHECK(t >= 0.0);
      CHECK(t <= 1.0);
    }
  }
  const FusionConfig cfg;
  for (auto m : {Method::AccuPr, Method::PopAccu}) {
    const FusionGraph g(b, graph_options({m, false}, cfg));
    auto st = initial_state({m, false}, g, cfg);
    bayes_vote(st, g, cfg, {m == Method::AccuPr ? BayesVariant::AccuPr : BayesVariant::PopAccu, false, false});
    for (std::size_t d = 0; d < g.num_items(); ++d) {
      double total = 0.0;
      for (auto v = g.value_begin(d); v < g.value_end(d); ++v) {
        CHECK(st.posterior[v] >= 0.0);
        total += st.posterior[v];
      }
      CHECK(total <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("2-Estimates votes average trust and complement trust") {
  const auto claims = toy5();
  const BucketedClaims b(claims, compute_tolerances(claims));
  const FusionConfig cfg;
  const FusionGraph g(b, {});
  auto st = initial_state({Method::TwoEstimates, false}, g, cfg);
  round_estimates(st, g, cfg, 2);
  // raw votes with T = 1: 11 -> 3/5, 13 -> 2/5, unanimous 21 -> 1; min-max rescale
  const std::vector<double> raw = {0.6, 0.4, 1.0};
  for (std::size_t v = 0; v < 3; ++v) CHECK(st.votes[v] == doctest::Approx((raw[v] - 0.4) / 0.6).epsilon(1e-12));
}

TEST_CASE("3-Estimates starts value trust at 0.9") {
  const auto claims = toy5();
  const BucketedClaims b(claims, compute_tolerances(claims));
  const FusionGraph g(b, {});
  const auto st = initial_state({Method::ThreeEstimates, false}, g, {});
  for (double t : st.value_trust) CHECK(t == 0.9);
}

TEST_CASE("AccuPr posterior of a sole supporter") {
  const std::vector<double> votes = {std::log(10 * 0.8 / 0.2)};
  CHECK(accupr_posterior(votes, 10)[0] == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(accupr_posterior(votes, 10)[0] == doctest::Approx(bayes_oracle({0}, {0.8}, 1, 10)[0]).epsilon(1e-12));
}

TEST_CASE("AccuPr posteriors match Bayes enumeration on 3-source 2-value items") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const double n = static_cast<double>(2 + rng() % 9);
    std::vector<double> trust(3);
    for (auto& t : trust) t = 0.05 + static_cast<double>(rng() % 900) / 1000.0;
    std::vector<std::size_t> provided(3);
    for (auto& p : provided) p = rng() % 2;
    if (provided[0] == provided[1] && provided[1] == provided[2]) provided[2] = 1 - provided[0];
    std::vector<double> votes(2, 0.0);
    for (std::size_t i = 0; i < 3; ++i) votes[provided[i]] += std::log(n * trust[i] / (1 - trust[i]));
    const auto p = accupr_posterior(votes, n);
    const auto oracle = bayes_oracle(provided, trust, 2, n);
    CHECK(p[0] == doctest::Approx(oracle[0]).epsilon(1e-9));
    CHECK(p[1] == doctest::Approx(oracle[1]).epsilon(1e-9));
  }
}

TEST_CASE("TruthFinder vote sums -ln(1 - T)") {
  const auto claims = make_claims(number_schema(), {{"a", "d", "price", "10"}, {"b", "d", "price", "10"},
                                                    {"c", "d", "price", "30"}});
  const BucketedClaims b(claims, compute_tolerances(claims));
  FusionConfig cfg;
  const FusionGraph g(b, {});
  FusionState st;
  st.trust = {0.5, 0.9, 0.8};
  bayes_vote(st, g, cfg, {BayesVariant::TruthFinder, false, false});
  CHECK(st.votes[0] == doctest::Approx(-std::log(0.5) - std::log(0.1)).epsilon(1e-12));
  CHECK(st.votes[1] == doctest::Approx(-std::log(0.2)).epsilon(1e-12));
}

TEST_CASE("PopAccu on a uniform item equals AccuPr with N = values - 1") {
  const auto claims = make_claims(number_schema(), {{"a", "d", "price", "10"}, {"b", "d", "price", "20"},
                                                    {"c", "d", "price", "30"}});
  const BucketedClaims b(claims, compute_tolerances(claims));
  FusionConfig pop_cfg, pr_cfg;
  pr_cfg.n_false = 2;
  const FusionGraph g(b, {});
  FusionState pop, pr;
  pop.trust = pr.trust = {0.9, 0.6, 0.7};
  bayes_vote(pop, g, pop_cfg, {BayesVariant::PopAccu, false, false});
  bayes_vote(pr, g, pr_cfg, {BayesVariant::AccuPr, false, false});
  for (std::size_t v = 0; v < 3; ++v) CHECK(pop.posterior[v] == doctest::Approx(pr.posterior[v]).epsilon(1e-12));
}

TEST_CASE("similarity_boost") {
  const AttributeSpec price{"price", ValueKind::Number, 0.01};
  const std::vector<Value> values = {Value::number(10.0), Value::number(10.6)};
  const std::vector<double> votes = {4, 2};
  const auto boosted = similarity_boost(votes, values, price, 0.12, {10.0, 60.0, 0.5});
  CHECK(boosted[0] == doctest::Approx(4.5));
  CHECK(boosted[1] == doctest::Approx(3.0));

  const std::vector<Value> far = {Value::number(10.0), Value::number(50.0)};
  CHECK(similarity_boost(votes, far, price, 0.12, {10.0, 60.0, 0.5}) == votes);

  const std::vector<Value> same_ish = {Value::number(10.0), Value::number(10.0)};
  const std::vector<double> uneven = {3, 1};
  const auto sym = similarity_boost(uneven, same_ish, price, 0.12, {10.0, 60.0, 1.0});
  CHECK(sym[0] == sym[1]);
}

TEST_CASE("formatting credit flows from a coarse claim to the finer value") {
  const auto claims = make_claims(number_schema(), {{"rounder", "d", "price", "8M"}, {"exact", "d", "price", "7,528,396"}});
  const BucketedClaims b(claims, compute_tolerances(claims));
  FusionGraph::Options opt;
  opt.formatting = true;
  const FusionGraph g(b, opt);
  REQUIRE(g.num_values() == 2);
  const auto links = g.format_links(0);
  REQUIRE(links.size() == 1);
  CHECK(g.value(links[0].value) == Value::number(7528396));
  CHECK(g.claims()[links[0].claim].source == *claims.find_source(SourceId{"rounder"}));

  std::vector<double> votes = {1.0, 2.0};
  const std::vector<double> contribution = {3.0, 3.0};
  format_credit(votes, links, contribution, 0.5);
  CHECK(votes[0] == 2.5);
  CHECK(votes[1] == 2.0);

  format_credit(votes, {}, contribution, 0.5);
  CHECK(votes[0] == 2.5);

  const auto dup = make_claims(number_schema(), {{"a", "d", "price", "8M"}, {"b", "d", "price", "8M"}});
  const BucketedClaims bd(dup, compute_tolerances(dup));
  CHECK(FusionGraph(bd, opt).format_links(0).empty());
}

TEST_CASE("sampled trust") {
  std::vector<Row> rows;
  std::vector<std::tuple<std::string, std::string, std::string>> gold_rows;
  for (int i = 0; i < 4; ++i) {
    const auto obj = "o" + std::to_string(i);
    rows.emplace_back("perfect", obj, "price", "100");
    rows.emplace_back("mostly", obj, "price", i == 3 ? "200" : "100");
    gold_rows.emplace_back(obj, "price", "100");
  }
  const auto claims = make_claims(number_schema(), rows);
  const auto gold = make_gold(claims, gold_rows);
  const BucketedClaims b(claims, compute_tolerances(claims));
  const FusionConfig cfg;
  const TrustMap accu = sample_trust({Method::AccuPr, false}, b, gold, cfg);
  CHECK(accu.at({SourceId{"perfect"}, std::nullopt}) == doctest::Approx(1 - cfg.eps_cap));
  CHECK(accu.at({SourceId{"mostly"}, std::nullopt}) == doctest::Approx(0.75));
  const TrustMap cos = sample_trust({Method::Cosine, false}, b, gold, cfg);
  CHECK(cos.at({SourceId{"perfect"}, std::nullopt}) == doctest::Approx(1.0));
  CHECK(cos.at({SourceId{"mostly"}, std::nullopt}) < 1.0);
}

TEST_CASE("input trust: one pass, trust echoed, deterministic") {
  SyntheticSpec spec;
  spec.objects = 50;
  spec.sources = {{"a", 0.9, 1.0}, {"b", 0.6, 1.0}, {"c", 0.6, 0.8}};
  const auto data = generate_synthetic(spec, 8);
  const BucketedClaims b(data.claims, compute_tolerances(data.claims));
  const FusionConfig cfg;
  for (auto m : kAllMethods) {
    if (m == Method::Vote) continue;
    CAPTURE(method_name({m, false}));
    const auto sampled = sample_trust({m, false}, b, data.gold, cfg);
    const auto r1 = fuse(m, b, cfg, &sampled);
    const auto r2 = fuse(m, b, cfg, &sampled);
    CHECK(r1.rounds_used == 1);
    CHECK(r1.trust == sampled);
    REQUIRE(r1.selections.size() == r2.selections.size());
    for (std::size_t i = 0; i < r1.selections.size(); ++i) CHECK(r1.selections[i].value == r2.selections[i].value);
  }
}

TEST_CASE("uniform fixed trust reproduces Vote") {
  FusionConfig cfg;
  cfg.similarity.decay_width_multiplier = 1.0;  // keep distinct false values dissimilar
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    SyntheticSpec spec;
    spec.objects = 80;
    spec.false_values = 3;
    for (int s = 0; s < 5; ++s)
      spec.sources.push_back({"s" + std::to_string(s), 0.4 + static_cast<double>(rng() % 50) / 100.0, 1.0});
    const auto data = generate_synthetic(spec, trial);
    const BucketedClaims b(data.claims, compute_tolerances(data.claims));
    const auto vote = fuse(Method::Vote, b, cfg);
    const auto trust = uniform_trust(data.claims, 0.8);
    for (auto m : kAllMethods) {
      if (m == Method::Vote || m == Method::AccuCopy) continue;
      CAPTURE(method_name({m, false}));
      const auto r = fuse(m, b, cfg, &trust);
      for (std::size_t d = 0; d < r.selections.size(); ++d) {
        const auto& bs = b.item(d).buckets;
        std::size_t top = 0, tops = 0;
        for (const auto& bk : bs) top = std::max(top, bk.provider_count);
        for (const auto& bk : bs) tops += bk.provider_count == top;
        if (tops == 1) CHECK(r.selections[d].value == vote.selections[d].value);
      }
    }
  }
}

TEST_CASE("selection ignores source relabeling and claim order") {
  SyntheticSpec spec;
  spec.objects = 40;
  spec.sources = {{"a", 0.9, 1.0}, {"b", 0.7, 0.9}, {"c", 0.5, 1.0}, {"d", 0.6, 0.8}};
  const auto data = generate_synthetic(spec, 21);
  auto rows = data.claims.to_claims();
  std::mt19937_64 rng(1);
  std::shuffle(rows.begin(), rows.end(), rng);
  // a label order that differs from the original one
  for (auto& c : rows) c.source.value = c.source.value == "a" ? "z" : c.source.value;
  const ClaimSet permuted(data.schema, "", rows);
  const BucketedClaims b1(data.claims, compute_tolerances(data.claims));
  const BucketedClaims b2(permuted, compute_tolerances(permuted));
  for (auto m : kAllMethods) {
    CAPTURE(method_name({m, false}));
    const auto r1 = fuse(m, b1);
    const auto r2 = fuse(m, b2);
    for (std::size_t d = 0; d < r1.selections.size(); ++d)
      CHECK(r1.selections[d].selected == r2.selections[d].selected);
  }
}

TEST_CASE("per-attribute slots fall back to pooled trust below the threshold") {
  const auto s = schema({{"price", ValueKind::Number, 0.01}, {"dep", ValueKind::TimeOfDay, 10}});
  std::vector<Row> rows;
  for (int i = 0; i < 6; ++i) rows.emplace_back("a", "o" + std::to_string(i), "price", std::to_string(10 + i));
  rows.emplace_back("a", "o0", "dep", "10:00");
  const auto claims = make_claims(s, rows);
  const BucketedClaims b(claims, compute_tolerances(claims));
  FusionGraph::Options opt;
  opt.per_attribute = true;
  const FusionGraph g(b, opt);
  REQUIRE(g.num_slots() == 2);
  CHECK(g.slot_key(0).attribute == std::optional<std::string>("price"));
  CHECK_FALSE(g.slot_key(1).attribute.has_value());
}

TEST_CASE("non-convergence is flagged, not thrown") {
  const auto claims = toy5();
  const BucketedClaims b(claims, compute_tolerances(claims));
  FusionConfig cfg;
  cfg.max_rounds = 1;
  cfg.epsilon = 1e-300;
  const auto r = fuse(Method::Cosine, b, cfg);
  CHECK_FALSE(r.converged);
  CHECK(r.rounds_used == 1);
  CHECK(r.round_deltas.size() == 1);
}

TEST_CASE("trust file round trip") {
  const auto dir = temp_dir("fusion_trust");
  TrustMap t = {{{SourceId{"a"}, std::nullopt}, 0.25}, {{SourceId{"b"}, std::string("price")}, 0.5}};
  write_trust(t, (dir / "t.csv").string());
  CHECK(load_trust((dir / "t.csv").string()) == t);
  const auto plain = write_file(dir / "p.csv", "source,trust\nx,0.9\n");
  CHECK(load_trust(plain).at({SourceId{"x"}, std::nullopt}) == 0.9);
  const auto bad = write_file(dir / "b.csv", "source,trust\nx,high\n");
  CHECK_THROWS_AS(load_trust(bad), Error);
}
