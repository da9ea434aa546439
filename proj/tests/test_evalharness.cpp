#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "truthdisc/evalharness.hpp"
#include "truthdisc/synthetic.hpp"

using namespace truthdisc;
using namespace fixtures;

namespace {

TrustKey key(const char* s) { return {SourceId{s}, std::nullopt}; }

SyntheticData mixed_data(std::uint64_t seed, std::size_t objects = 100) {
  SyntheticSpec spec;
  spec.objects = objects;
  spec.sources = {{"a", 0.95, 1.0}, {"b", 0.7, 0.8}, {"c", 0.5, 0.9}, {"d", 0.65, 0.6}};
  return generate_synthetic(spec, seed);
}

}  // namespace

TEST_CASE("precision and recall") {
  const auto claims = make_claims(number_schema(), {{"a", "o1", "price", "1"}, {"a", "o2", "price", "2"},
                                                    {"a", "o3", "price", "3"}});
  const BucketedClaims b(claims, compute_tolerances(claims));
  const auto r = run_fusion({Method::Vote, false}, b, {});
  // o1 right, o2 wrong, o3 not in gold
  const auto gold = make_gold(claims, {{"o1", "price", "1"}, {"o2", "price", "5"}});
  const auto pr = precision_recall(r.selections, b, gold);
  CHECK(pr.evaluated == 2);
  CHECK(pr.correct == 1);
  CHECK(pr.precision == 0.5);
  CHECK(pr.recall == 0.5);
}

TEST_CASE("trust deviation and difference") {
  const TrustMap sampled = {{key("a"), 0.9}, {key("b"), 0.6}, {key("only_sampled"), 0.1}};
  const TrustMap computed = {{key("a"), 1.0}, {key("b"), 0.3}, {key("only_computed"), 0.4}};
  CHECK(*trust_deviation(sampled, computed) == doctest::Approx(std::sqrt(0.05)).epsilon(1e-12));
  CHECK(*trust_deviation(sampled, computed) == doctest::Approx(0.2236).epsilon(1e-3));
  CHECK(*trust_difference(sampled, computed) == doctest::Approx(-0.1).epsilon(1e-12));
  const TrustMap other = {{key("z"), 0.5}};
  CHECK_FALSE(trust_deviation(sampled, other));
  CHECK_FALSE(trust_difference(sampled, other));
}

TEST_CASE("series summary") {
  const std::vector<double> xs = {0.9, 1.0};
  const auto s = time_series_summary(xs);
  CHECK(s.average == doctest::Approx(0.95));
  CHECK(s.minimum == 0.9);
  CHECK(s.stddev == doctest::Approx(0.05));
  const std::vector<double> one = {0.7};
  CHECK(time_series_summary(one).stddev == 0.0);
  CHECK_THROWS_AS(time_series_summary(std::vector<double>{}), Error);
}

TEST_CASE("Vote precision equals precision_of_dominant") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto data = mixed_data(seed);
    const BucketedClaims b(data.claims, compute_tolerances(data.claims));
    const auto r = timed_run({Method::Vote, false}, b, data.gold, {});
    CHECK(r.precision == doctest::Approx(precision_of_dominant(b, data.gold)).epsilon(1e-12));
  }
}

TEST_CASE("timed_run reports rounds and trust comparison") {
  const auto data = mixed_data(3);
  const BucketedClaims b(data.claims, compute_tolerances(data.claims));
  const FusionConfig cfg;
  const auto sampled = sample_trust({Method::AccuPr, false}, b, data.gold, cfg);
  FusionResult full;
  const auto r = timed_run({Method::AccuPr, false}, b, data.gold, RunSettings{cfg, {}, &sampled, nullptr}, &full);
  CHECK(r.rounds == 1);
  CHECK(*r.trust_deviation == 0.0);
  CHECK(full.selections.size() == b.items().size());
  const auto free_run = timed_run({Method::AccuPr, false}, b, data.gold, RunSettings{cfg, {}, nullptr, nullptr});
  CHECK(free_run.rounds > 1);
  CHECK(free_run.trust_deviation.has_value());
}

TEST_CASE("source ranking and the incremental curve") {
  const auto data = mixed_data(9);
  const auto tol = compute_tolerances(data.claims);
  const auto ranked = rank_sources(data.claims, data.gold, tol);
  REQUIRE(ranked.size() == 4);
  CHECK(ranked[0] == SourceId{"a"});

  const RunSettings settings{};
  const auto curve = incremental_curve({Method::Vote, false}, data.claims, data.gold, settings);
  REQUIRE(curve.size() == 4);
  for (std::size_t k = 0; k < curve.size(); ++k) {
    CHECK(curve[k].k == k + 1);
    CHECK(curve[k].added_source == ranked[k]);
  }
  // with every source added the curve matches a plain run
  const BucketedClaims b(data.claims, tol);
  const auto full = precision_recall(run_fusion({Method::Vote, false}, b, {}).selections, b, data.gold);
  CHECK(curve.back().recall == doctest::Approx(full.recall).epsilon(1e-12));
  CHECK(curve.back().precision == doctest::Approx(full.precision).epsilon(1e-12));
}

TEST_CASE("precision by dominance") {
  std::vector<Row> rows;
  std::vector<std::tuple<std::string, std::string, std::string>> gold_rows;
  // o0 unanimous, o1 split 2-1
  for (const char* s : {"a", "b", "c"}) rows.emplace_back(s, "o0", "price", "10");
  rows.emplace_back("a", "o1", "price", "20");
  rows.emplace_back("b", "o1", "price", "20");
  rows.emplace_back("c", "o1", "price", "30");
  gold_rows.emplace_back("o0", "price", "10");
  gold_rows.emplace_back("o1", "price", "30");
  const auto claims = make_claims(number_schema(), rows);
  const auto gold = make_gold(claims, gold_rows);
  const BucketedClaims b(claims, compute_tolerances(claims));
  const auto vote = run_fusion({Method::Vote, false}, b, {});
  const auto rows_out = precision_by_dominance(vote.selections, vote.selections, b, gold, 0.25);
  REQUIRE(rows_out.size() == 4);
  CHECK(rows_out[0].count == 0);
  CHECK_FALSE(rows_out[0].method_precision);
  CHECK(rows_out[2].count == 1);  // 2/3 lands in [0.5, 0.75)
  CHECK(*rows_out[2].vote_precision == 0.0);
  CHECK(rows_out[3].count == 1);  // 1.0 lands in the last bucket
  CHECK(*rows_out[3].method_precision == 1.0);
  std::size_t total = 0;
  for (const auto& r : rows_out) total += r.count;
  CHECK(total == gold.size());
}

TEST_CASE("snapshot precisions") {
  const auto d1 = mixed_data(1, 60);
  const auto d2 = mixed_data(2, 60);
  const std::vector<Snapshot> snaps = {{&d1.claims, &d1.gold}, {&d2.claims, &d2.gold}};
  const auto ps = snapshot_precisions({Method::Vote, false}, snaps, {});
  REQUIRE(ps.size() == 2);
  const BucketedClaims b1(d1.claims, compute_tolerances(d1.claims));
  CHECK(ps[0] == doctest::Approx(precision_of_dominant(b1, d1.gold)));
}
