#include <doctest.h>

#include "fixtures.hpp"
#include "truthdisc/copydetect.hpp"
#include "truthdisc/error.hpp"
#include "truthdisc/metrics.hpp"
#include "truthdisc/synthetic.hpp"

using namespace truthdisc;
using namespace fixtures;

namespace {

double accuracy_of(const SyntheticData& d, const char* id) {
  const auto tol = compute_tolerances(d.claims);
  return *source_accuracy(d.claims, *d.claims.find_source(SourceId{id}), d.gold, tol);
}

bool same_claims(const ClaimSet& x, const ClaimSet& y) {
  const auto a = x.to_claims();
  const auto b = y.to_claims();
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].source != b[i].source || a[i].item != b[i].item || !(a[i].value == b[i].value)) return false;
  return true;
}

}  // namespace

TEST_CASE("sources hit their accuracy and coverage") {
  SyntheticSpec spec;
  spec.objects = 1000;
  spec.sources = {{"a", 0.8, 1.0}, {"b", 0.6, 0.5}, {"perfect", 1.0, 1.0}};
  const auto d = generate_synthetic(spec, 4);
  CHECK(accuracy_of(d, "a") == doctest::Approx(0.8).epsilon(0.02));
  CHECK(accuracy_of(d, "b") == doctest::Approx(0.6).epsilon(0.02));
  CHECK(source_coverage(d.claims, *d.claims.find_source(SourceId{"b"}), d.gold) == doctest::Approx(0.5));
  const auto p = *d.claims.find_source(SourceId{"perfect"});
  for (auto ci : d.claims.source_claims(p)) {
    const auto& c = d.claims.claims()[ci];
    CHECK(*d.gold.find(d.claims.items()[c.item]) == c.value);
  }
  CHECK(d.gold.size() == 1000);
}

TEST_CASE("deterministic per seed") {
  SyntheticSpec spec;
  spec.objects = 50;
  spec.sources = {{"a", 0.7, 0.9}, {"b", 0.5, 1.0}};
  spec.copiers = {{"g", "a", {"c"}, 0.5, std::nullopt}};
  const auto x = generate_synthetic(spec, 7);
  const auto y = generate_synthetic(spec, 7);
  const auto z = generate_synthetic(spec, 8);
  CHECK(same_claims(x.claims, y.claims));
  CHECK_FALSE(same_claims(x.claims, z.claims));
  CHECK(x.copiers == y.copiers);
}

TEST_CASE("a full-rate copier duplicates its original") {
  SyntheticSpec spec;
  spec.objects = 100;
  spec.sources = {{"orig", 0.55, 0.8}, {"other", 0.9, 1.0}};
  spec.copiers = {{"g", "orig", {"c1", "c2"}, 1.0, std::nullopt}};
  const auto d = generate_synthetic(spec, 2);
  const std::vector<SourceId> group = {SourceId{"orig"}, SourceId{"c1"}, SourceId{"c2"}};
  const auto g = group_commonality(group, d.claims, d.gold, compute_tolerances(d.claims));
  CHECK(g.value_sim == 1.0);
  CHECK(g.object_sim == 1.0);
  CHECK(d.copiers.at({SourceId{"c1"}, SourceId{"orig"}}) == 1.0);
}

TEST_CASE("copier accuracy targets") {
  SyntheticSpec spec;
  spec.objects = 200;
  spec.sources = {{"orig", 0.5, 1.0}};
  spec.copiers = {{"g", "orig", {"c"}, 0.5, 0.7}};
  const auto d = generate_synthetic(spec, 3);
  CHECK(accuracy_of(d, "c") == doctest::Approx(0.7).epsilon(0.01));

  spec.copiers[0].accuracy = 0.9;  // only 100 own claims cannot lift 50 copied-correct to 180
  try {
    generate_synthetic(spec, 3);
    FAIL("infeasible target accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Infeasible);
  }
}

TEST_CASE("spec validation and the INI form") {
  SyntheticSpec bad;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad.sources = {{"a", 1.5, 1.0}};
  CHECK_THROWS_AS(bad.validate(), Error);
  bad.sources = {{"a", 0.5, 1.0}, {"a", 0.5, 1.0}};
  CHECK_THROWS_AS(bad.validate(), Error);

  const auto dir = temp_dir("synthetic_ini");
  const auto path = write_file(dir / "s.ini",
                               "[dataset]\nobjects = 20\nfalse_values = 3\n"
                               "[attribute:dep]\nkind = time\n"
                               "[source:a]\naccuracy = 0.9\ncoverage = 0.5\n"
                               "[copiers:grp]\noriginal = a\nmembers = x; y\nrate = 0.5\n");
  const auto spec = load_synthetic_spec(path);
  CHECK(spec.objects == 20);
  REQUIRE(spec.attributes.size() == 1);
  CHECK(spec.attributes[0].kind == ValueKind::TimeOfDay);
  CHECK(spec.attributes[0].tolerance_param == 10.0);
  REQUIRE(spec.copiers.size() == 1);
  CHECK(spec.copiers[0].members == std::vector<std::string>{"x", "y"});
  const auto typo = write_file(dir / "t.ini", "[source:a]\naccuracy = 0.9\ncoverge = 1\n");
  CHECK_THROWS_AS(load_synthetic_spec(typo), Error);
}
