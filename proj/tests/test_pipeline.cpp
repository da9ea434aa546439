#include <doctest.h>

#include <algorithm>

#include <json.hpp>

#include "fixtures.hpp"
#include "truthdisc/error.hpp"
#include "truthdisc/pipeline.hpp"

using namespace truthdisc;
using namespace fixtures;
namespace fs = std::filesystem;

namespace {

const char* kSpec =
    "[dataset]\nobjects = 60\nfalse_values = 4\n"
    "[source:good]\naccuracy = 0.95\n"
    "[source:ok]\naccuracy = 0.8\ncoverage = 0.9\n"
    "[source:orig]\naccuracy = 0.55\n"
    "[copiers:g]\noriginal = orig\nmembers = c1;c2\n";

PipelineRequest generated(const fs::path& dir) {
  PipelineRequest gen;
  gen.synthetic_spec = write_file(dir / "spec.ini", kSpec);
  gen.seed = 3;
  gen.out_dir = (dir / "data").string();
  run_pipeline(Command::Generate, gen);
  PipelineRequest req;
  req.schema = (dir / "data" / "schema.csv").string();
  req.claims = (dir / "data" / "claims.csv").string();
  req.gold = (dir / "data" / "gold.csv").string();
  return req;
}

std::size_t lines(const fs::path& p) {
  const auto s = read_file(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST_CASE("command names") {
  CHECK(parse_command("copydetect") == Command::CopyDetect);
  CHECK(to_string(Command::Evaluate) == "evaluate");
  CHECK_THROWS_AS(parse_command("fuze"), Error);
}

TEST_CASE("generate then profile") {
  const auto dir = temp_dir("pipe_profile");
  auto req = generated(dir);
  CHECK(lines(dir / "data" / "claims.csv") > 60);
  CHECK(lines(dir / "data" / "gold.csv") == 61);
  req.out_dir = (dir / "profile").string();
  run_pipeline(Command::Profile, req);
  CHECK(lines(dir / "profile" / "items.csv") == 61);
  CHECK(lines(dir / "profile" / "sources.csv") == 6);
  CHECK(fs::exists(dir / "profile" / "hist_entropy.csv"));
  const auto summary = nlohmann::json::parse(read_file(dir / "profile" / "summary.json"));
  CHECK(summary.is_object());
}

TEST_CASE("fuse writes selection, trust and run info") {
  const auto dir = temp_dir("pipe_fuse");
  auto req = generated(dir);
  req.methods = {"AccuPr"};
  req.out_dir = (dir / "fuse").string();
  run_pipeline(Command::Fuse, req);
  CHECK(lines(dir / "fuse" / "selection.csv") == 61);
  CHECK(lines(dir / "fuse" / "trust.csv") == 6);
  const auto run = nlohmann::json::parse(read_file(dir / "fuse" / "run.json"));
  CHECK(run["method"] == "AccuPr");
  CHECK(run.contains("precision"));
}

TEST_CASE("compare runs the requested methods") {
  const auto dir = temp_dir("pipe_compare");
  auto req = generated(dir);
  req.methods = {"Vote", "AccuPr"};
  req.out_dir = (dir / "cmp").string();
  run_pipeline(Command::Compare, req);
  const auto report = nlohmann::json::parse(read_file(dir / "cmp" / "report.json"));
  REQUIRE(report.size() == 2);
  CHECK(report[0]["method"] == "Vote");
  CHECK(report[1]["method"] == "AccuPr");
  CHECK(lines(dir / "cmp" / "report.csv") == 3);

  req.sampled_trust = true;
  req.out_dir = (dir / "cmp2").string();
  run_pipeline(Command::Compare, req);
  CHECK(nlohmann::json::parse(read_file(dir / "cmp2" / "report.json")).size() == 4);
}

TEST_CASE("reruns are byte-identical") {
  const auto dir = temp_dir("pipe_determinism");
  auto req = generated(dir);
  req.config.workers = 4;
  req.methods = {"AccuCopy"};
  for (const char* out : {"x", "y"}) {
    req.out_dir = (dir / out).string();
    run_pipeline(Command::Evaluate, req);
  }
  for (const char* f : {"report.csv", "selection.csv", "curve.csv", "dominance.csv"})
    CHECK(read_file(dir / "x" / f) == read_file(dir / "y" / f));
}

TEST_CASE("copydetect finds the generated copier group") {
  const auto dir = temp_dir("pipe_copy");
  auto req = generated(dir);
  req.out_dir = (dir / "copy").string();
  run_pipeline(Command::CopyDetect, req);
  const auto groups = read_file(dir / "copy" / "groups.csv");
  CHECK(groups.find("c1;c2;orig") != std::string::npos);
  CHECK(lines(dir / "copy" / "pairs.csv") == 1 + 5 * 4);
}

TEST_CASE("pipeline errors") {
  const auto dir = temp_dir("pipe_errors");
  auto req = generated(dir);
  req.out_dir = (dir / "e").string();
  req.methods = {"Nope"};
  try {
    run_pipeline(Command::Fuse, req);
    FAIL("unknown method accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownMethod);
  }
  req.methods = {"Vote"};
  req.gold.clear();
  CHECK_THROWS_AS(run_pipeline(Command::Evaluate, req), Error);
  req.trusted_sources = {"good", "ok"};
  CHECK_NOTHROW(run_pipeline(Command::Evaluate, req));
}
