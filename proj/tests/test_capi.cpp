#include <doctest.h>

#include <string>

#include "fixtures.hpp"
#include "truthdisc/truthdisc.h"

using namespace fixtures;

namespace {

struct Data {
  std::string schema, claims, gold;
};

Data write_data(const std::filesystem::path& dir) {
  return {write_file(dir / "schema.csv", "name,kind\nprice,number\n"),
          write_file(dir / "claims.csv",
                     "source,object,attribute,value\n"
                     "a,o1,price,10\nb,o1,price,10\nc,o1,price,12\n"
                     "a,o2,price,5\nb,o2,price,6\nc,o2,price,6\n"),
          write_file(dir / "gold.csv", "object,attribute,value\no1,price,10\no2,price,6\n")};
}

}  // namespace

TEST_CASE("status names and version") {
  CHECK(std::string(td_version()) == "1.0.0");
  CHECK(std::string(td_status_name(TD_OK)) == "ok");
  CHECK(std::string(td_status_name(TD_ERR_UNKNOWN_METHOD)).find("method") != std::string::npos);
  CHECK(td_method_count() == 14);
  CHECK(std::string(td_method_name(0)) == "Vote");
  CHECK(td_method_name(99) == nullptr);
}

TEST_CASE("config through the C API") {
  td_config* cfg = nullptr;
  REQUIRE(td_config_create(&cfg) == TD_OK);
  CHECK(td_config_set(cfg, "fusion.max_rounds", "7") == TD_OK);
  CHECK(td_config_set(cfg, "fusion.nope", "1") == TD_ERR_INVALID_ARGUMENT);
  CHECK(std::string(td_last_error()).find("fusion.nope") != std::string::npos);
  CHECK(td_config_set(cfg, "similarity.rho", "3") == TD_ERR_INVALID_ARGUMENT);

  char buf[4];
  size_t needed = 0;
  CHECK(td_config_get(cfg, "fusion.max_rounds", buf, sizeof buf, &needed) == TD_OK);
  CHECK(std::string(buf) == "7");
  // too small: an empty string and the size needed
  CHECK(td_config_get(cfg, "fusion.epsilon", buf, sizeof buf, &needed) == TD_OK);
  CHECK(std::string(buf).empty());
  CHECK(needed == 6);
  CHECK(td_config_set(nullptr, "a", "b") == TD_ERR_INVALID_ARGUMENT);
  CHECK(td_config_key_count() > 20);
  td_config_destroy(cfg);
}

TEST_CASE("dataset, fusion and results") {
  const auto dir = temp_dir("capi_fuse");
  const auto d = write_data(dir);
  td_config* cfg = nullptr;
  REQUIRE(td_config_create(&cfg) == TD_OK);
  td_dataset* ds = nullptr;
  REQUIRE(td_dataset_load(cfg, d.schema.c_str(), d.claims.c_str(), d.gold.c_str(), &ds) == TD_OK);
  CHECK(td_dataset_num_claims(ds) == 6);
  CHECK(td_dataset_num_sources(ds) == 3);
  CHECK(td_dataset_num_items(ds) == 2);
  CHECK(td_dataset_gold_size(ds) == 2);
  double pod = 0;
  CHECK(td_dataset_precision_of_dominant(ds, &pod) == TD_OK);
  CHECK(pod == 1.0);

  td_result* r = nullptr;
  CHECK(td_fuse(cfg, ds, "Nope", nullptr, nullptr, &r) == TD_ERR_UNKNOWN_METHOD);
  CHECK(r == nullptr);
  REQUIRE(td_fuse(cfg, ds, "Vote", nullptr, nullptr, &r) == TD_OK);
  REQUIRE(td_result_num_selections(r) == 2);
  const char *obj, *attr, *val;
  double vote;
  CHECK(td_result_selection(r, 0, &obj, &attr, &val, &vote) == TD_OK);
  CHECK(std::string(obj) == "o1");
  CHECK(std::string(attr) == "price");
  CHECK(std::string(val) == "10");
  CHECK(td_result_selection(r, 5, &obj, &attr, &val, &vote) == TD_ERR_INVALID_ARGUMENT);
  double p = 0, rc = 0;
  CHECK(td_result_precision_recall(r, &p, &rc) == TD_OK);
  CHECK(p == 1.0);
  CHECK(td_result_write_selection(r, (dir / "sel.csv").string().c_str()) == TD_OK);
  CHECK(std::filesystem::exists(dir / "sel.csv"));
  td_result_destroy(r);

  td_dataset* bad = nullptr;
  CHECK(td_dataset_load(cfg, d.schema.c_str(), (dir / "missing.csv").string().c_str(), nullptr, &bad) == TD_ERR_IO);
  td_dataset_destroy(ds);
  td_config_destroy(cfg);
}

TEST_CASE("requests run pipelines") {
  const auto dir = temp_dir("capi_request");
  const auto d = write_data(dir);
  td_config* cfg = nullptr;
  REQUIRE(td_config_create(&cfg) == TD_OK);
  td_request* req = nullptr;
  REQUIRE(td_request_create(cfg, &req) == TD_OK);
  CHECK(td_request_set(req, "schema", d.schema.c_str()) == TD_OK);
  CHECK(td_request_set(req, "claims", d.claims.c_str()) == TD_OK);
  CHECK(td_request_set(req, "gold", d.gold.c_str()) == TD_OK);
  CHECK(td_request_set(req, "out", (dir / "out").string().c_str()) == TD_OK);
  CHECK(td_request_set(req, "method", "Vote") == TD_OK);
  CHECK(td_request_set(req, "method", "AccuPr") == TD_OK);
  CHECK(td_request_set(req, "colour", "red") == TD_ERR_INVALID_ARGUMENT);
  CHECK(td_request_set(req, "seed", "x") == TD_ERR_INVALID_ARGUMENT);
  CHECK(td_run(req, "compare") == TD_OK);
  CHECK(std::filesystem::exists(dir / "out" / "report.csv"));
  CHECK(td_run(req, "launch") == TD_ERR_INVALID_ARGUMENT);
  td_request_destroy(req);
  td_config_destroy(cfg);
}
