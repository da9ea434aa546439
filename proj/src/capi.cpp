#include "truthdisc/truthdisc.h"

#include <charconv>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "truthdisc/config.hpp"
#include "truthdisc/error.hpp"
#include "truthdisc/evalharness.hpp"
#include "truthdisc/metrics.hpp"
#include "truthdisc/pipeline.hpp"

using namespace truthdisc;

struct td_config {
  RunConfig cfg;
};

struct td_dataset {
  std::shared_ptr<const Schema> schema;
  std::unique_ptr<ClaimSet> claims;
  std::optional<GoldStandard> gold;
  std::unique_ptr<BucketedClaims> buckets;
};

struct td_result {
  const td_dataset* dataset;
  FusionResult result;
  std::vector<std::string> objects, attributes, values;
};

struct td_request {
  PipelineRequest req;
};

namespace {

thread_local std::string last_error;

td_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return TD_ERR_INVALID_ARGUMENT;
    case ErrorCode::Io: return TD_ERR_IO;
    case ErrorCode::Parse: return TD_ERR_PARSE;
    case ErrorCode::Duplicate: return TD_ERR_DUPLICATE;
    case ErrorCode::UnknownAttribute: return TD_ERR_UNKNOWN_ATTRIBUTE;
    case ErrorCode::UnknownMethod: return TD_ERR_UNKNOWN_METHOD;
    case ErrorCode::Undefined: return TD_ERR_UNDEFINED;
    case ErrorCode::Infeasible: return TD_ERR_INFEASIBLE;
  }
  return TD_ERR_INTERNAL;
}

template <typename F>
td_status guard(F&& body) {
  try {
    body();
    last_error.clear();
    return TD_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return TD_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return TD_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) throw Error(ErrorCode::InvalidArgument, std::string(what) + " must not be NULL");
}

bool given(const char* s) { return s && *s; }

}  // namespace

extern "C" {

const char* td_version(void) { return "1.0.0"; }

const char* td_status_name(td_status status) {
  switch (status) {
    case TD_OK: return "ok";
    case TD_ERR_INVALID_ARGUMENT: return "invalid argument";
    case TD_ERR_IO: return "i/o error";
    case TD_ERR_PARSE: return "parse error";
    case TD_ERR_DUPLICATE: return "duplicate";
    case TD_ERR_UNKNOWN_ATTRIBUTE: return "unknown attribute";
    case TD_ERR_UNKNOWN_METHOD: return "unknown method";
    case TD_ERR_UNDEFINED: return "undefined";
    case TD_ERR_INFEASIBLE: return "infeasible";
    case TD_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* td_last_error(void) { return last_error.c_str(); }

td_status td_config_create(td_config** out) {
  return guard([&] {
    need(out, "out");
    *out = new td_config{};
  });
}

void td_config_destroy(td_config* config) { delete config; }

td_status td_config_load(td_config* config, const char* path) {
  return guard([&] {
    need(config, "config");
    need(path, "path");
    config->cfg.load_file(path);
  });
}

td_status td_config_apply_env(td_config* config) {
  return guard([&] {
    need(config, "config");
    config->cfg.apply_env();
  });
}

td_status td_config_set(td_config* config, const char* key, const char* value) {
  return guard([&] {
    need(config, "config");
    need(key, "key");
    need(value, "value");
    RunConfig next = config->cfg;
    next.set(key, value);
    next.validate();
    config->cfg = next;
  });
}

td_status td_config_get(const td_config* config, const char* key, char* buf, size_t cap, size_t* needed) {
  return guard([&] {
    need(config, "config");
    need(key, "key");
    const auto v = config->cfg.get(key);
    if (needed) *needed = v.size() + 1;
    if (buf && cap > v.size()) std::memcpy(buf, v.c_str(), v.size() + 1);
    else if (buf && cap > 0) buf[0] = '\0';
  });
}

td_status td_config_save(const td_config* config, const char* path) {
  return guard([&] {
    need(config, "config");
    need(path, "path");
    config->cfg.save(path);
  });
}

size_t td_config_key_count(void) { return RunConfig::keys().size(); }

const char* td_config_key(size_t index) {
  static const std::vector<std::string> keys = RunConfig::keys();
  return index < keys.size() ? keys[index].c_str() : nullptr;
}

td_status td_dataset_load(const td_config* config, const char* schema_path, const char* claims_path,
                          const char* gold_path, td_dataset** out) {
  return guard([&] {
    need(config, "config");
    need(schema_path, "schema_path");
    need(claims_path, "claims_path");
    need(out, "out");
    const auto& cfg = config->cfg;
    auto d = std::make_unique<td_dataset>();
    d->schema = std::make_shared<const Schema>(load_schema(schema_path, cfg.alpha, cfg.time_tolerance_minutes));
    d->claims = std::make_unique<ClaimSet>(load_claims(claims_path, d->schema, CsvOptions{cfg.delimiter}));
    if (given(gold_path)) d->gold = load_gold(gold_path, *d->claims, CsvOptions{cfg.delimiter});
    d->buckets = std::make_unique<BucketedClaims>(*d->claims, compute_tolerances(*d->claims));
    *out = d.release();
  });
}

void td_dataset_destroy(td_dataset* dataset) { delete dataset; }

size_t td_dataset_num_claims(const td_dataset* d) { return d ? d->claims->claims().size() : 0; }
size_t td_dataset_num_sources(const td_dataset* d) { return d ? d->claims->sources().size() : 0; }
size_t td_dataset_num_items(const td_dataset* d) { return d ? d->claims->items().size() : 0; }
size_t td_dataset_gold_size(const td_dataset* d) { return d && d->gold ? d->gold->size() : 0; }

td_status td_dataset_precision_of_dominant(const td_dataset* d, double* out) {
  return guard([&] {
    need(d, "dataset");
    need(out, "out");
    if (!d->gold || d->gold->empty()) throw Error(ErrorCode::InvalidArgument, "dataset has no gold standard");
    *out = precision_of_dominant(*d->buckets, *d->gold);
  });
}

td_status td_fuse(const td_config* config, const td_dataset* dataset, const char* method, const char* trust_path,
                  const char* copiers_path, td_result** out) {
  return guard([&] {
    need(config, "config");
    need(dataset, "dataset");
    need(method, "method");
    need(out, "out");
    const auto& cfg = config->cfg;
    const auto spec = parse_method(method);
    std::optional<TrustMap> trust;
    std::optional<KnownCopiers> known;
    if (given(trust_path)) trust = load_trust(trust_path, cfg.delimiter);
    if (given(copiers_path)) known = load_known_copiers(copiers_path, cfg.delimiter);
    RunSettings settings{cfg.fusion, cfg.copy, trust ? &*trust : nullptr, known ? &*known : nullptr};
    auto r = std::make_unique<td_result>();
    r->dataset = dataset;
    r->result = run_method(spec, *dataset->buckets, settings);
    const auto& claims = *dataset->claims;
    for (const auto& s : r->result.selections) {
      const auto& key = claims.items()[s.item];
      r->objects.push_back(key.object);
      r->attributes.push_back(claims.schema().at(key.attribute).name);
      r->values.push_back(s.selected.to_string());
    }
    *out = r.release();
  });
}

void td_result_destroy(td_result* result) { delete result; }

size_t td_result_rounds(const td_result* r) { return r ? r->result.rounds_used : 0; }
int td_result_converged(const td_result* r) { return r && r->result.converged ? 1 : 0; }
size_t td_result_ties(const td_result* r) { return r ? r->result.ties : 0; }
double td_result_wall_time_ms(const td_result* r) {
  return r ? std::chrono::duration<double, std::milli>(r->result.wall_time).count() : 0.0;
}
size_t td_result_num_selections(const td_result* r) { return r ? r->result.selections.size() : 0; }

td_status td_result_selection(const td_result* r, size_t index, const char** object, const char** attribute,
                              const char** value, double* vote) {
  return guard([&] {
    need(r, "result");
    if (index >= r->result.selections.size()) throw Error(ErrorCode::InvalidArgument, "selection index out of range");
    if (object) *object = r->objects[index].c_str();
    if (attribute) *attribute = r->attributes[index].c_str();
    if (value) *value = r->values[index].c_str();
    if (vote) *vote = r->result.selections[index].vote;
  });
}

td_status td_result_precision_recall(const td_result* r, double* precision, double* recall) {
  return guard([&] {
    need(r, "result");
    const auto& d = *r->dataset;
    if (!d.gold || d.gold->empty()) throw Error(ErrorCode::InvalidArgument, "dataset has no gold standard");
    const auto pr = truthdisc::precision_recall(r->result.selections, *d.buckets, *d.gold);
    if (precision) *precision = pr.precision;
    if (recall) *recall = pr.recall;
  });
}

td_status td_result_write_selection(const td_result* r, const char* path) {
  return guard([&] {
    need(r, "result");
    need(path, "path");
    write_selection(r->result, *r->dataset->buckets, path);
  });
}

td_status td_result_write_trust(const td_result* r, const char* path) {
  return guard([&] {
    need(r, "result");
    need(path, "path");
    write_trust(r->result.trust, path);
  });
}

td_status td_result_write_convergence(const td_result* r, const char* path) {
  return guard([&] {
    need(r, "result");
    need(path, "path");
    write_convergence_log(r->result, path);
  });
}

td_status td_request_create(const td_config* config, td_request** out) {
  return guard([&] {
    need(config, "config");
    need(out, "out");
    auto r = std::make_unique<td_request>();
    r->req.config = config->cfg;
    *out = r.release();
  });
}

void td_request_destroy(td_request* request) { delete request; }

td_status td_request_set(td_request* request, const char* key, const char* value) {
  return guard([&] {
    need(request, "request");
    need(key, "key");
    need(value, "value");
    auto& r = request->req;
    const std::string k = key;
    const std::string v = value;
    if (k == "schema") r.schema = v;
    else if (k == "claims") r.claims = v;
    else if (k == "gold") r.gold = v;
    else if (k == "snapshots") r.snapshots = v;
    else if (k == "trust") r.input_trust = v;
    else if (k == "copiers") r.known_copiers = v;
    else if (k == "groups") r.groups = v;
    else if (k == "spec") r.synthetic_spec = v;
    else if (k == "out") r.out_dir = v;
    else if (k == "method") r.methods.push_back(v);
    else if (k == "trusted") r.trusted_sources.push_back(v);
    else if (k == "sampled") {
      if (v != "0" && v != "1") throw Error(ErrorCode::InvalidArgument, "sampled must be 0 or 1");
      r.sampled_trust = v == "1";
    } else if (k == "seed") {
      std::uint64_t seed = 0;
      const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), seed);
      if (v.empty() || ec != std::errc() || p != v.data() + v.size())
        throw Error(ErrorCode::InvalidArgument, "seed: '" + v + "' is not a non-negative integer");
      r.seed = seed;
    } else {
      throw Error(ErrorCode::InvalidArgument, "unknown request key '" + k + "'");
    }
  });
}

td_status td_run(const td_request* request, const char* command) {
  return guard([&] {
    need(request, "request");
    need(command, "command");
    run_pipeline(parse_command(command), request->req);
  });
}

size_t td_method_count(void) { return method_names().size(); }

const char* td_method_name(size_t index) {
  static const std::vector<std::string> names = method_names();
  return index < names.size() ? names[index].c_str() : nullptr;
}

}  // extern "C"
