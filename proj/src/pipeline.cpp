#include "truthdisc/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <thread>

#include <boost/algorithm/string.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "csv.hpp"
#include "truthdisc/error.hpp"
#include "truthdisc/evalharness.hpp"
#include "truthdisc/metrics.hpp"
#include "truthdisc/synthetic.hpp"

namespace truthdisc {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr std::string_view kNull = "null";

std::string real(double x) { return fmt::format("{}", x); }
std::string real(const std::optional<double>& x) { return x ? real(*x) : std::string(kNull); }
json to_json(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }
double millis(std::chrono::nanoseconds ns) { return std::chrono::duration<double, std::milli>(ns).count(); }

std::string out_path(const PipelineRequest& req, std::string_view name) {
  return (fs::path(req.out_dir) / name).string();
}

void write_json(const json& doc, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << doc.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
}

// Runs task(i) for i < n on at most `workers` threads. The first failure (by
// index) is rethrown after every thread has finished.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& task) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < n;) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(std::max<std::size_t>(workers, 1), n);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

CsvOptions csv_options(const RunConfig& cfg) { return CsvOptions{cfg.delimiter}; }

std::shared_ptr<const Schema> schema_of(const PipelineRequest& req) {
  if (req.schema.empty()) throw Error(ErrorCode::InvalidArgument, "schema: a schema file is required");
  return std::make_shared<const Schema>(
      load_schema(req.schema, req.config.alpha, req.config.time_tolerance_minutes));
}

std::unique_ptr<ClaimSet> claims_of(const PipelineRequest& req, std::shared_ptr<const Schema> schema) {
  if (req.claims.empty()) throw Error(ErrorCode::InvalidArgument, "claims: a claims file is required");
  return std::make_unique<ClaimSet>(load_claims(req.claims, std::move(schema), csv_options(req.config)));
}

std::optional<GoldStandard> gold_of(const PipelineRequest& req, const ClaimSet& claims) {
  if (!req.gold.empty()) return load_gold(req.gold, claims, csv_options(req.config));
  if (req.trusted_sources.empty()) return std::nullopt;
  std::vector<SourceId> ids;
  for (const auto& s : req.trusted_sources) ids.push_back(SourceId{s});
  return majority_gold(ids, claims, req.config.gold_min_providers);
}

GoldStandard require_gold(const PipelineRequest& req, const ClaimSet& claims) {
  auto gold = gold_of(req, claims);
  if (!gold) throw Error(ErrorCode::InvalidArgument, "gold: a gold file or trusted sources are required");
  if (gold->empty()) throw Error(ErrorCode::InvalidArgument, "gold: the gold standard is empty");
  return std::move(*gold);
}

struct SnapshotData {
  std::string label;
  std::unique_ptr<ClaimSet> claims;
  GoldStandard gold;
};

std::vector<SnapshotData> load_snapshots(const PipelineRequest& req, std::shared_ptr<const Schema> schema) {
  std::vector<SnapshotData> out;
  if (req.snapshots.empty()) return out;
  const auto base = fs::path(req.snapshots).parent_path();
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? p : (base / p).string(); };
  csv::Reader in(req.snapshots, req.config.delimiter);
  const auto c_label = in.require_column("label");
  const auto c_claims = in.require_column("claims");
  const auto c_gold = in.require_column("gold");
  std::set<std::string> labels;
  std::vector<std::string> row;
  while (in.next(row)) {
    const auto width = std::max({c_label, c_claims, c_gold}) + 1;
    if (row.size() < width)
      throw Error(ErrorCode::Parse, fmt::format("{}:{}: expected {} fields", in.path(), in.line_number(), width));
    if (!labels.insert(row[c_label]).second)
      throw Error(ErrorCode::Duplicate, fmt::format("{}:{}: duplicate snapshot label '{}'", in.path(),
                                                    in.line_number(), row[c_label]));
    SnapshotData snap;
    snap.label = row[c_label];
    snap.claims = std::make_unique<ClaimSet>(
        load_claims(resolve(row[c_claims]), schema, csv_options(req.config), snap.label));
    snap.gold = load_gold(resolve(row[c_gold]), *snap.claims, csv_options(req.config));
    out.push_back(std::move(snap));
  }
  if (out.empty()) throw Error(ErrorCode::InvalidArgument, req.snapshots + ": no snapshots listed");
  return out;
}

std::vector<Snapshot> views(const std::vector<SnapshotData>& snaps) {
  std::vector<Snapshot> v;
  for (const auto& s : snaps) v.push_back({s.claims.get(), &s.gold});
  return v;
}

RunSettings settings_of(const RunConfig& cfg) { return RunSettings{cfg.fusion, cfg.copy, nullptr, nullptr}; }

void prepare_out_dir(const PipelineRequest& req) {
  std::error_code ec;
  fs::create_directories(req.out_dir, ec);
  if (ec) throw Error(ErrorCode::Io, fmt::format("cannot create {}: {}", req.out_dir, ec.message()));
}

// ---- histograms ----

std::string edge(double x) { return fmt::format("{:.6g}", x); }

// Counts per half-open bin [k*w, (k+1)*w). With `upper`, values equal to it
// land in the last bin and every bin up to it is emitted.
void write_histogram(const std::string& path, std::string_view column, std::span<const double> xs, double width,
                     std::optional<double> upper = std::nullopt) {
  std::size_t bins = upper ? static_cast<std::size_t>(std::llround(*upper / width)) : 0;
  std::vector<std::size_t> index;
  for (double x : xs) {
    auto k = static_cast<std::size_t>(std::floor(x / width + 1e-9));
    if (upper && k >= bins) k = bins - 1;
    index.push_back(k);
    bins = std::max(bins, k + 1);
  }
  std::vector<std::size_t> counts(bins, 0);
  for (auto k : index) ++counts[k];
  csv::Writer out(path);
  out.row({std::string(column) + "_lower", std::string(column) + "_upper", "count"});
  for (std::size_t k = 0; k < bins; ++k)
    out.row({edge(static_cast<double>(k) * width), edge(static_cast<double>(k + 1) * width),
             std::to_string(counts[k])});
}

std::optional<double> mean_of(std::span<const double> xs) {
  if (xs.empty()) return std::nullopt;
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

// ---- commands ----

void generate(const PipelineRequest& req) {
  if (req.synthetic_spec.empty()) throw Error(ErrorCode::InvalidArgument, "spec: a synthetic spec file is required");
  const auto spec = load_synthetic_spec(req.synthetic_spec);
  const auto data = generate_synthetic(spec, req.seed);
  prepare_out_dir(req);
  write_schema(*data.schema, out_path(req, "schema.csv"));
  write_claims(data.claims, out_path(req, "claims.csv"), csv_options(req.config));
  write_gold(data.gold, *data.schema, out_path(req, "gold.csv"));
  write_known_copiers(data.copiers, out_path(req, "copiers.csv"));
}

void profile(const PipelineRequest& req) {
  auto schema = schema_of(req);
  auto snaps = load_snapshots(req, schema);
  std::unique_ptr<ClaimSet> own_claims;
  std::optional<GoldStandard> own_gold;
  if (!req.claims.empty()) {
    own_claims = claims_of(req, schema);
    own_gold = gold_of(req, *own_claims);
  } else if (snaps.empty()) {
    throw Error(ErrorCode::InvalidArgument, "claims: a claims file or a snapshot manifest is required");
  }
  const ClaimSet& claims = own_claims ? *own_claims : *snaps.back().claims;
  const GoldStandard* gold = own_claims ? (own_gold ? &*own_gold : nullptr) : &snaps.back().gold;

  prepare_out_dir(req);
  const BucketedClaims buckets(claims, compute_tolerances(claims));
  const auto& schema_ref = claims.schema();

  std::vector<double> redundancy, entropies, dev_number, dev_time, factors, num_values;
  std::size_t conflicting = 0;
  {
    csv::Writer out(out_path(req, "items.csv"));
    out.row({"object", "attribute", "providers", "redundancy", "num_values", "entropy", "deviation", "dominant",
             "dominance_factor", "runner_up"});
    for (std::size_t d = 0; d < claims.items().size(); ++d) {
      const auto p = profile_item(buckets, d);
      const auto& attr = schema_ref.at(p.item.attribute);
      const double r = item_redundancy(claims, p.item);
      std::vector<std::string> others;
      for (const auto& v : p.runner_up) others.push_back(v.to_string());
      out.row({p.item.object, attr.name, std::to_string(p.num_providers), real(r), std::to_string(p.num_values),
               real(p.entropy), real(p.deviation), p.dominant.to_string(), real(p.dominance_factor),
               boost::join(others, ";")});
      redundancy.push_back(r);
      entropies.push_back(p.entropy);
      factors.push_back(p.dominance_factor);
      num_values.push_back(static_cast<double>(p.num_values));
      if (p.num_values > 1) ++conflicting;
      if (p.deviation) (attr.kind == ValueKind::TimeOfDay ? dev_time : dev_number).push_back(*p.deviation);
    }
  }

  std::vector<Snapshot> series = views(snaps);
  if (own_claims && gold) series.push_back({own_claims.get(), gold});
  std::vector<double> accuracies;
  {
    std::vector<std::string> header = {"source", "claims", "accuracy", "coverage", "accuracy_deviation"};
    for (const auto& s : snaps) header.push_back("accuracy_" + s.label);
    csv::Writer out(out_path(req, "sources.csv"));
    out.row(header);
    std::map<SourceId, SourceProfile> by_id;
    if (!series.empty())
      for (auto& p : profile_sources(series)) by_id.emplace(p.source, std::move(p));
    for (std::size_t s = 0; s < claims.sources().size(); ++s) {
      const auto& id = claims.sources()[s];
      std::vector<std::string> row = {id.value, std::to_string(claims.source_claims(s).size())};
      auto it = by_id.find(id);
      if (it == by_id.end()) {
        row.insert(row.end(), {std::string(kNull), std::string(kNull), std::string(kNull)});
        for (std::size_t t = 0; t < snaps.size(); ++t) row.emplace_back(kNull);
      } else {
        const auto& p = it->second;
        row.push_back(real(p.accuracy));
        row.push_back(real(p.coverage));
        row.push_back(real(p.accuracy_deviation));
        for (std::size_t t = 0; t < snaps.size(); ++t) row.push_back(real(p.accuracy_series[t]));
        if (p.accuracy) accuracies.push_back(*p.accuracy);
      }
      out.row(row);
    }
  }

  std::map<std::string, double> object_red;
  for (const auto& key : claims.items())
    if (!object_red.count(key.object)) object_red[key.object] = object_redundancy(claims, key.object);
  std::vector<double> obj_red;
  for (const auto& [o, r] : object_red) obj_red.push_back(r);

  std::size_t max_values = 0;
  for (double n : num_values) max_values = std::max(max_values, static_cast<std::size_t>(n));
  {
    std::vector<std::size_t> counts(max_values + 1, 0);
    for (double n : num_values) ++counts[static_cast<std::size_t>(n)];
    csv::Writer out(out_path(req, "hist_num_values.csv"));
    out.row({"num_values", "count"});
    for (std::size_t k = 1; k <= max_values; ++k) out.row({std::to_string(k), std::to_string(counts[k])});
  }
  write_histogram(out_path(req, "hist_item_redundancy.csv"), "redundancy", redundancy, 0.1, 1.0);
  write_histogram(out_path(req, "hist_object_redundancy.csv"), "redundancy", obj_red, 0.1, 1.0);
  write_histogram(out_path(req, "hist_entropy.csv"), "entropy", entropies, 0.1);
  write_histogram(out_path(req, "hist_deviation_number.csv"), "deviation", dev_number, 0.01);
  write_histogram(out_path(req, "hist_deviation_time.csv"), "deviation_minutes", dev_time, 5.0);
  write_histogram(out_path(req, "hist_dominance.csv"), "dominance", factors, req.config.dominance_width, 1.0);
  write_histogram(out_path(req, "hist_accuracy.csv"), "accuracy", accuracies, 0.1, 1.0);

  json summary;
  summary["snapshot"] = claims.snapshot_label();
  summary["claims"] = claims.claims().size();
  summary["sources"] = claims.sources().size();
  summary["objects"] = object_red.size();
  summary["items"] = claims.items().size();
  summary["conflicting_items"] = conflicting;
  summary["mean_item_redundancy"] = to_json(mean_of(redundancy));
  summary["mean_object_redundancy"] = to_json(mean_of(obj_red));
  summary["mean_entropy"] = to_json(mean_of(entropies));
  summary["mean_deviation_number"] = to_json(mean_of(dev_number));
  summary["mean_deviation_time_minutes"] = to_json(mean_of(dev_time));
  summary["mean_dominance_factor"] = to_json(mean_of(factors));
  summary["gold_items"] = gold ? json(gold->size()) : json(nullptr);
  summary["precision_of_dominant"] =
      gold && !gold->empty() ? json(precision_of_dominant(buckets, *gold)) : json(nullptr);
  summary["mean_source_accuracy"] = to_json(mean_of(accuracies));
  write_json(summary, out_path(req, "summary.json"));
}

MethodSpec first_method(const PipelineRequest& req) {
  if (req.methods.empty()) throw Error(ErrorCode::InvalidArgument, "method: a fusion method is required");
  return parse_method(req.methods.front());
}

std::optional<TrustMap> input_trust_of(const PipelineRequest& req) {
  if (req.input_trust.empty()) return std::nullopt;
  return load_trust(req.input_trust, req.config.delimiter);
}

std::optional<KnownCopiers> known_of(const PipelineRequest& req) {
  if (req.known_copiers.empty()) return std::nullopt;
  return load_known_copiers(req.known_copiers, req.config.delimiter);
}

void fuse(const PipelineRequest& req) {
  const auto method = first_method(req);
  auto claims = claims_of(req, schema_of(req));
  const auto gold = gold_of(req, *claims);
  const auto trust = input_trust_of(req);
  const auto known = known_of(req);
  prepare_out_dir(req);

  const BucketedClaims buckets(*claims, compute_tolerances(*claims));
  auto settings = settings_of(req.config);
  settings.input_trust = trust ? &*trust : nullptr;
  settings.known_copiers = known ? &*known : nullptr;
  const auto result = run_method(method, buckets, settings);

  write_selection(result, buckets, out_path(req, "selection.csv"));
  write_trust(result.trust, out_path(req, "trust.csv"));
  write_convergence_log(result, out_path(req, "convergence.csv"));
  json run;
  run["method"] = method_name(method);
  run["trust_input"] = trust ? "file" : "default";
  run["items"] = result.selections.size();
  run["rounds"] = result.rounds_used;
  run["converged"] = result.converged;
  run["ties"] = result.ties;
  if (gold && !gold->empty()) {
    const auto pr = precision_recall(result.selections, buckets, *gold);
    run["precision"] = pr.precision;
    run["recall"] = pr.recall;
  }
  run["wall_time_ms"] = millis(result.wall_time);
  write_json(run, out_path(req, "run.json"));
}

struct NamedGroup {
  std::string remarks;
  std::vector<SourceId> members;
};

std::vector<NamedGroup> load_groups(const std::string& path, char delimiter) {
  csv::Reader in(path, delimiter);
  const auto c_remarks = in.require_column("remarks");
  const auto c_members = in.require_column("members");
  std::vector<NamedGroup> out;
  std::vector<std::string> row;
  while (in.next(row)) {
    if (row.size() <= std::max(c_remarks, c_members))
      throw Error(ErrorCode::Parse, fmt::format("{}:{}: missing fields", path, in.line_number()));
    NamedGroup g{row[c_remarks], {}};
    std::vector<std::string> ids;
    boost::split(ids, row[c_members], boost::is_any_of(";"));
    for (auto& id : ids) {
      boost::trim(id);
      if (!id.empty()) g.members.push_back(SourceId{id});
    }
    if (g.members.empty())
      throw Error(ErrorCode::Parse, fmt::format("{}:{}: group has no members", path, in.line_number()));
    out.push_back(std::move(g));
  }
  return out;
}

void copydetect(const PipelineRequest& req) {
  auto claims = claims_of(req, schema_of(req));
  const auto gold = gold_of(req, *claims);
  const auto trust = input_trust_of(req);
  const auto known = known_of(req);
  std::vector<NamedGroup> groups;
  if (!req.groups.empty()) groups = load_groups(req.groups, req.config.delimiter);
  prepare_out_dir(req);

  const BucketedClaims buckets(*claims, compute_tolerances(*claims));
  const auto result = run_accucopy(buckets, req.config.fusion, req.config.copy, false, trust ? &*trust : nullptr,
                                   known ? &*known : nullptr);
  write_copy_pairs(copy_pairs(result.copies, *claims, -1.0), out_path(req, "pairs.csv"));

  if (req.groups.empty()) {
    std::size_t k = 0;
    for (auto& g : copy_groups(result.copies, *claims, req.config.copy_group_threshold))
      groups.push_back({fmt::format("detected-{}", ++k), std::move(g)});
  }
  const GoldStandard no_gold;
  csv::Writer out(out_path(req, "groups.csv"));
  out.row({"remarks", "size", "schema_sim", "object_sim", "value_sim", "avg_accuracy", "members", "warnings"});
  for (const auto& g : groups) {
    const auto c = group_commonality(g.members, *claims, gold ? *gold : no_gold, buckets.tolerances());
    std::vector<std::string> ids;
    for (const auto& m : g.members) ids.push_back(m.value);
    out.row({g.remarks, std::to_string(c.size), real(c.schema_sim), real(c.object_sim), real(c.value_sim),
             real(c.avg_accuracy), boost::join(ids, ";"), boost::join(c.warnings, "; ")});
  }
}

struct ReportRow {
  std::string trust_input;
  EvalReport report;
};

ReportRow evaluate_one(const MethodSpec& method, bool sampled, const TrustMap* file_trust,
                       const BucketedClaims& buckets, const GoldStandard& gold, const RunConfig& cfg,
                       const KnownCopiers* known, FusionResult* result_out = nullptr) {
  auto settings = settings_of(cfg);
  settings.known_copiers = known;
  TrustMap trust;
  std::string label = "default";
  if (sampled) {
    trust = sample_trust(method, buckets, gold, cfg.fusion);
    settings.input_trust = &trust;
    label = "sampled";
  } else if (file_trust) {
    settings.input_trust = file_trust;
    label = "file";
  }
  return {label, timed_run(method, buckets, gold, settings, result_out)};
}

void write_reports(const PipelineRequest& req, std::span<const ReportRow> rows) {
  {
    csv::Writer out(out_path(req, "report.csv"));
    out.row({"method", "trust_input", "precision", "recall", "trust_deviation", "trust_difference", "rounds",
             "converged", "ties"});
    for (const auto& [label, r] : rows)
      out.row({method_name(r.method), label, real(r.precision), real(r.recall), real(r.trust_deviation),
               real(r.trust_difference), std::to_string(r.rounds), r.converged ? "true" : "false",
               std::to_string(r.ties)});
  }
  {
    csv::Writer out(out_path(req, "timings.csv"));
    out.row({"method", "trust_input", "wall_time_ms"});
    for (const auto& [label, r] : rows) out.row({method_name(r.method), label, real(millis(r.wall_time))});
  }
  json doc = json::array();
  for (const auto& [label, r] : rows) {
    json o;
    o["method"] = method_name(r.method);
    o["trust_input"] = label;
    o["precision"] = r.precision;
    o["recall"] = r.recall;
    o["trust_deviation"] = to_json(r.trust_deviation);
    o["trust_difference"] = to_json(r.trust_difference);
    o["rounds"] = r.rounds;
    o["converged"] = r.converged;
    o["ties"] = r.ties;
    o["wall_time_ms"] = millis(r.wall_time);
    doc.push_back(std::move(o));
  }
  write_json(doc, out_path(req, "report.json"));
}

void write_series(const PipelineRequest& req, std::span<const MethodSpec> methods,
                  const std::vector<std::vector<double>>& precisions, const std::vector<SnapshotData>& snaps) {
  csv::Writer summary(out_path(req, "series.csv"));
  summary.row({"method", "average", "minimum", "stddev"});
  csv::Writer points(out_path(req, "series_points.csv"));
  points.row({"method", "snapshot", "precision"});
  for (std::size_t m = 0; m < methods.size(); ++m) {
    const auto s = time_series_summary(precisions[m]);
    const auto name = method_name(methods[m]);
    summary.row({name, real(s.average), real(s.minimum), real(s.stddev)});
    for (std::size_t t = 0; t < snaps.size(); ++t) points.row({name, snaps[t].label, real(precisions[m][t])});
  }
}

void evaluate(const PipelineRequest& req) {
  const auto method = first_method(req);
  auto schema = schema_of(req);
  auto claims = claims_of(req, schema);
  const auto gold = require_gold(req, *claims);
  const auto trust = input_trust_of(req);
  const auto known = known_of(req);
  const auto snaps = load_snapshots(req, schema);
  prepare_out_dir(req);

  const BucketedClaims buckets(*claims, compute_tolerances(*claims));
  const RunConfig& cfg = req.config;
  const KnownCopiers* known_ptr = known ? &*known : nullptr;
  const std::size_t n_rows = req.sampled_trust ? 2 : 1;

  std::vector<ReportRow> rows(n_rows);
  FusionResult main_result, vote_result;
  std::vector<CurvePoint> curve;
  std::vector<std::vector<double>> series(1);
  // tasks: report rows, the Vote baseline, the incremental curve, snapshots
  parallel_for(n_rows + 2 + (snaps.empty() ? 0 : 1), cfg.workers, [&](std::size_t i) {
    if (i < n_rows) {
      rows[i] = evaluate_one(method, i == 1, trust ? &*trust : nullptr, buckets, gold, cfg, known_ptr,
                             i == 0 ? &main_result : nullptr);
    } else if (i == n_rows) {
      vote_result = run_method(MethodSpec{Method::Vote, false}, buckets, settings_of(cfg));
    } else if (i == n_rows + 1) {
      auto settings = settings_of(cfg);
      settings.known_copiers = known_ptr;
      curve = incremental_curve(method, *claims, gold, settings);
    } else {
      auto settings = settings_of(cfg);
      settings.known_copiers = known_ptr;
      series[0] = snapshot_precisions(method, views(snaps), settings);
    }
  });

  write_reports(req, rows);
  write_selection(main_result, buckets, out_path(req, "selection.csv"));
  {
    csv::Writer out(out_path(req, "curve.csv"));
    out.row({"k", "recall", "precision", "added_source"});
    for (const auto& p : curve) out.row({std::to_string(p.k), real(p.recall), real(p.precision), p.added_source.value});
  }
  {
    csv::Writer out(out_path(req, "dominance.csv"));
    out.row({"lower", "upper", "count", "method_precision", "vote_precision"});
    for (const auto& r : precision_by_dominance(main_result.selections, vote_result.selections, buckets, gold,
                                                cfg.dominance_width))
      out.row({edge(r.lower), edge(r.upper), std::to_string(r.count), real(r.method_precision),
               real(r.vote_precision)});
  }
  if (!snaps.empty()) write_series(req, std::span(&method, 1), series, snaps);
}

void compare(const PipelineRequest& req) {
  std::vector<MethodSpec> methods;
  for (const auto& name : req.methods.empty() ? method_names() : req.methods) methods.push_back(parse_method(name));
  auto schema = schema_of(req);
  auto claims = claims_of(req, schema);
  const auto gold = require_gold(req, *claims);
  const auto trust = input_trust_of(req);
  const auto known = known_of(req);
  const auto snaps = load_snapshots(req, schema);
  prepare_out_dir(req);

  const BucketedClaims buckets(*claims, compute_tolerances(*claims));
  const RunConfig& cfg = req.config;
  const KnownCopiers* known_ptr = known ? &*known : nullptr;
  const std::size_t per_method = req.sampled_trust ? 2 : 1;
  const std::size_t n_rows = methods.size() * per_method;
  const std::size_t n_series = snaps.empty() ? 0 : methods.size();

  std::vector<ReportRow> rows(n_rows);
  std::vector<std::vector<double>> series(n_series);
  parallel_for(n_rows + n_series, cfg.workers, [&](std::size_t i) {
    if (i < n_rows) {
      rows[i] = evaluate_one(methods[i / per_method], i % per_method == 1, trust ? &*trust : nullptr, buckets, gold,
                             cfg, known_ptr);
    } else {
      auto settings = settings_of(cfg);
      settings.known_copiers = known_ptr;
      series[i - n_rows] = snapshot_precisions(methods[i - n_rows], views(snaps), settings);
    }
  });
  write_reports(req, rows);
  if (!snaps.empty()) write_series(req, methods, series, snaps);
}

}  // namespace

Command parse_command(std::string_view name) {
  static const std::map<std::string, Command, std::less<>> table = {
      {"generate", Command::Generate}, {"profile", Command::Profile},   {"fuse", Command::Fuse},
      {"copydetect", Command::CopyDetect}, {"evaluate", Command::Evaluate}, {"compare", Command::Compare}};
  auto it = table.find(name);
  if (it == table.end())
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("unknown command '{}' (generate, profile, fuse, copydetect, evaluate, compare)", name));
  return it->second;
}

std::string_view to_string(Command command) {
  switch (command) {
    case Command::Generate: return "generate";
    case Command::Profile: return "profile";
    case Command::Fuse: return "fuse";
    case Command::CopyDetect: return "copydetect";
    case Command::Evaluate: return "evaluate";
    case Command::Compare: return "compare";
  }
  return "?";
}

void run_pipeline(Command command, const PipelineRequest& request) {
  request.config.validate();
  switch (command) {
    case Command::Generate: return generate(request);
    case Command::Profile: return profile(request);
    case Command::Fuse: return fuse(request);
    case Command::CopyDetect: return copydetect(request);
    case Command::Evaluate: return evaluate(request);
    case Command::Compare: return compare(request);
  }
}

}  // namespace truthdisc
