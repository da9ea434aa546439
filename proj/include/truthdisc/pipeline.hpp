#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "truthdisc/config.hpp"

namespace truthdisc {

enum class Command { Generate, Profile, Fuse, CopyDetect, Evaluate, Compare };

Command parse_command(std::string_view name);
std::string_view to_string(Command command);

/// Inputs of every subcommand; each command reads the fields it needs.
struct PipelineRequest {
  RunConfig config;
  std::string schema;
  std::string claims;
  std::string gold;
  /// Delimited `label,claims,gold`; relative paths resolve against the
  /// manifest's directory.
  std::string snapshots;
  /// When no gold file is given, gold is the majority of these sources.
  std::vector<std::string> trusted_sources;
  std::string input_trust;
  std::string known_copiers;
  /// Delimited `remarks,members` with members separated by ';'.
  std::string groups;
  std::string synthetic_spec;
  std::uint64_t seed = 1;
  /// fuse and evaluate use the first entry; compare defaults to every method.
  std::vector<std::string> methods;
  /// evaluate/compare: also run every method with its sampled trust as input.
  bool sampled_trust = false;
  std::string out_dir = ".";
};

/// Runs one subcommand and writes its artifacts under `out_dir`. Throws
/// truthdisc::Error on any failure.
///
///   generate    claims.csv gold.csv schema.csv copiers.csv
///   profile     items.csv sources.csv hist_*.csv summary.json
///   fuse        selection.csv trust.csv convergence.csv run.json
///   copydetect  pairs.csv groups.csv
///   evaluate    report.csv report.json timings.csv curve.csv dominance.csv
///               selection.csv [series.csv]
///   compare     report.csv report.json timings.csv [series.csv]
///
/// Everything except timings.csv and the wall_time_ms fields of the JSON
/// files is byte-identical across runs on identical inputs.
void run_pipeline(Command command, const PipelineRequest& request);

}  // namespace truthdisc
