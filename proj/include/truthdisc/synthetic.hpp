#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "truthdisc/copydetect.hpp"
#include "truthdisc/model.hpp"

namespace truthdisc {

struct SyntheticSource {
  std::string id;
  double accuracy = 0.8;
  double coverage = 1.0;
};

/// Members copy `rate` of the original's items verbatim (errors included).
struct CopierGroup {
  std::string name;
  std::string original;
  std::vector<std::string> members;
  double rate = 1.0;
  /// Target accuracy of each member; without it the members' own claims use
  /// the original's accuracy.
  std::optional<double> accuracy;
};

struct SyntheticSpec {
  std::vector<AttributeSpec> attributes;  // defaults to one number attribute
  std::size_t objects = 500;
  std::size_t false_values = 5;
  std::vector<SyntheticSource> sources;
  std::vector<CopierGroup> copiers;

  void validate() const;
};

/// INI form: [dataset] objects/false_values, [attribute:NAME] kind,
/// [source:ID] accuracy/coverage, [copiers:NAME] original/members/rate/accuracy.
SyntheticSpec load_synthetic_spec(const std::string& path);

struct SyntheticData {
  std::shared_ptr<const Schema> schema;
  ClaimSet claims;
  GoldStandard gold;
  KnownCopiers copiers;
};

/// Deterministic for a given spec and seed. Each independent source answers
/// exactly round(accuracy * covered) of its covered items correctly.
/// Throws Error(Infeasible) when a copier's accuracy target cannot be met.
SyntheticData generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

void write_known_copiers(const KnownCopiers& copiers, const std::string& path);

}  // namespace truthdisc
