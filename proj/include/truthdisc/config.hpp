#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "truthdisc/copydetect.hpp"
#include "truthdisc/fusion.hpp"

namespace truthdisc {

/// All tunables of a run. Every field is addressable as `section.key` in the
/// config file, as TRUTHDISC_SECTION_KEY in the environment and through
/// set(). Precedence: defaults < file < environment < explicit set().
struct RunConfig {
  double alpha = 0.01;
  double time_tolerance_minutes = 10.0;
  FusionConfig fusion;
  CopyParams copy;
  std::size_t workers = 1;
  char delimiter = ',';
  double dominance_width = 0.1;
  double copy_group_threshold = 0.5;
  std::size_t gold_min_providers = 1;

  /// Throws Error(InvalidArgument) naming the offending key.
  void set(std::string_view key, std::string_view value);
  std::string get(std::string_view key) const;
  /// Every `section.key`, in file order.
  static std::vector<std::string> keys();

  void load_file(const std::string& path);
  /// Applies TRUTHDISC_* variables from the process environment.
  void apply_env();
  void save(const std::string& path) const;
  void validate() const;
};

}  // namespace truthdisc
