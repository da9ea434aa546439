#include "truthdisc/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "truthdisc/error.hpp"

namespace truthdisc {

namespace {

struct Field {
  std::string_view key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, std::string_view)> set;
};

double parse_real(std::string_view key, std::string_view text) {
  std::string s(text);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v))
    throw Error(ErrorCode::InvalidArgument, fmt::format("{}: '{}' is not a number", key, text));
  return v;
}

std::size_t parse_count(std::string_view key, std::string_view text) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size())
    throw Error(ErrorCode::InvalidArgument, fmt::format("{}: '{}' is not a non-negative integer", key, text));
  return v;
}

template <typename T>
Field real(std::string_view key, T RunConfig::*group, double T::*member) {
  return {key, [=](const RunConfig& c) { return fmt::format("{}", (c.*group).*member); },
          [=](RunConfig& c, std::string_view v) { (c.*group).*member = parse_real(key, v); }};
}

Field real(std::string_view key, double RunConfig::*member) {
  return {key, [=](const RunConfig& c) { return fmt::format("{}", c.*member); },
          [=](RunConfig& c, std::string_view v) { c.*member = parse_real(key, v); }};
}

Field count(std::string_view key, std::size_t RunConfig::*member) {
  return {key, [=](const RunConfig& c) { return std::to_string(c.*member); },
          [=](RunConfig& c, std::string_view v) { c.*member = parse_count(key, v); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    using F = FusionConfig;
    std::vector<Field> t;
    t.push_back(real("tolerance.alpha", &RunConfig::alpha));
    t.push_back(real("tolerance.time_minutes", &RunConfig::time_tolerance_minutes));
    t.push_back({"similarity.decay_width",
                 [](const RunConfig& c) { return fmt::format("{}", c.fusion.similarity.decay_width_multiplier); },
                 [](RunConfig& c, std::string_view v) {
                   c.fusion.similarity.decay_width_multiplier = parse_real("similarity.decay_width", v);
                 }});
    t.push_back({"similarity.time_zero_at",
                 [](const RunConfig& c) { return fmt::format("{}", c.fusion.similarity.time_zero_at); },
                 [](RunConfig& c, std::string_view v) {
                   c.fusion.similarity.time_zero_at = parse_real("similarity.time_zero_at", v);
                 }});
    t.push_back({"similarity.rho", [](const RunConfig& c) { return fmt::format("{}", c.fusion.similarity.rho); },
                 [](RunConfig& c, std::string_view v) { c.fusion.similarity.rho = parse_real("similarity.rho", v); }});
    t.push_back(real("fusion.epsilon", &RunConfig::fusion, &F::epsilon));
    t.push_back({"fusion.max_rounds", [](const RunConfig& c) { return std::to_string(c.fusion.max_rounds); },
                 [](RunConfig& c, std::string_view v) { c.fusion.max_rounds = parse_count("fusion.max_rounds", v); }});
    t.push_back(real("fusion.eps_cap", &RunConfig::fusion, &F::eps_cap));
    t.push_back(real("fusion.n_false", &RunConfig::fusion, &F::n_false));
    t.push_back(real("fusion.format_weight", &RunConfig::fusion, &F::format_weight));
    t.push_back(real("fusion.invest_exponent", &RunConfig::fusion, &F::invest_exponent));
    t.push_back(real("fusion.pooled_exponent", &RunConfig::fusion, &F::pooled_exponent));
    t.push_back(real("fusion.cosine_damping", &RunConfig::fusion, &F::cosine_damping));
    t.push_back(real("fusion.cosine_power", &RunConfig::fusion, &F::cosine_power));
    t.push_back(real("fusion.truthfinder_gamma", &RunConfig::fusion, &F::truthfinder_gamma));
    t.push_back(real("fusion.init_vote_hub", &RunConfig::fusion, &F::init_vote_hub));
    t.push_back(real("fusion.init_trust_cosine", &RunConfig::fusion, &F::init_trust_cosine));
    t.push_back(real("fusion.init_trust_estimates", &RunConfig::fusion, &F::init_trust_estimates));
    t.push_back(real("fusion.init_value_trust", &RunConfig::fusion, &F::init_value_trust));
    t.push_back(real("fusion.init_trust_bayes", &RunConfig::fusion, &F::init_trust_bayes));
    t.push_back({"fusion.min_attribute_observations",
                 [](const RunConfig& c) { return std::to_string(c.fusion.min_attribute_observations); },
                 [](RunConfig& c, std::string_view v) {
                   c.fusion.min_attribute_observations = parse_count("fusion.min_attribute_observations", v);
                 }});
    t.push_back(real("copy.prior_copy_prob", &RunConfig::copy, &CopyParams::prior_copy_prob));
    t.push_back(real("copy.copy_rate", &RunConfig::copy, &CopyParams::copy_rate));
    t.push_back(count("run.workers", &RunConfig::workers));
    t.push_back({"run.delimiter",
                 [](const RunConfig& c) { return c.delimiter == '\t' ? std::string("tab") : std::string(1, c.delimiter); },
                 [](RunConfig& c, std::string_view v) {
                   if (v == "tab" || v == "\\t") c.delimiter = '\t';
                   else if (v.size() == 1) c.delimiter = v[0];
                   else throw Error(ErrorCode::InvalidArgument, "run.delimiter must be one character or 'tab'");
                 }});
    t.push_back(real("run.dominance_width", &RunConfig::dominance_width));
    t.push_back(real("run.copy_group_threshold", &RunConfig::copy_group_threshold));
    t.push_back(count("run.gold_min_providers", &RunConfig::gold_min_providers));
    return t;
  }();
  return table;
}

const Field& field(std::string_view key) {
  for (const auto& f : fields())
    if (f.key == key) return f;
  throw Error(ErrorCode::InvalidArgument, fmt::format("unknown config key '{}'", key));
}

std::string env_name(std::string_view key) {
  std::string name = "TRUTHDISC_";
  for (char c : key) name += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return name;
}

void check(bool ok, std::string_view key, std::string_view rule) {
  if (!ok) throw Error(ErrorCode::InvalidArgument, fmt::format("{} {}", key, rule));
}

}  // namespace

void RunConfig::set(std::string_view key, std::string_view value) {
  field(key).set(*this, value);
  // keep n_false shared between fusion and copy detection
  copy.n_false = fusion.n_false;
}

std::string RunConfig::get(std::string_view key) const { return field(key).get(*this); }

std::vector<std::string> RunConfig::keys() {
  std::vector<std::string> out;
  for (const auto& f : fields()) out.emplace_back(f.key);
  return out;
}

void RunConfig::load_file(const std::string& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    const bool missing = e.line() == 0;
    throw Error(missing ? ErrorCode::Io : ErrorCode::Parse, fmt::format("{}: {}", path, e.what()));
  }
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw Error(ErrorCode::InvalidArgument, fmt::format("{}: key '{}' outside a section", path, section));
    for (const auto& [key, value] : body) {
      try {
        set(section + "." + key, value.data());
      } catch (const Error& e) {
        throw Error(e.code(), fmt::format("{}: {}", path, e.what()));
      }
    }
  }
  validate();
}

void RunConfig::apply_env() {
  for (const auto& f : fields()) {
    if (const char* v = std::getenv(env_name(f.key).c_str())) set(f.key, v);
  }
  validate();
}

void RunConfig::save(const std::string& path) const {
  const auto parent = std::filesystem::path(path).parent_path();
  std::error_code ec;
  if (!parent.empty()) std::filesystem::create_directories(parent, ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  std::string current;
  for (const auto& f : fields()) {
    const auto dot = f.key.find('.');
    const auto section = std::string(f.key.substr(0, dot));
    if (section != current) {
      if (!current.empty()) out << '\n';
      out << '[' << section << "]\n";
      current = section;
    }
    out << f.key.substr(dot + 1) << " = " << f.get(*this) << '\n';
  }
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
}

void RunConfig::validate() const {
  check(alpha > 0.0, "tolerance.alpha", "must be positive");
  check(time_tolerance_minutes >= 0.0, "tolerance.time_minutes", "must be non-negative");
  check(fusion.similarity.decay_width_multiplier > 0.0, "similarity.decay_width", "must be positive");
  check(fusion.similarity.time_zero_at > 0.0, "similarity.time_zero_at", "must be positive");
  check(fusion.similarity.rho >= 0.0 && fusion.similarity.rho <= 1.0, "similarity.rho", "must lie in [0, 1]");
  check(fusion.epsilon > 0.0, "fusion.epsilon", "must be positive");
  check(fusion.max_rounds >= 1, "fusion.max_rounds", "must be at least 1");
  check(fusion.eps_cap > 0.0 && fusion.eps_cap < 0.5, "fusion.eps_cap", "must lie in (0, 0.5)");
  check(fusion.n_false >= 1.0, "fusion.n_false", "must be at least 1");
  check(fusion.format_weight >= 0.0 && fusion.format_weight <= 1.0, "fusion.format_weight", "must lie in [0, 1]");
  check(fusion.invest_exponent > 0.0, "fusion.invest_exponent", "must be positive");
  check(fusion.pooled_exponent > 0.0, "fusion.pooled_exponent", "must be positive");
  check(fusion.cosine_damping >= 0.0 && fusion.cosine_damping < 1.0, "fusion.cosine_damping", "must lie in [0, 1)");
  check(fusion.cosine_power > 0.0, "fusion.cosine_power", "must be positive");
  check(fusion.truthfinder_gamma > 0.0, "fusion.truthfinder_gamma", "must be positive");
  check(fusion.init_vote_hub > 0.0, "fusion.init_vote_hub", "must be positive");
  check(fusion.init_trust_cosine >= -1.0 && fusion.init_trust_cosine <= 1.0, "fusion.init_trust_cosine",
        "must lie in [-1, 1]");
  check(fusion.init_trust_estimates >= 0.0 && fusion.init_trust_estimates <= 1.0, "fusion.init_trust_estimates",
        "must lie in [0, 1]");
  check(fusion.init_value_trust >= 0.0 && fusion.init_value_trust <= 1.0, "fusion.init_value_trust",
        "must lie in [0, 1]");
  check(fusion.init_trust_bayes > 0.0 && fusion.init_trust_bayes < 1.0, "fusion.init_trust_bayes",
        "must lie in (0, 1)");
  check(fusion.min_attribute_observations >= 1, "fusion.min_attribute_observations", "must be at least 1");
  copy.validate();
  check(workers >= 1, "run.workers", "must be at least 1");
  check(dominance_width > 0.0 && dominance_width <= 1.0, "run.dominance_width", "must lie in (0, 1]");
  check(copy_group_threshold > 0.0 && copy_group_threshold <= 2.0, "run.copy_group_threshold", "must lie in (0, 2]");
  check(gold_min_providers >= 1, "run.gold_min_providers", "must be at least 1");
}

}  // namespace truthdisc
