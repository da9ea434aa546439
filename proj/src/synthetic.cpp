#include "truthdisc/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "csv.hpp"
#include "truthdisc/error.hpp"

namespace truthdisc {

namespace {

// Fisher-Yates with plain modulo draws: the standard distributions are
// implementation-defined, this is identical on every platform.
void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng() % i]);
}

std::vector<std::size_t> shuffled(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  shuffle(v, rng);
  return v;
}

std::size_t share(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
}

Value true_value(const AttributeSpec& attr, std::size_t item, std::mt19937_64& rng) {
  switch (attr.kind) {
    case ValueKind::Number: return Value::number(static_cast<double>(10000 + rng() % 10000) / 100.0, -2);
    case ValueKind::TimeOfDay: return Value::time_of_day(static_cast<int>(360 + rng() % 960));
    case ValueKind::Text: return Value::text(fmt::format("val{}-t", item));
  }
  throw Error(ErrorCode::InvalidArgument, "bad attribute kind");
}

Value false_value(const AttributeSpec& attr, std::size_t item, const Value& truth, std::size_t j) {
  switch (attr.kind) {
    case ValueKind::Number:
      return Value::number(std::round(truth.number() * (1.0 + 0.08 * static_cast<double>(j)) * 100.0) / 100.0, -2);
    case ValueKind::TimeOfDay: return Value::time_of_day((truth.minutes() + 25 * static_cast<int>(j)) % 1440);
    case ValueKind::Text: return Value::text(fmt::format("val{}-f{}", item, j));
  }
  throw Error(ErrorCode::InvalidArgument, "bad attribute kind");
}

void check_fraction(double x, const std::string& what) {
  if (!(x >= 0.0 && x <= 1.0)) throw Error(ErrorCode::InvalidArgument, what + " must lie in [0, 1]");
}

double parse_fraction(const std::string& s, const std::string& what) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw Error(ErrorCode::Parse, what + ": '" + s + "' is not a number");
  return v;
}

std::size_t parse_size(const std::string& s, const std::string& what) {
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); }))
    throw Error(ErrorCode::Parse, what + ": '" + s + "' is not a count");
  return std::stoull(s);
}

}  // namespace

void SyntheticSpec::validate() const {
  if (objects == 0) throw Error(ErrorCode::InvalidArgument, "synthetic spec needs at least one object");
  if (false_values == 0) throw Error(ErrorCode::InvalidArgument, "synthetic spec needs a false-value pool");
  if (sources.empty()) throw Error(ErrorCode::InvalidArgument, "synthetic spec needs at least one source");
  std::set<std::string> ids;
  for (const auto& s : sources) {
    if (s.id.empty()) throw Error(ErrorCode::InvalidArgument, "source ids must be non-empty");
    if (!ids.insert(s.id).second) throw Error(ErrorCode::Duplicate, "duplicate source " + s.id);
    check_fraction(s.accuracy, "accuracy of " + s.id);
    check_fraction(s.coverage, "coverage of " + s.id);
  }
  const std::set<std::string> independent = ids;
  for (const auto& g : copiers) {
    if (!independent.count(g.original))
      throw Error(ErrorCode::InvalidArgument, "copier group " + g.name + " copies undefined source " + g.original);
    if (g.members.empty()) throw Error(ErrorCode::InvalidArgument, "copier group " + g.name + " has no members");
    if (!(g.rate > 0.0 && g.rate <= 1.0))
      throw Error(ErrorCode::InvalidArgument, "copy rate of group " + g.name + " must lie in (0, 1]");
    if (g.accuracy) check_fraction(*g.accuracy, "accuracy of group " + g.name);
    for (const auto& m : g.members) {
      if (m.empty()) throw Error(ErrorCode::InvalidArgument, "copier ids must be non-empty");
      if (!ids.insert(m).second) throw Error(ErrorCode::Duplicate, "duplicate source " + m);
    }
  }
  std::set<std::string> names;
  for (const auto& a : attributes)
    if (!names.insert(a.name).second) throw Error(ErrorCode::Duplicate, "duplicate attribute " + a.name);
}

SyntheticSpec load_synthetic_spec(const std::string& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(e.line() == 0 ? ErrorCode::Io : ErrorCode::Parse, fmt::format("{}: {}", path, e.what()));
  }
  SyntheticSpec spec;
  auto unknown = [&](const std::string& section, const std::string& key) {
    return Error(ErrorCode::InvalidArgument, fmt::format("{}: unknown key '{}' in [{}]", path, key, section));
  };
  for (const auto& [section, body] : tree) {
    const auto colon = section.find(':');
    const std::string kind = section.substr(0, colon);
    const std::string name = colon == std::string::npos ? "" : section.substr(colon + 1);
    if (kind == "dataset") {
      for (const auto& [key, v] : body) {
        if (key == "objects") spec.objects = parse_size(v.data(), "dataset.objects");
        else if (key == "false_values") spec.false_values = parse_size(v.data(), "dataset.false_values");
        else throw unknown(section, key);
      }
    } else if (kind == "attribute" && !name.empty()) {
      AttributeSpec a{name, ValueKind::Number, 0.01};
      bool explicit_param = false;
      for (const auto& [key, v] : body) {
        if (key == "kind") a.kind = parse_value_kind(v.data());
        else if (key == "tolerance") {
          a.tolerance_param = parse_fraction(v.data(), section + ".tolerance");
          explicit_param = true;
        } else throw unknown(section, key);
      }
      if (!explicit_param && a.kind == ValueKind::TimeOfDay) a.tolerance_param = 10.0;
      if (!explicit_param && a.kind == ValueKind::Text) a.tolerance_param = 0.0;
      spec.attributes.push_back(a);
    } else if (kind == "source" && !name.empty()) {
      SyntheticSource s{name};
      for (const auto& [key, v] : body) {
        if (key == "accuracy") s.accuracy = parse_fraction(v.data(), section + ".accuracy");
        else if (key == "coverage") s.coverage = parse_fraction(v.data(), section + ".coverage");
        else throw unknown(section, key);
      }
      spec.sources.push_back(s);
    } else if (kind == "copiers" && !name.empty()) {
      CopierGroup g;
      g.name = name;
      for (const auto& [key, v] : body) {
        if (key == "original") g.original = v.data();
        else if (key == "members") {
          boost::split(g.members, v.data(), boost::is_any_of(";"));
          for (auto& m : g.members) boost::trim(m);
        } else if (key == "rate") g.rate = parse_fraction(v.data(), section + ".rate");
        else if (key == "accuracy") g.accuracy = parse_fraction(v.data(), section + ".accuracy");
        else throw unknown(section, key);
      }
      spec.copiers.push_back(g);
    } else {
      throw Error(ErrorCode::InvalidArgument, fmt::format("{}: unknown section [{}]", path, section));
    }
  }
  spec.validate();
  return spec;
}

SyntheticData generate_synthetic(const SyntheticSpec& input, std::uint64_t seed) {
  SyntheticSpec spec = input;
  if (spec.attributes.empty()) spec.attributes.push_back({"price", ValueKind::Number, 0.01});
  spec.validate();
  auto schema = std::make_shared<const Schema>(spec.attributes);
  std::mt19937_64 rng(seed);

  const std::size_t num_attrs = spec.attributes.size();
  const std::size_t num_items = spec.objects * num_attrs;
  std::vector<ItemKey> keys(num_items);
  std::vector<Value> truth(num_items);
  std::map<ItemKey, Value> gold;
  for (std::size_t o = 0; o < spec.objects; ++o) {
    for (std::size_t a = 0; a < num_attrs; ++a) {
      const auto i = o * num_attrs + a;
      keys[i] = ItemKey{fmt::format("o{:05}", o), a};
      truth[i] = true_value(spec.attributes[a], i, rng);
      gold.emplace(keys[i], truth[i]);
    }
  }
  auto wrong = [&](std::size_t i) {
    const auto j = 1 + rng() % spec.false_values;
    return false_value(spec.attributes[keys[i].attribute], i, truth[i], j);
  };

  std::vector<Claim> claims;
  std::map<std::string, std::vector<std::pair<std::size_t, Value>>> provided;
  std::map<std::string, double> accuracy_of;
  for (const auto& s : spec.sources) {
    auto order = shuffled(num_items, rng);
    order.resize(share(s.coverage, num_items));
    auto pick = shuffled(order.size(), rng);
    const auto correct = share(s.accuracy, order.size());
    auto& mine = provided[s.id];
    for (std::size_t k = 0; k < pick.size(); ++k) {
      const auto i = order[pick[k]];
      mine.emplace_back(i, k < correct ? truth[i] : wrong(i));
    }
    std::sort(mine.begin(), mine.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    accuracy_of[s.id] = s.accuracy;
  }

  KnownCopiers known;
  std::map<std::string, std::vector<std::pair<std::size_t, Value>>> copied_claims;
  for (const auto& g : spec.copiers) {
    const auto& base = provided.at(g.original);
    for (const auto& member : g.members) {
      auto order = shuffled(base.size(), rng);
      const auto n_copy = share(g.rate, base.size());
      std::vector<std::pair<std::size_t, Value>> mine;
      std::size_t copied_correct = 0;
      for (std::size_t k = 0; k < n_copy; ++k) {
        mine.push_back(base[order[k]]);
        if (base[order[k]].second == truth[base[order[k]].first]) ++copied_correct;
      }
      const std::size_t rest = base.size() - n_copy;
      std::size_t rest_correct = share(accuracy_of.at(g.original), rest);
      if (g.accuracy) {
        const auto target = share(*g.accuracy, base.size());
        if (target < copied_correct || target - copied_correct > rest)
          throw Error(ErrorCode::Infeasible,
                      fmt::format("copier {} cannot reach accuracy {} while copying {} of {} items from {}", member,
                                  *g.accuracy, n_copy, base.size(), g.original));
        rest_correct = target - copied_correct;
      }
      auto pick = shuffled(rest, rng);
      for (std::size_t k = 0; k < rest; ++k) {
        const auto i = base[order[n_copy + pick[k]]].first;
        mine.emplace_back(i, k < rest_correct ? truth[i] : wrong(i));
      }
      copied_claims[member] = std::move(mine);
      known[{SourceId{member}, SourceId{g.original}}] = 1.0;
    }
  }
  for (auto& [id, list] : copied_claims) provided[id] = std::move(list);

  for (const auto& [id, list] : provided)
    for (const auto& [i, v] : list) claims.push_back({SourceId{id}, keys[i], v});

  SyntheticData out{schema, ClaimSet(schema, fmt::format("synthetic-{}", seed), std::move(claims)),
                    GoldStandard(std::move(gold)), std::move(known)};
  return out;
}

void write_known_copiers(const KnownCopiers& copiers, const std::string& path) {
  csv::Writer out(path);
  out.row({"copier", "original", "probability"});
  for (const auto& [pair, p] : copiers) out.row({pair.first.value, pair.second.value, fmt::format("{}", p)});
}

}  // namespace truthdisc
