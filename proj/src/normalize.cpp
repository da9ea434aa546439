#include "truthdisc/normalize.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>

#include "truthdisc/error.hpp"

namespace truthdisc {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string fold(std::string_view s) {
  std::string out(trim(s));
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

[[noreturn]] void parse_error(std::string_view raw, std::string_view kind) {
  throw Error(ErrorCode::Parse, "cannot parse '" + std::string(raw) + "' as " + std::string(kind));
}

void strip_all(std::string& s, std::string_view token) {
  for (auto pos = s.find(token); pos != std::string::npos; pos = s.find(token))
    s.erase(pos, token.size());
}

Value parse_number(std::string_view raw) {
  std::string s(trim(raw));
  for (std::string_view currency : {"$", "\xE2\x82\xAC", "\xC2\xA3", "\xC2\xA5"}) strip_all(s, currency);
  strip_all(s, ",");
  s = std::string(trim(s));
  if (!s.empty() && s.back() == '%') s.pop_back();
  s = std::string(trim(s));

  int shift = 0;
  if (!s.empty()) {
    switch (std::toupper(static_cast<unsigned char>(s.back()))) {
      case 'K': shift = 3; break;
      case 'M': shift = 6; break;
      case 'B': shift = 9; break;
      default: break;
    }
    if (shift) s = std::string(trim(std::string_view(s).substr(0, s.size() - 1)));
  }

  std::string sign;
  if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
    if (s[0] == '-') sign = "-";
    s.erase(0, 1);
  }
  const auto dot = s.find('.');
  std::string int_part = s.substr(0, dot);
  std::string frac_part = dot == std::string::npos ? std::string() : s.substr(dot + 1);
  const auto all_digits = [](const std::string& t) {
    return std::all_of(t.begin(), t.end(), [](unsigned char c) { return std::isdigit(c); });
  };
  if ((int_part.empty() && frac_part.empty()) || !all_digits(int_part) || !all_digits(frac_part) ||
      (dot != std::string::npos && s.find('.', dot + 1) != std::string::npos))
    parse_error(raw, "number");

  int granularity = 0;
  if (!frac_part.empty()) {
    granularity = -static_cast<int>(frac_part.size());
  } else {
    const auto last = int_part.find_last_not_of('0');
    if (last != std::string::npos) granularity = static_cast<int>(int_part.size() - last - 1);
  }
  granularity += shift;

  // Shift the decimal point textually so unit suffixes scale exactly.
  const std::size_t moved = std::min<std::size_t>(static_cast<std::size_t>(shift), frac_part.size());
  int_part += frac_part.substr(0, moved);
  frac_part.erase(0, moved);
  int_part.append(static_cast<std::size_t>(shift) - moved, '0');
  if (int_part.empty()) int_part = "0";
  const std::string text = sign + int_part + (frac_part.empty() ? "" : "." + frac_part);
  const double v = std::strtod(text.c_str(), nullptr);
  if (!std::isfinite(v)) parse_error(raw, "number");
  return Value::number(v, granularity);
}

Value parse_time(std::string_view raw) {
  std::string s = fold(raw);
  int meridiem = 0;  // 1 am, 2 pm
  for (std::string_view marker : {"a.m.", "p.m.", "am", "pm"}) {
    if (s.size() >= marker.size() && s.compare(s.size() - marker.size(), marker.size(), marker) == 0) {
      meridiem = marker[0] == 'a' ? 1 : 2;
      s = std::string(trim(std::string_view(s).substr(0, s.size() - marker.size())));
      break;
    }
  }
  const auto colon = s.find(':');
  if (colon == std::string::npos || colon == 0 || colon > 2) parse_error(raw, "time of day");
  const std::string hh = s.substr(0, colon);
  std::string mm = s.substr(colon + 1);
  if (mm.size() == 5 && mm[2] == ':') mm = mm.substr(0, 2);  // drop seconds
  const auto digits = [](const std::string& t) {
    return !t.empty() && std::all_of(t.begin(), t.end(), [](unsigned char c) { return std::isdigit(c); });
  };
  if (!digits(hh) || !digits(mm) || mm.size() != 2) parse_error(raw, "time of day");
  int hours = std::stoi(hh);
  const int minutes = std::stoi(mm);
  if (minutes > 59) parse_error(raw, "time of day");
  if (meridiem) {
    if (hours < 1 || hours > 12) parse_error(raw, "time of day");
    hours %= 12;
    if (meridiem == 2) hours += 12;
  } else if (hours > 23) {
    parse_error(raw, "time of day");
  }
  return Value::time_of_day(hours * 60 + minutes);
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

void require_kind(const Value& a, const Value& b, const AttributeSpec& attribute) {
  if (a.kind() != attribute.kind || b.kind() != attribute.kind)
    throw Error(ErrorCode::InvalidArgument,
                "value kind mismatch for attribute '" + attribute.name + "'");
}

struct Assignment {
  std::vector<Bucket> buckets;
  std::vector<std::size_t> claim_bucket;
};

Assignment assign_buckets(std::span<const IndexedClaim> claims, const AttributeSpec& attribute,
                          double tau) {
  Assignment out;
  if (claims.empty()) return out;

  // Anchor: the exact value with most providers, smallest on ties.
  std::map<Value, std::size_t> exact;
  for (const auto& c : claims) ++exact[c.value];
  auto anchor = exact.begin();
  for (auto it = exact.begin(); it != exact.end(); ++it)
    if (it->second > anchor->second) anchor = it;

  const double half = bucket_half_width(attribute, tau);
  const double width = 2.0 * half;
  const bool grid = attribute.kind != ValueKind::Text && width > 0.0;
  const double v0 = grid ? anchor->first.as_real() : 0.0;

  // Grid index per claim; text and zero-width buckets group exactly.
  std::map<long long, std::vector<std::size_t>> by_cell;
  std::map<Value, std::vector<std::size_t>> by_value;
  for (std::size_t i = 0; i < claims.size(); ++i) {
    if (grid) {
      const double k = std::ceil((claims[i].value.as_real() - v0) / width - 0.5);
      by_cell[static_cast<long long>(k)].push_back(i);
    } else {
      by_value[claims[i].value].push_back(i);
    }
  }

  auto make_bucket = [&](std::optional<long long> cell, const std::vector<std::size_t>& idx) {
    Bucket b;
    b.half_width = half;
    b.provider_count = idx.size();
    for (auto i : idx) {
      const Value& v = claims[i].value;
      auto it = std::lower_bound(b.members.begin(), b.members.end(), v);
      if (it == b.members.end() || *it != v) {
        b.members.insert(it, v);
      } else if (v.granularity() && (!it->granularity() || *v.granularity() < *it->granularity())) {
        *it = v;
      }
    }
    if (!cell) {
      b.center = b.members.front();
      return b;
    }
    const double c = v0 + static_cast<double>(*cell) * width;
    if (attribute.kind == ValueKind::Number) {
      std::optional<int> finest;
      for (const auto& m : b.members)
        if (m.granularity() && (!finest || *m.granularity() < *finest)) finest = m.granularity();
      b.center = *cell == 0 ? Value::number(v0, finest) : Value::number(c, finest);
    } else {
      b.center = Value::time_of_day(std::clamp(static_cast<int>(std::lround(c)), 0, 1439));
    }
    return b;
  };

  std::vector<std::pair<Bucket, const std::vector<std::size_t>*>> built;
  if (grid) {
    for (const auto& [cell, idx] : by_cell) built.emplace_back(make_bucket(cell, idx), &idx);
  } else {
    for (const auto& [value, idx] : by_value) built.emplace_back(make_bucket(std::nullopt, idx), &idx);
  }
  std::stable_sort(built.begin(), built.end(),
                   [](const auto& a, const auto& b) { return a.first.center < b.first.center; });
  out.claim_bucket.assign(claims.size(), 0);
  for (std::size_t b = 0; b < built.size(); ++b) {
    for (auto i : *built[b].second) out.claim_bucket[i] = b;
    out.buckets.push_back(std::move(built[b].first));
  }
  return out;
}

}  // namespace

Value normalize_value(std::string_view raw, ValueKind kind) {
  if (trim(raw).empty()) throw Error(ErrorCode::Parse, "empty value");
  switch (kind) {
    case ValueKind::Number: return parse_number(raw);
    case ValueKind::TimeOfDay: return parse_time(raw);
    case ValueKind::Text: return Value::text(fold(raw));
  }
  parse_error(raw, "value");
}

double median(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "median of an empty set");
  const auto n = values.size();
  auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  if (n % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(values.begin(), mid);
  return (lower + upper) / 2.0;
}

double tolerance(const AttributeSpec& attribute, std::span<const double> all_values) {
  if (attribute.policy() != TolerancePolicy::RelativeMedian)
    throw Error(ErrorCode::InvalidArgument, "attribute '" + attribute.name + "' is not numeric");
  if (all_values.empty())
    throw Error(ErrorCode::InvalidArgument, "no values for attribute '" + attribute.name + "'");
  return attribute.tolerance_param * median({all_values.begin(), all_values.end()});
}

Tolerances compute_tolerances(const ClaimSet& claims) {
  const auto& schema = claims.schema();
  std::vector<std::vector<double>> values(schema.size());
  for (const auto& c : claims.claims()) {
    const auto attr = claims.items()[c.item].attribute;
    if (schema.at(attr).kind == ValueKind::Number) values[attr].push_back(c.value.number());
  }
  std::vector<double> tau(schema.size(), 0.0);
  for (std::size_t a = 0; a < schema.size(); ++a) {
    const auto& spec = schema.at(a);
    switch (spec.policy()) {
      case TolerancePolicy::RelativeMedian:
        // |.| keeps the tolerance meaningful for attributes with negative medians.
        tau[a] = values[a].empty() ? 0.0 : std::abs(tolerance(spec, values[a]));
        break;
      case TolerancePolicy::AbsoluteMinutes: tau[a] = spec.tolerance_param; break;
      case TolerancePolicy::ExactIgnoreCase: tau[a] = 0.0; break;
    }
  }
  return Tolerances(std::move(tau));
}

bool values_match(const Value& a, const Value& b, const AttributeSpec& attribute, double tau) {
  require_kind(a, b, attribute);
  switch (attribute.kind) {
    case ValueKind::Number: return std::abs(a.number() - b.number()) <= tau;
    case ValueKind::TimeOfDay: return std::abs(a.minutes() - b.minutes()) <= tau;
    case ValueKind::Text: return fold(a.text()) == fold(b.text());
  }
  return false;
}

double bucket_half_width(const AttributeSpec& attribute, double tau) {
  switch (attribute.kind) {
    case ValueKind::Number: return tau / 2.0;
    case ValueKind::TimeOfDay: return tau;
    case ValueKind::Text: return 0.0;
  }
  return 0.0;
}

std::vector<Bucket> bucketize(const ClaimSet& claims, std::size_t item, double tau) {
  const auto item_claims = claims.item_claims(item);
  if (item_claims.empty()) throw Error(ErrorCode::InvalidArgument, "item has no claims");
  return assign_buckets(item_claims, claims.attribute_of(item), tau).buckets;
}

double similarity(const Value& a, const Value& b, const AttributeSpec& attribute, double tau,
                  const SimilarityParams& params) {
  require_kind(a, b, attribute);
  switch (attribute.kind) {
    case ValueKind::Number: {
      if (a == b) return 1.0;
      const double cutoff = params.decay_width_multiplier * tau;
      if (!(cutoff > 0.0)) return 0.0;
      return std::max(0.0, 1.0 - std::abs(a.number() - b.number()) / cutoff);
    }
    case ValueKind::TimeOfDay: {
      if (a == b) return 1.0;
      if (!(params.time_zero_at > 0.0)) return 0.0;
      return std::max(0.0, 1.0 - std::abs(a.minutes() - b.minutes()) / params.time_zero_at);
    }
    case ValueKind::Text: {
      const std::string x = fold(a.text());
      const std::string y = fold(b.text());
      if (x == y) return 1.0;
      const double longest = static_cast<double>(std::max(x.size(), y.size()));
      return 1.0 - static_cast<double>(edit_distance(x, y)) / longest;
    }
  }
  return 0.0;
}

bool subsumes(const Value& coarse, const Value& fine, const AttributeSpec& attribute) {
  require_kind(coarse, fine, attribute);
  if (coarse == fine) return true;
  if (attribute.kind != ValueKind::Number || !coarse.granularity()) return false;
  const int gc = *coarse.granularity();
  const int gf = fine.granularity().value_or(std::numeric_limits<int>::min());
  if (gc <= gf) return false;
  const double unit = std::pow(10.0, gc);
  const double rounded = std::round(fine.number() / unit) * unit;
  return std::abs(rounded - coarse.number()) <= 1e-9 * std::max(1.0, std::abs(coarse.number()));
}

BucketedClaims::BucketedClaims(const ClaimSet& claims, Tolerances tolerances)
    : claims_(&claims), tolerances_(std::move(tolerances)) {
  by_source_.resize(claims.sources().size());
  items_.reserve(claims.items().size());
  std::size_t first = 0;
  for (std::size_t d = 0; d < claims.items().size(); ++d) {
    const auto item_claims = claims.item_claims(d);
    const auto attr = claims.items()[d].attribute;
    auto assignment = assign_buckets(item_claims, claims.schema().at(attr), tolerances_.of(attr));
    Item item{attr, std::move(assignment.buckets), {}};
    item.entries.reserve(item_claims.size());
    for (std::size_t i = 0; i < item_claims.size(); ++i) {
      item.entries.push_back({item_claims[i].source, assignment.claim_bucket[i], first + i});
      by_source_[item_claims[i].source].push_back({d, i});
    }
    first += item_claims.size();
    items_.push_back(std::move(item));
  }
}

}  // namespace truthdisc
