#include "pgcl/region.hpp"

#include "pgcl/errors.hpp"

namespace pgcl {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<Rational> values_of(const std::string& spec) {
  std::vector<Rational> out;
  std::size_t dots = spec.find("..");
  if (dots == std::string::npos) {
    std::size_t start = 0;
    for (;;) {
      std::size_t bar = spec.find('|', start);
      out.push_back(parse_rational(trim(spec.substr(start, bar - start))));
      if (bar == std::string::npos) break;
      start = bar + 1;
    }
    return out;
  }
  std::string tail = spec.substr(dots + 2);
  Rational step = 1;
  std::size_t colon = tail.find(':');
  if (colon != std::string::npos) {
    step = parse_rational(trim(tail.substr(colon + 1)));
    tail = tail.substr(0, colon);
  }
  Rational lo = parse_rational(trim(spec.substr(0, dots)));
  Rational hi = parse_rational(trim(tail));
  if (sgn(step) <= 0) throw Error("range step must be positive in '" + spec + "'");
  if (hi < lo) throw Error("empty range '" + spec + "'");
  for (Rational v = lo; v <= hi; v += step) out.push_back(v);
  return out;
}

}  // namespace

std::vector<VarRange> parse_ranges(std::string_view text) {
  std::vector<VarRange> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find_first_of(",;", start);
    std::string item = trim(text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
    if (!item.empty()) {
      std::size_t eq = item.find('=');
      if (eq == std::string::npos) throw Error("expected 'var=values' in region item '" + item + "'");
      VarRange r{trim(item.substr(0, eq)), values_of(trim(item.substr(eq + 1)))};
      if (r.var.empty()) throw Error("missing variable name in region item '" + item + "'");
      for (const VarRange& o : out) {
        if (o.var == r.var) throw Error("variable '" + r.var + "' listed twice in region");
      }
      out.push_back(std::move(r));
    }
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

std::vector<State> expand(const std::vector<VarRange>& ranges, std::size_t max_states) {
  std::size_t total = 1;
  for (const VarRange& r : ranges) {
    if (r.values.empty()) return {};
    if (total > max_states / r.values.size()) throw Error("region has more than " + std::to_string(max_states) + " states");
    total *= r.values.size();
  }
  std::vector<State> out;
  out.reserve(total);
  std::vector<std::size_t> pos(ranges.size(), 0);
  for (std::size_t k = 0; k < total; ++k) {
    State s;
    for (std::size_t i = 0; i < ranges.size(); ++i) s.set(ranges[i].var, ranges[i].values[pos[i]]);
    out.push_back(std::move(s));
    for (std::size_t i = ranges.size(); i-- > 0;) {
      if (++pos[i] < ranges[i].values.size()) break;
      pos[i] = 0;
    }
  }
  return out;
}

std::vector<State> parse_region(std::string_view text, std::size_t max_states) {
  return expand(parse_ranges(text), max_states);
}

}  // namespace pgcl
