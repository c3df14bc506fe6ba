#include "pgcl/state.hpp"

#include <algorithm>
#include <functional>

#include "pgcl/errors.hpp"

namespace pgcl {

namespace {

auto lower(const std::vector<State::Entry>& vars, std::string_view name) {
  return std::lower_bound(vars.begin(), vars.end(), name,
                          [](const State::Entry& e, std::string_view n) { return std::string_view(e.first) < n; });
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace

State::State(std::initializer_list<Entry> entries) {
  for (const auto& [name, value] : entries) set(name, value);
}

const Rational* State::find(std::string_view name) const {
  auto it = lower(vars_, name);
  if (it == vars_.end() || it->first != name) return nullptr;
  return &it->second;
}

const Rational& State::get(std::string_view name) const {
  const Rational* v = find(name);
  if (v == nullptr) throw UnboundVariable(std::string(name));
  return *v;
}

void State::set(std::string_view name, Rational value) {
  auto it = std::lower_bound(vars_.begin(), vars_.end(), name,
                             [](const Entry& e, std::string_view n) { return std::string_view(e.first) < n; });
  if (it != vars_.end() && it->first == name) {
    it->second = std::move(value);
  } else {
    vars_.insert(it, Entry(std::string(name), std::move(value)));
  }
}

State State::with(std::string_view name, Rational value) const {
  State copy = *this;
  copy.set(name, std::move(value));
  return copy;
}

State State::without(std::string_view name) const {
  State copy = *this;
  auto it = lower(copy.vars_, name);
  if (it != copy.vars_.end() && it->first == name) copy.vars_.erase(it);
  return copy;
}

std::size_t State::hash() const {
  std::size_t h = 1469598103934665603ULL;
  for (const auto& [name, value] : vars_) {
    h ^= std::hash<std::string>{}(name) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= hash_value(value) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

std::string State::str() const {
  std::string out;
  for (const auto& [name, value] : vars_) {
    if (!out.empty()) out += ';';
    out += name;
    out += '=';
    out += to_string(value);
  }
  return out;
}

bool operator<(const State& a, const State& b) {
  const auto& x = a.vars_;
  const auto& y = b.vars_;
  std::size_t n = std::min(x.size(), y.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i].first != y[i].first) return x[i].first < y[i].first;
    int c = cmp(x[i].second, y[i].second);
    if (c != 0) return c < 0;
  }
  return x.size() < y.size();
}

State parse_state(std::string_view text) {
  State s;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find_first_of(";,", start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view item = trim(text.substr(start, end - start));
    if (!item.empty()) {
      auto eq = item.find('=');
      if (eq == std::string_view::npos) throw Error("expected name=value in state, got '" + std::string(item) + "'");
      std::string_view name = trim(item.substr(0, eq));
      if (name.empty()) throw Error("empty variable name in state '" + std::string(text) + "'");
      s.set(name, parse_rational(trim(item.substr(eq + 1))));
    }
    start = end + 1;
  }
  return s;
}

}  // namespace pgcl
