#include "pskyline/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>

#include <fmt/core.h>

namespace pskyline {

bool stream_object::complete() const { return missing_count() == 0; }

size_t stream_object::missing_count() const {
  return std::count_if(attrs.begin(), attrs.end(), [](const auto& s) { return !s.has_value(); });
}

static void check_dims(const attr_vec& a, const attr_vec& b) {
  if (a.size() != b.size())
    throw dimension_error(fmt::format("dimension mismatch: {} vs {}", a.size(), b.size()));
}

bool dominates(const attr_vec& a, const attr_vec& b) {
  check_dims(a, b);
  bool strict = false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return false;
    if (a[i] > b[i]) strict = true;
  }
  return strict;
}

bool weakly_dominates(const attr_vec& a, const attr_vec& b) {
  check_dims(a, b);
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i] < b[i]) return false;
  return true;
}

double dominance_probability(const prob_object& p, const prob_object& q) {
  check_dims(p.min, q.min);
  // cheap exits from the mbrs
  if (!weakly_dominates(p.max, q.min)) return 0.0;
  double s = 0.0;
  for (const auto& a : p.instances)
    for (const auto& b : q.instances)
      if (dominates(a.attrs, b.attrs)) s += a.p * b.p;
  return std::min(s, 1.0);
}

double dominance_probability(const prob_object& p, const attr_vec& point) {
  check_dims(p.min, point);
  if (!weakly_dominates(p.max, point)) return 0.0;
  double s = 0.0;
  for (const auto& a : p.instances)
    if (dominates(a.attrs, point)) s += a.p;
  return std::min(s, 1.0);
}

double dominance_probability(const attr_vec& point, const prob_object& q) {
  check_dims(point, q.min);
  if (!weakly_dominates(point, q.min)) return 0.0;
  double s = 0.0;
  for (const auto& b : q.instances)
    if (dominates(point, b.attrs)) s += b.p;
  return std::min(s, 1.0);
}

bool spatial_prune(const prob_object& candidate, const prob_object& other) {
  return other.exp >= candidate.exp && dominates(other.min, candidate.max);
}

bool max_corner_prune(const prob_object& candidate, const prob_object& other, double alpha) {
  return other.exp >= candidate.exp &&
         prob_ge(dominance_probability(other, candidate.max), 1.0 - alpha);
}

bool min_corner_prune(const prob_object& candidate, const prob_object& other, double alpha) {
  return other.exp >= candidate.exp &&
         prob_ge(dominance_probability(other.min, candidate), 1.0 - alpha);
}

prob_object make_prob_object(std::string id, int64_t arr, int64_t exp, std::vector<instance> instances) {
  if (instances.empty()) throw std::invalid_argument("object " + id + " has no instances");
  const size_t d = instances.front().attrs.size();
  std::map<attr_vec, double> merged;
  double mass = 0.0;
  for (auto& in : instances) {
    if (in.attrs.size() != d) throw dimension_error("instance dimension mismatch in object " + id);
    if (!(in.p > 0.0) || in.p > 1.0 + prob_tol)
      throw std::invalid_argument(fmt::format("object {}: instance probability {} outside (0,1]", id, in.p));
    for (double v : in.attrs)
      if (!std::isfinite(v)) throw std::invalid_argument("object " + id + " has a non-finite attribute");
    merged[in.attrs] += in.p;
    mass += in.p;
  }
  if (std::fabs(mass - 1.0) > prob_tol)
    throw std::invalid_argument(fmt::format("object {}: instance probabilities sum to {}", id, mass));

  prob_object o;
  o.id = std::move(id);
  o.arr = arr;
  o.exp = exp;
  o.min.assign(d, 0.0);
  o.max.assign(d, 0.0);
  bool first = true;
  for (auto& [v, p] : merged) {
    for (size_t i = 0; i < d; ++i) {
      o.min[i] = first ? v[i] : std::min(o.min[i], v[i]);
      o.max[i] = first ? v[i] : std::max(o.max[i], v[i]);
    }
    first = false;
    o.instances.push_back({v, p});
  }
  return o;
}

prob_object point_object(const attr_vec& v, std::string id, int64_t arr, int64_t exp) {
  return make_prob_object(std::move(id), arr, exp, {{v, 1.0}});
}

prob_object certain_object(const stream_object& o) {
  attr_vec v;
  for (const auto& s : o.attrs) {
    if (!s) throw std::invalid_argument("object " + o.id + " is incomplete");
    v.push_back(*s);
  }
  return point_object(v, o.id, o.arr, o.exp);
}

void check_stream_object(const stream_object& o, size_t d) {
  if (o.attrs.size() != d)
    throw dimension_error(fmt::format("object {}: {} attributes, expected {}", o.id, o.attrs.size(), d));
  if (o.exp <= o.arr)
    throw std::invalid_argument(fmt::format("object {}: exp {} not after arr {}", o.id, o.exp, o.arr));
  if (o.missing_count() == d) throw std::invalid_argument("object " + o.id + " has every attribute missing");
  for (const auto& s : o.attrs)
    if (s && !std::isfinite(*s)) throw std::invalid_argument("object " + o.id + " has a non-finite attribute");
}

static std::optional<long long> as_int(const std::string& s) {
  long long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

bool id_less(const std::string& a, const std::string& b) {
  auto ia = as_int(a), ib = as_int(b);
  if (ia && ib) return *ia < *ib || (*ia == *ib && a < b);
  if (ia.has_value() != ib.has_value()) return ia.has_value(); // numbers first
  return a < b;
}

} // namespace pskyline
