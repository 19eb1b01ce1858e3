#pragma once

#include <map>
#include <random>
#include <string>
#include <vector>

#include "pskyline/engine.hpp"
#include "pskyline/model.hpp"
#include "pskyline/repo_index.hpp"

namespace fixtures {

using namespace pskyline;

// the sensor example: objects valid at t=6 with their imputed instances
inline prob_object o3() {
  return make_prob_object("o3", 3, 9, {{{90, 2, 2, 3}, 0.4}, {{90, 2, 3, 3}, 0.6}});
}
inline prob_object o4() {
  return make_prob_object("o4", 3, 9,
                          {{{60, 1, 1, 1}, 0.56}, {{60, 1, 1, 2}, 0.24}, {{60, 2, 1, 1}, 0.14}, {{60, 2, 1, 2}, 0.06}});
}
inline prob_object o5() { return make_prob_object("o5", 6, 11, {{{70, 2, 2, 2}, 1.0}}); }
inline prob_object o6() { return make_prob_object("o6", 6, 10, {{{90, 2, 3, 2}, 0.6}, {{80, 2, 3, 2}, 0.4}}); }

inline window w6() {
  window w;
  w.t = 6;
  for (auto o : {o3(), o4(), o5(), o6()}) w.objects.push_back(std::make_shared<const prob_object>(o));
  return w;
}

// the full replay, keyed by tick; repeated ids are later readings of the same sensor
inline std::map<int64_t, std::vector<prob_object>> sensor_replay() {
  std::map<int64_t, std::vector<prob_object>> r;
  r[1] = {make_prob_object("o1", 1, 6, {{{100, 3, 3, 3}, 1.0}})};
  r[2] = {make_prob_object("o2", 2, 6, {{{50, 1, 1, 1}, 1.0}})};
  r[3] = {o3(), o4()};
  r[6] = {o5(), o6()};
  r[7] = {make_prob_object("o1", 7, 12, {{{80, 2, 2, 2}, 1.0}})};
  r[8] = {make_prob_object("o2", 8, 12, {{{90, 1, 3, 3}, 1.0}})};
  return r;
}

// four-row repository with columns A B C D
inline repository small_repo() {
  repository r;
  r.header = {"A", "B", "C", "D"};
  r.rows = {{90, 2, 2, 3}, {60, 1, 1, 1}, {70, 2, 2, 2}, {90, 2, 3, 2}};
  return r;
}

inline std::optional<double> v(double x) { return x; }
inline const std::optional<double> gap = std::nullopt;

inline stream_object incomplete(std::string id, int64_t arr, int64_t exp, std::vector<std::optional<double>> a) {
  stream_object o;
  o.id = std::move(id);
  o.arr = arr;
  o.exp = exp;
  o.attrs = std::move(a);
  return o;
}

// hand-rolled generators; small integer grids make ties and dominance common
struct gen {
  std::mt19937_64 rng;
  explicit gen(uint64_t seed) : rng(seed) {}

  int64_t integer(int64_t lo, int64_t hi) { return std::uniform_int_distribution<int64_t>(lo, hi)(rng); }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  bool coin(double p = 0.5) { return real(0, 1) < p; }

  attr_vec point(size_t d, int grid = 5) {
    attr_vec x(d);
    for (auto& v : x) v = static_cast<double>(integer(0, grid));
    return x;
  }

  std::vector<double> weights(size_t n) {
    std::vector<double> w(n);
    double s = 0.0;
    for (auto& x : w) s += (x = real(0.05, 1.0));
    for (auto& x : w) x /= s;
    return w;
  }

  // instances cluster around a centre so objects overlap the way imputed ones do
  prob_object object(const std::string& id, size_t d, size_t max_inst, int64_t arr, int64_t exp, int grid = 5) {
    size_t n = static_cast<size_t>(integer(1, static_cast<int64_t>(max_inst)));
    attr_vec centre = point(d, grid);
    auto w = weights(n);
    std::vector<instance> ins;
    for (size_t i = 0; i < n; ++i) {
      attr_vec x = centre;
      for (auto& v : x)
        if (coin(0.4)) v += static_cast<double>(integer(-1, 1));
      ins.push_back({x, w[i]});
    }
    return make_prob_object(id, arr, exp, std::move(ins));
  }

  window small_window(size_t max_objects = 8, size_t max_inst = 4, size_t max_d = 4) {
    window w;
    size_t d = static_cast<size_t>(integer(1, static_cast<int64_t>(max_d)));
    size_t n = static_cast<size_t>(integer(1, static_cast<int64_t>(max_objects)));
    for (size_t i = 0; i < n; ++i)
      w.objects.push_back(std::make_shared<const prob_object>(object(std::to_string(i), d, max_inst, 0, 10)));
    return w;
  }

  // arrivals per tick with short lifetimes so few objects are live at once
  std::map<int64_t, std::vector<prob_object>> stream(size_t objects, size_t d, size_t max_inst, int64_t max_life,
                                                      size_t per_tick = 2, int grid = 5) {
    std::map<int64_t, std::vector<prob_object>> s;
    int64_t t = 1;
    for (size_t i = 0; i < objects;) {
      size_t k = static_cast<size_t>(integer(0, static_cast<int64_t>(per_tick)));
      for (size_t j = 0; j < k && i < objects; ++j, ++i)
        s[t].push_back(object(std::to_string(i + 1), d, max_inst, t, t + integer(1, max_life), grid));
      ++t;
    }
    return s;
  }
};

inline window live_window(const std::vector<object_ref>& all, int64_t t) {
  window w;
  w.t = t;
  for (const auto& o : all)
    if (valid_at(*o, t)) w.objects.push_back(o);
  return w;
}

} // namespace fixtures
