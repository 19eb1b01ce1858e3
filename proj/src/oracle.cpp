#include "pskyline/oracle.hpp"

#include <algorithm>

#include <fmt/core.h>

namespace pskyline {

double world_count(const window& w) {
  double n = 1.0;
  for (const auto& o : w.objects) n *= static_cast<double>(o->instances.size());
  return n;
}

static void guard(const window& w) {
  double n = world_count(w);
  if (n > world_guard) throw world_limit_error(fmt::format("{} possible worlds exceed the guard", n));
}

template <class F>
static void for_each_world(const window& w, F&& visit) {
  guard(w);
  const size_t n = w.objects.size();
  std::vector<size_t> choice(n, 0);
  while (true) {
    double p = 1.0;
    for (size_t i = 0; i < n; ++i) p *= w.objects[i]->instances[choice[i]].p;
    visit(choice, p);
    size_t k = 0;
    while (k < n && ++choice[k] == w.objects[k]->instances.size()) choice[k++] = 0;
    if (k == n) break;
  }
}

std::vector<possible_world> enumerate_worlds(const window& w) {
  std::vector<possible_world> out;
  for_each_world(w, [&](const std::vector<size_t>& c, double p) { out.push_back({c, p}); });
  return out;
}

std::vector<double> brute_skyline_probabilities(const window& w) {
  const size_t n = w.objects.size();
  // dom[i][j] holds, per instance pair, whether instance a of i dominates instance b of j
  std::vector<std::vector<std::vector<char>>> dom(n * n);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto& a = w.objects[i]->instances;
      const auto& b = w.objects[j]->instances;
      auto& m = dom[i * n + j];
      m.assign(a.size(), std::vector<char>(b.size(), 0));
      for (size_t x = 0; x < a.size(); ++x)
        for (size_t y = 0; y < b.size(); ++y) m[x][y] = dominates(a[x].attrs, b[y].attrs);
    }
  std::vector<double> sky(n, 0.0);
  for_each_world(w, [&](const std::vector<size_t>& c, double p) {
    for (size_t j = 0; j < n; ++j) {
      bool free = true;
      for (size_t i = 0; i < n && free; ++i)
        if (i != j && dom[i * n + j][c[i]][c[j]]) free = false;
      if (free) sky[j] += p;
    }
  });
  return sky;
}

double brute_skyline_probability(const prob_object& obj, const window& w) {
  window local = w;
  auto it = std::find_if(local.objects.begin(), local.objects.end(),
                         [&](const object_ref& o) { return o->id == obj.id; });
  size_t idx;
  if (it == local.objects.end()) {
    local.objects.push_back(std::make_shared<prob_object>(obj));
    idx = local.objects.size() - 1;
  } else {
    idx = static_cast<size_t>(it - local.objects.begin());
  }
  return brute_skyline_probabilities(local)[idx];
}

std::vector<std::string> brute_answer_set(const window& w, double alpha) {
  auto sky = brute_skyline_probabilities(w);
  std::vector<std::string> ids;
  for (size_t i = 0; i < sky.size(); ++i)
    if (prob_gt(sky[i], alpha)) ids.push_back(w.objects[i]->id);
  std::sort(ids.begin(), ids.end(), id_less);
  return ids;
}

} // namespace pskyline
