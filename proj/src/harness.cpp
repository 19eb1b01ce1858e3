#include "pskyline/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <set>

#include <fmt/core.h>
#include "json.hpp"

#include "pskyline/cost_model.hpp"

namespace pskyline {

dist_kind parse_kind(const std::string& s) {
  if (s == "uniform" || s == "uni") return dist_kind::uniform;
  if (s == "correlated" || s == "corr") return dist_kind::correlated;
  if (s == "anticorrelated" || s == "anti-correlated" || s == "anti") return dist_kind::anticorrelated;
  throw std::invalid_argument("unknown distribution '" + s + "' (uniform, correlated, anticorrelated)");
}

std::string kind_name(dist_kind k) {
  switch (k) {
  case dist_kind::uniform: return "uniform";
  case dist_kind::correlated: return "correlated";
  case dist_kind::anticorrelated: return "anticorrelated";
  }
  return "?";
}

std::vector<std::string> attr_names(size_t d) {
  std::vector<std::string> out;
  for (size_t k = 0; k < d; ++k) {
    std::string n(1, static_cast<char>('A' + k % 26));
    if (k >= 26) n += std::to_string(k / 26);
    out.push_back(n);
  }
  return out;
}

std::vector<dd_rule> cycle_rules(size_t d, double det_eps, double dep_eps) {
  if (d < 2) throw std::invalid_argument("rule cycle needs at least two attributes");
  std::vector<dd_rule> out;
  for (size_t k = 0; k < d; ++k) out.push_back({{(k + 1) % d}, {det_eps}, k, dep_eps});
  return out;
}

namespace {

using rng_t = std::mt19937_64;

double uniform01(rng_t& g) { return std::uniform_real_distribution<double>(0.0, 1.0)(g); }

double random_peak(rng_t& g, double lo, double hi, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += uniform01(g);
  return lo + (hi - lo) * s / n;
}

double random_normal(rng_t& g, double med, double var) { return random_peak(g, med - var, med + var, 12); }

bool in_unit(const attr_vec& x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return v >= 0.0 && v <= 1.0; });
}

// the classic skyline benchmark constructions on the unit cube
attr_vec benchmark_point(rng_t& g, dist_kind k, size_t d) {
  attr_vec x(d);
  if (k == dist_kind::uniform) {
    for (auto& v : x) v = uniform01(g);
    return x;
  }
  do {
    double v = k == dist_kind::correlated ? random_peak(g, 0.0, 1.0, static_cast<int>(d)) : random_normal(g, 0.5, 0.25);
    double l = v <= 0.5 ? v : 1.0 - v;
    std::fill(x.begin(), x.end(), v);
    for (size_t i = 0; i < d; ++i) {
      double h = k == dist_kind::correlated ? random_normal(g, 0.0, l) : std::uniform_real_distribution<double>(-l, l)(g);
      x[i] += h;
      x[(i + 1) % d] -= h;
    }
  } while (!in_unit(x));
  return x;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double hi = v[mid];
  if (v.size() % 2) return hi;
  double lo = *std::max_element(v.begin(), v.begin() + mid);
  return (lo + hi) / 2;
}

} // namespace

synthetic_data gen_synthetic(const gen_config& cfg) {
  if (cfg.d < 2) throw std::invalid_argument("synthetic data needs d >= 2");
  if (cfg.theta == 0) throw std::invalid_argument("theta must be positive");
  if (!(cfg.domain > 0.0)) throw std::invalid_argument("domain length must be positive");
  synthetic_data out;
  out.rules = cfg.rules.empty() ? cycle_rules(cfg.d) : cfg.rules;
  for (const auto& r : out.rules) check_rule(r, cfg.d);
  out.repo.header = attr_names(cfg.d);
  out.stream.attr_names = out.repo.header;
  const size_t n = cfg.repo_size + cfg.stream_size;
  if (n == 0) return out;

  double det_eps = 0.0, dep_eps = std::numeric_limits<double>::infinity();
  for (const auto& r : out.rules) {
    for (double e : r.det_eps) det_eps = std::max(det_eps, e);
    dep_eps = std::min(dep_eps, r.dep_eps);
  }
  const size_t seeds = std::max<size_t>(1, std::min<size_t>(5000, n / 10));
  out.seeds = seeds;
  const double L = cfg.domain;
  // spread the seeds so two of them never agree within a determinant tolerance
  double delta = std::max(0.0, std::min(dep_eps / 2, (0.8 * L / seeds - det_eps) / 2));
  double gap = (det_eps + 2 * delta) * 1.01;
  if (gap * seeds >= L)
    throw std::invalid_argument(fmt::format("{} seeds cannot be kept {} apart on a domain of length {}", seeds, gap, L));
  double shrink = (L - gap * seeds) / L;

  rng_t g(cfg.seed);
  std::vector<attr_vec> seed_pts(seeds);
  for (auto& s : seed_pts) {
    s = benchmark_point(g, cfg.kind, cfg.d);
    for (auto& v : s) v *= L;
  }
  std::vector<size_t> order(seeds);
  for (size_t k = 0; k < cfg.d; ++k) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return seed_pts[a][k] < seed_pts[b][k]; });
    for (size_t i = 0; i < seeds; ++i) {
      double& v = seed_pts[order[i]][k];
      v = v * shrink + static_cast<double>(i) * gap;
    }
  }

  std::vector<attr_vec> rows;
  rows.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    const attr_vec& s = seed_pts[i < seeds ? i : std::uniform_int_distribution<size_t>(0, seeds - 1)(g)];
    attr_vec r = s;
    if (i >= seeds && delta > 0.0)
      for (auto& v : r) v += std::uniform_real_distribution<double>(-delta, delta)(g);
    rows.push_back(std::move(r));
  }
  std::shuffle(rows.begin(), rows.end(), g);

  out.repo.rows.assign(rows.begin(), rows.begin() + cfg.repo_size);
  const double life = static_cast<double>(cfg.window) / cfg.theta;
  int64_t lo = std::max<int64_t>(1, std::llround(life / 2)), hi = std::max<int64_t>(lo, std::llround(1.5 * life));
  for (size_t i = cfg.repo_size; i < n; ++i) {
    size_t k = i - cfg.repo_size;
    stream_object o;
    o.id = std::to_string(k + 1);
    o.arr = static_cast<int64_t>(k / cfg.theta) + 1;
    o.exp = o.arr + std::uniform_int_distribution<int64_t>(lo, hi)(g);
    for (double v : rows[i]) o.attrs.emplace_back(v);
    out.stream.objects.push_back(std::move(o));
  }
  return out;
}

stream_file mask_stream(const stream_file& s, double xi, size_t m, uint64_t seed) {
  const size_t d = s.attr_names.size();
  if (!(xi >= 0.0 && xi <= 1.0)) throw std::invalid_argument("missing rate must lie in [0,1]");
  if (xi > 0.0 && (m < 1 || m >= d)) throw std::invalid_argument(fmt::format("missing count must lie in [1,{}]", d - 1));
  rng_t g(seed);
  stream_file out = s;
  std::vector<size_t> slots(d);
  for (auto& o : out.objects) {
    if (!(uniform01(g) < xi)) continue;
    std::iota(slots.begin(), slots.end(), 0);
    for (size_t i = 0; i < m; ++i) {
      size_t j = std::uniform_int_distribution<size_t>(i, d - 1)(g);
      std::swap(slots[i], slots[j]);
      o.attrs[slots[i]] = std::nullopt;
    }
  }
  return out;
}

std::vector<dd_violation> dd_violations(const std::vector<attr_vec>& rows, const std::vector<dd_rule>& rules,
                                        size_t limit) {
  std::vector<dd_violation> out;
  std::vector<size_t> order(rows.size());
  for (size_t ri = 0; ri < rules.size(); ++ri) {
    const dd_rule& r = rules[ri];
    size_t lead = r.determinants.front();
    double lead_eps = r.det_eps.front();
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return rows[a][lead] < rows[b][lead]; });
    for (size_t i = 0; i < order.size(); ++i) {
      const attr_vec& a = rows[order[i]];
      for (size_t j = i + 1; j < order.size(); ++j) {
        const attr_vec& b = rows[order[j]];
        if (b[lead] - a[lead] > lead_eps) break;
        bool close = true;
        for (size_t k = 0; k < r.determinants.size() && close; ++k)
          close = std::abs(a[r.determinants[k]] - b[r.determinants[k]]) <= r.det_eps[k];
        if (close && std::abs(a[r.dependent] - b[r.dependent]) > r.dep_eps) {
          out.push_back({ri, std::min(order[i], order[j]), std::max(order[i], order[j])});
          if (out.size() >= limit) return out;
        }
      }
    }
  }
  return out;
}

accuracy f_score(const std::vector<answer_set>& returned, const std::vector<answer_set>& truth, bool macro) {
  accuracy acc;
  std::map<int64_t, std::pair<std::set<std::string>, std::set<std::string>>> ticks;
  for (const auto& a : returned)
    for (const auto& m : a.members) ticks[a.t].first.insert(m.id);
  for (const auto& a : truth) {
    auto& slot = ticks[a.t];
    for (const auto& m : a.members) slot.second.insert(m.id);
  }
  double psum = 0.0, rsum = 0.0;
  size_t counted = 0, skipped = 0;
  for (const auto& [t, sets] : ticks) {
    const auto& [got, want] = sets;
    size_t tp = 0;
    for (const auto& id : got) tp += want.count(id);
    acc.true_positive += tp;
    acc.returned += got.size();
    acc.expected += want.size();
    if (!macro) continue;
    if (want.empty()) {
      ++skipped;
      continue;
    }
    ++counted;
    rsum += static_cast<double>(tp) / want.size();
    psum += got.empty() ? 0.0 : static_cast<double>(tp) / got.size();
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (macro) {
    if (skipped) acc.diagnostics.push_back(fmt::format("{} ticks with an empty truth set left out of the average", skipped));
    if (!counted) {
      acc.diagnostics.push_back("truth is empty at every tick; recall is undefined");
      acc.precision = acc.recall = acc.f = nan;
      return acc;
    }
    acc.precision = psum / counted;
    acc.recall = rsum / counted;
  } else {
    if (acc.expected == 0) {
      acc.diagnostics.push_back("truth is empty at every tick; recall is undefined");
      acc.precision = acc.returned ? 0.0 : nan;
      acc.recall = acc.f = nan;
      return acc;
    }
    acc.recall = static_cast<double>(acc.true_positive) / acc.expected;
    acc.precision = acc.returned ? static_cast<double>(acc.true_positive) / acc.returned : 0.0;
  }
  double s = acc.precision + acc.recall;
  acc.f = s > 0.0 ? 2 * acc.precision * acc.recall / s : 0.0;
  return acc;
}

experiment_config experiment_config::desk() { return experiment_config{}; }

experiment_config experiment_config::paper_scale() {
  experiment_config c;
  c.gen.window = 20000;
  c.gen.repo_size = 120000;
  c.gen.stream_size = 60000;
  return c;
}

void metrics::write(std::ostream& out) const {
  auto kv = [&](const char* k, auto v) { out << k << '=' << v << '\n'; };
  auto kd = [&](const char* k, double v) { out << k << '=' << fmt::format("{:.6g}", v) << '\n'; };
  kv("ticks", ticks);
  kv("arrivals", arrivals);
  kv("rejected", rejected);
  kv("incomplete", incomplete);
  kd("mean_instances", mean_instances);
  kd("u", u);
  kv("pruned_spatial", pruned.spatial);
  kv("pruned_max_corner", pruned.max_corner);
  kv("pruned_min_corner", pruned.min_corner);
  kv("pruned_exact", pruned.exact);
  kv("evicted_spatial", evicted.spatial);
  kv("evicted_max_corner", evicted.max_corner);
  kv("evicted_min_corner", evicted.min_corner);
  kv("evicted_exact", evicted.exact);
  kd("prune_ratio_rules", prune_ratio_rules);
  kd("prune_ratio_total", prune_ratio_total);
  kd("mean_window", mean_window);
  kd("layer1_fraction", layer1_fraction);
  kd("max_layer1_fraction", max_layer1_fraction);
  kd("median_maintain_sec", median_maintain_sec);
  kd("median_query_sec", median_query_sec);
  kd("total_sec", total_sec);
  kv("answers", answers);
  if (quality) {
    kd("precision", quality->precision);
    kd("recall", quality->recall);
    kd("f_score", quality->f);
    kv("true_positive", quality->true_positive);
    kv("truth_answers", quality->expected);
  }
}

void metrics::write_json(std::ostream& out) const {
  nlohmann::json j{{"ticks", ticks},
                   {"arrivals", arrivals},
                   {"rejected", rejected},
                   {"incomplete", incomplete},
                   {"mean_instances", mean_instances},
                   {"u", u},
                   {"pruned",
                    {{"spatial", pruned.spatial},
                     {"max_corner", pruned.max_corner},
                     {"min_corner", pruned.min_corner},
                     {"exact", pruned.exact}}},
                   {"evicted",
                    {{"spatial", evicted.spatial},
                     {"max_corner", evicted.max_corner},
                     {"min_corner", evicted.min_corner},
                     {"exact", evicted.exact}}},
                   {"prune_ratio_rules", prune_ratio_rules},
                   {"prune_ratio_total", prune_ratio_total},
                   {"mean_window", mean_window},
                   {"layer1_fraction", layer1_fraction},
                   {"max_layer1_fraction", max_layer1_fraction},
                   {"median_maintain_sec", median_maintain_sec},
                   {"median_query_sec", median_query_sec},
                   {"total_sec", total_sec},
                   {"answers", answers}};
  if (quality)
    j["quality"] = {{"precision", quality->precision},
                    {"recall", quality->recall},
                    {"f_score", quality->f},
                    {"true_positive", quality->true_positive},
                    {"truth_answers", quality->expected}};
  out << j.dump(2) << '\n';
}

metrics replay(engine& e, const stream_file& s, std::vector<answer_set>* answers, size_t steady_from) {
  metrics m;
  auto t0 = std::chrono::steady_clock::now();
  std::vector<double> maintain, query;
  double frac_sum = 0.0, window_sum = 0.0;
  size_t steady = 0, instance_sum = 0;
  for (const auto& [t, batch] : group_by_arrival(s.objects)) {
    e.process_tick(t, batch);
    const tick_report& r = e.report();
    ++m.ticks;
    m.arrivals += r.arrivals;
    m.rejected += r.rejected;
    for (auto* pc : {&m.pruned, &m.evicted}) {
      const prune_counts& src = pc == &m.pruned ? r.pruned : r.evicted;
      pc->spatial += src.spatial;
      pc->max_corner += src.max_corner;
      pc->min_corner += src.min_corner;
      pc->exact += src.exact;
    }
    std::set<std::string> gaps;
    for (const auto& o : batch)
      if (!o.complete()) gaps.insert(o.id);
    m.incomplete += gaps.size();
    if (!gaps.empty())
      for (auto it = e.current().objects.rbegin(); it != e.current().objects.rend() && (*it)->arr == t; ++it)
        if (gaps.count((*it)->id)) instance_sum += (*it)->instances.size();
    maintain.push_back(r.maintain_sec);
    query.push_back(r.query_sec);
    if (static_cast<size_t>(t) >= steady_from && r.window_size > 0) {
      double frac = static_cast<double>(r.layer1) / r.window_size;
      frac_sum += frac;
      window_sum += r.window_size;
      m.max_layer1_fraction = std::max(m.max_layer1_fraction, frac);
      ++steady;
    }
    m.answers += e.answers().members.size();
    if (answers) answers->push_back(e.answers());
  }
  if (steady) {
    m.layer1_fraction = frac_sum / steady;
    m.mean_window = window_sum / steady;
  }
  if (m.incomplete) m.mean_instances = static_cast<double>(instance_sum) / m.incomplete;
  if (m.arrivals) {
    m.prune_ratio_rules = static_cast<double>(m.pruned.by_rules() + m.evicted.by_rules()) / m.arrivals;
    m.prune_ratio_total = static_cast<double>(m.pruned.total() + m.evicted.total()) / m.arrivals;
  }
  m.median_maintain_sec = median(maintain);
  m.median_query_sec = median(query);
  m.total_sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return m;
}

double tune_for(const repository& repo, const std::vector<dd_rule>& rules, double beta, double eta, double d2,
                double t_cell, double t_sr) {
  cost_params p;
  p.beta = beta;
  p.eta = eta;
  p.d2 = d2;
  p.t_cell = t_cell;
  p.t_sr = t_sr;
  p.n = static_cast<double>(repo.rows.size());
  p.lengths = repo.domain_lengths();
  p.rules = rules;
  return tune_cell_size(p).u;
}

experiment_result run_experiment(const experiment_config& cfg) { return run_experiment(cfg, gen_synthetic(cfg.gen)); }

experiment_result run_experiment(const experiment_config& cfg, const synthetic_data& data) {
  experiment_result res;
  const size_t d = data.repo.dims();
  double u = cfg.u ? *cfg.u : tune_for(data.repo, data.rules, cfg.beta, cfg.eta, cfg.d2, cfg.t_cell, cfg.t_sr);
  if (!(u > 0.0)) throw std::invalid_argument("cell side must be positive");
  auto imp = std::make_shared<const imputer>(data.repo, data.rules, u, cfg.lambda);
  stream_file masked = mask_stream(data.stream, cfg.xi, cfg.m, cfg.gen.seed ^ 0x9e3779b97f4a7c15ULL);

  const size_t theta = std::max<size_t>(1, cfg.gen.theta);
  const size_t steady_from = static_cast<size_t>(std::ceil(1.5 * static_cast<double>(cfg.gen.window) / theta)) + 1;
  engine e({cfg.alpha, d}, imp);
  res.stats = replay(e, masked, &res.answers, steady_from);
  res.stats.u = u;
  if (cfg.truth) {
    engine exact({cfg.alpha, d});
    replay(exact, data.stream, &res.truth, steady_from);
    res.stats.quality = f_score(res.answers, res.truth, cfg.macro);
  }
  return res;
}

} // namespace pskyline
