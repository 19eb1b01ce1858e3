#include "doctest.h"
#include "fixtures.hpp"

#include "pskyline/cost_model.hpp"
#include "pskyline/repo_index.hpp"

using namespace pskyline;
using namespace fixtures;

namespace {

std::vector<size_t> scan(const repository_index& ix, const query_range& q) {
  std::vector<size_t> out;
  for (size_t i = 0; i < ix.size(); ++i)
    if (q.contains(ix.sample(i))) out.push_back(i);
  return out;
}

uint64_t total_count(const repository_index::node& n) {
  uint64_t s = 0;
  for (const auto& b : n.hist) s += b.cnt;
  return s;
}

cost_params single_rule_params() {
  cost_params p;
  p.beta = 0.5;
  p.t_cell = 1e-6;
  p.t_sr = 1e-7;
  p.d2 = 4;
  p.n = 12000;
  p.lengths = {10, 10, 10, 10};
  p.rules = {{{1}, {0.001}, 0, 0.01}};
  return p;
}

} // namespace

TEST_CASE("one cell covering the whole repository") {
  repository_index ix(small_repo(), {0, 1, 2}, 3, 1000.0, 2);
  CHECK(ix.cell_count() == 1);
  CHECK(ix.root().hist.size() == 8);
  CHECK(total_count(ix.root()) == 4);
  CHECK(ix.check().empty());
}

TEST_CASE("range queries on the sensor repository") {
  repository_index ix(small_repo(), {0}, 3, 5.0, 2);
  CHECK(ix.range_query({{{0, {60, 80}}}}) == std::vector<size_t>{1, 2});
  CHECK(ix.range_query({{{0, {0, 1000}}}}) == std::vector<size_t>{0, 1, 2, 3});
  CHECK(ix.range_query({}) == std::vector<size_t>{0, 1, 2, 3});
  CHECK(ix.range_query({{{0, {61, 69}}}}).empty());
}

TEST_CASE("first insertion") {
  repository_index ix({0}, 1, 1.0, 3);
  CHECK(ix.range_query({}).empty());
  ix.insert_sample({2.5, 7});
  CHECK(ix.cell_count() == 1);
  CHECK(ix.size() == 1);
  auto b = ix.attribute_bounds({{{0, {0, 10}}}}, ix.height());
  CHECK(b.any);
  CHECK(b.count_hi == 1);
  CHECK(b.lo == 7);
  CHECK(b.hi == 7);
  CHECK(ix.range_query({{{0, {2, 3}}}}) == std::vector<size_t>{0});
  CHECK_THROWS_AS(ix.insert_sample({1}), dimension_error);
}

TEST_CASE("bucket intervals merge into the dependent bounds") {
  repository r;
  r.header = {"A", "B", "D"};
  r.rows = {{0, 0, 1}, {0, 10, 2}, {10, 0, 3}, {10, 10, 4}, {10, 10, 3.5}};
  // one grid cell [0,20]^2 split into two buckets per attribute at 10
  repository_index ix(r, {0, 1}, 2, 20.0, 2);
  auto all = ix.attribute_bounds({{{0, {-1, 21}}, {1, {-1, 21}}}}, 0);
  CHECK(all.lo == 1);
  CHECK(all.hi == 4);
  CHECK(all.count_lo == 5);
  CHECK(all.count_hi == 5);
  auto part = ix.attribute_bounds({{{0, {11, 21}}}}, ix.height());
  CHECK(part.lo == 3);
  CHECK(part.hi == 4);
  CHECK(part.count_hi == 3);
  CHECK(part.count_lo == 0);
  auto edge = ix.attribute_bounds({{{0, {10, 10}}}}, ix.height());
  CHECK(edge.count_hi == 5);
  CHECK(edge.count_lo == 0);
  auto none = ix.attribute_bounds({{{0, {30, 40}}}}, 0);
  CHECK_FALSE(none.any);
  CHECK(none.count_hi == 0);
  CHECK_THROWS(ix.attribute_bounds({}, ix.height() + 1));
  // a term on an attribute the index does not cover only widens the estimate
  auto wild = ix.attribute_bounds({{{2, {0, 1}}}}, 0);
  CHECK(wild.count_hi == 5);
  CHECK(wild.count_lo == 0);
}

TEST_CASE("randomised index against a linear scan") {
  gen g(41);
  for (int it = 0; it < 150; ++it) {
    size_t width = static_cast<size_t>(g.integer(2, 5));
    std::vector<size_t> dims;
    size_t dep = static_cast<size_t>(g.integer(0, static_cast<int64_t>(width) - 1));
    for (size_t a = 0; a < width; ++a)
      if (a != dep && (dims.empty() || g.coin())) dims.push_back(a);
    double u = g.real(0.2, 5);
    size_t lambda = static_cast<size_t>(g.integer(1, 4));
    size_t fanout = static_cast<size_t>(g.integer(2, 8));
    repository_index ix(dims, dep, u, lambda, fanout);
    size_t n = static_cast<size_t>(g.integer(1, 400));
    for (size_t i = 0; i < n; ++i) {
      attr_vec s(width);
      for (auto& x : s) x = g.coin(0.3) ? static_cast<double>(g.integer(-5, 5)) : g.real(-5, 5);
      ix.insert_sample(s);
      if (i % 37 == 0) REQUIRE(ix.check().empty());
    }
    REQUIRE(ix.check().empty());
    REQUIRE(total_count(ix.root()) == n);
    size_t cells = 0;
    for (const auto& nd : ix.nodes()) cells += nd.cell;
    REQUIRE(cells == ix.cell_count());
    for (int q = 0; q < 20; ++q) {
      query_range range;
      for (size_t a = 0; a < width; ++a)
        if (g.coin(0.6)) {
          double lo = g.real(-6, 5);
          range.terms.push_back({a, {lo, lo + g.real(0, 6)}});
        }
      auto want = scan(ix, range);
      REQUIRE(ix.range_query(range) == want);
      // only terms on indexed attributes are used for bounds
      query_range indexed;
      for (const auto& t : range.terms)
        if (std::find(dims.begin(), dims.end(), t.first) != dims.end()) indexed.terms.push_back(t);
      auto exact = scan(ix, indexed);
      for (size_t depth = 0; depth <= ix.height(); ++depth) {
        auto b = ix.attribute_bounds(indexed, depth);
        REQUIRE(b.count_lo <= exact.size());
        REQUIRE(exact.size() <= b.count_hi);
        for (size_t i : exact) {
          REQUIRE(b.lo <= ix.sample(i)[dep]);
          REQUIRE(ix.sample(i)[dep] <= b.hi);
        }
      }
    }
  }
}

TEST_CASE("bulk build equals incremental insertion") {
  gen g(42);
  repository r;
  r.header = {"A", "B", "C"};
  for (int i = 0; i < 300; ++i) r.rows.push_back({g.real(0, 10), g.real(0, 10), g.real(0, 10)});
  repository_index bulk(r, {0, 1}, 2, 0.7, 3);
  repository_index inc({0, 1}, 2, 0.7, 3);
  for (const auto& row : r.rows) inc.insert_sample(row);
  CHECK(bulk.check().empty());
  CHECK(bulk.cell_count() == inc.cell_count());
  for (int q = 0; q < 50; ++q) {
    double a = g.real(0, 10), b = g.real(0, 10);
    query_range range{{{0, {a, a + 2}}, {1, {b, b + 2}}}};
    REQUIRE(bulk.range_query(range) == inc.range_query(range));
  }
}

TEST_CASE("match estimates grow with the tolerance") {
  gen g(43);
  repository r;
  r.header = {"A", "B", "C"};
  for (int i = 0; i < 500; ++i) r.rows.push_back({g.real(0, 10), g.real(0, 10), g.real(0, 10)});
  repository_index ix(r, {0, 1}, 2, 1.0, 4);
  double tight = ix.estimate_matches({{0, 0.01}});
  double loose = ix.estimate_matches({{0, 1.0}});
  double both = ix.estimate_matches({{0, 0.01}, {1, 0.01}});
  CHECK(tight > 0);
  CHECK(tight < loose);
  CHECK(both < tight);
}

TEST_CASE("cost model against a hand evaluation") {
  // frozen from an independent transcription of the cost formula
  CHECK(estimate_cost(single_rule_params(), 0.4) == doctest::Approx(0.49562406249999996).epsilon(1e-12));
  cost_params p;
  p.beta = 0.3;
  p.t_cell = 2e-6;
  p.t_sr = 5e-7;
  p.d2 = 2.5;
  p.n = 5000;
  p.lengths = {10, 8, 6, 4};
  p.rules = {{{1}, {0.001}, 3, 0.01}, {{0, 2}, {0.5, 0.2}, 3, 0.01}};
  CHECK(estimate_cost(p, 1.3) == doctest::Approx(0.15578610892464076).epsilon(1e-12));
}

TEST_CASE("cost model monotone limits") {
  auto p = single_rule_params();
  p.beta = 1.0;
  for (double u = 0.05; u < 10; u += 0.05) REQUIRE(estimate_cost(p, u + 0.05) < estimate_cost(p, u));
  p.beta = 0.0;
  for (double u = 0.05; u < 10; u += 0.05) REQUIRE(estimate_cost(p, u + 0.05) > estimate_cost(p, u));
  CHECK_THROWS(estimate_cost(p, 0.0));
}

TEST_CASE("tuner iteration bound") {
  auto r = tune_cell_size(single_rule_params());
  CHECK(r.iterations <= 9);
  CHECK(r.u > 0);
  CHECK(r.u < 10);
  cost_params bad = single_rule_params();
  bad.beta = 1.5;
  CHECK_THROWS(tune_cell_size(bad));
  bad = single_rule_params();
  bad.d2 = 7;
  CHECK_THROWS(tune_cell_size(bad));
}

TEST_CASE("tuner lands next to the dense-grid argmin") {
  gen g(44);
  for (int it = 0; it < 50; ++it) {
    cost_params p;
    p.beta = g.real(0.05, 0.95);
    p.t_cell = g.real(1e-7, 1e-5);
    p.t_sr = g.real(1e-8, 1e-6);
    size_t d = static_cast<size_t>(g.integer(2, 6));
    for (size_t k = 0; k < d; ++k) p.lengths.push_back(g.real(1, 20));
    p.d2 = g.coin() ? 0.0 : g.real(0.5, static_cast<double>(d));
    p.n = static_cast<double>(g.integer(1000, 200000));
    size_t rules = static_cast<size_t>(g.integer(1, 3));
    for (size_t r = 0; r < rules; ++r) {
      dd_rule rule{{}, {}, 0, 0.01};
      for (size_t k = 1; k < d; ++k)
        if (rule.determinants.empty() || g.coin(0.3)) {
          rule.determinants.push_back(k);
          rule.det_eps.push_back(g.real(0.0005, 0.5));
        }
      p.rules.push_back(rule);
    }
    auto r = tune_cell_size(p);
    double hi = *std::max_element(p.lengths.begin(), p.lengths.end());
    double best = p.eta / 2, best_cost = estimate_cost(p, best);
    for (double u = p.eta / 2; u <= hi; u += p.eta / 2) {
      double c = estimate_cost(p, u);
      if (c < best_cost) best = u, best_cost = c;
    }
    INFO("argmin " << best << " tuned " << r.u);
    REQUIRE(std::abs(r.u - best) <= 2 * p.eta);
  }
}
