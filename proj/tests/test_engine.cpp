#include "doctest.h"
#include "fixtures.hpp"

#include <set>

#include "pskyline/engine.hpp"
#include "pskyline/oracle.hpp"

using namespace pskyline;
using namespace fixtures;

namespace {

std::vector<std::string> ids_of(const window& w) {
  std::vector<std::string> out;
  for (const auto& o : w.objects) out.push_back(o->id);
  std::sort(out.begin(), out.end(), id_less);
  return out;
}

} // namespace

TEST_CASE("skyline probabilities of the sensor window") {
  auto w = w6();
  CHECK(skyline_probability(o3(), w) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(skyline_probability(o4(), w) == doctest::Approx(0.0));
  CHECK(skyline_probability(o5(), w) == doctest::Approx(0.0));
  CHECK(skyline_probability(o6(), w) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(lb_skyline_probability(o4(), w) == 0.0);
  window one;
  one.objects.push_back(std::make_shared<const prob_object>(o4()));
  CHECK(skyline_probability(o4(), one) == 1.0);
  auto c = point_object({1, 2}, "c");
  window two;
  two.objects.push_back(std::make_shared<const prob_object>(c));
  two.objects.push_back(std::make_shared<const prob_object>(point_object({0, 3}, "d")));
  CHECK(lb_skyline_probability(c, two) == skyline_probability(c, two));
  CHECK(ub_skyline_probability(c, two) == skyline_probability(c, two));
}

TEST_CASE("probabilities match the possible-worlds oracle") {
  gen g(61);
  for (int it = 0; it < 400; ++it) {
    auto w = g.small_window();
    auto brute = brute_skyline_probabilities(w);
    for (size_t i = 0; i < w.objects.size(); ++i) {
      const auto& o = *w.objects[i];
      double p = skyline_probability(o, w);
      REQUIRE(std::abs(p - brute[i]) < 1e-9);
      REQUIRE(lb_skyline_probability(o, w) <= p + 1e-12);
      REQUIRE(p <= ub_skyline_probability(o, w) + 1e-12);
    }
  }
}

TEST_CASE("sensor stream replay") {
  engine e({0.45, 4});
  for (auto& [t, batch] : sensor_replay()) {
    e.process_imputed(t, batch);
    REQUIRE(e.report().rejected == 0);
    if (t == 6) {
      CHECK(ids_of(e.current()) == std::vector<std::string>{"o3", "o4", "o5", "o6"});
      CHECK(e.answers().contains("o3"));
      CHECK(e.answers().ids() == brute_answer_set(e.current(), 0.45));
      CHECK(format_answers(e.answers()) == "6: o3@1.000000");
    }
  }
  CHECK(e.tree().dump() == "layer 1\n"
                           "  (o3, 9, 1, -)\n"
                           "layer 2\n"
                           "    (o6, 10, 2, o3)\n"
                           "    (o2, 12, 2, o3)\n"
                           "layer 3\n"
                           "      (o1, 12, 3, o6)\n");
  CHECK(e.answers().ids() == brute_answer_set(e.current(), 0.45));
}

TEST_CASE("idle ticks keep the answers") {
  engine e({0.45, 4});
  for (auto& [t, batch] : sensor_replay())
    if (t <= 6) e.process_imputed(t, batch);
  auto before = e.answers();
  e.process_tick(7, {});
  CHECK(e.report().expired == 0);
  CHECK(e.answers().ids() == before.ids());
  CHECK(e.answers().t == 7);
  for (size_t i = 0; i < before.members.size(); ++i) CHECK(e.answers().members[i].p == before.members[i].p);
}

TEST_CASE("malformed arrivals are rejected one by one") {
  engine e({0.5, 2});
  std::vector<stream_object> batch{
      incomplete("ok", 1, 5, {v(1), v(1)}),
      incomplete("wide", 1, 5, {v(1), v(1), v(1)}),
      incomplete("late", 2, 5, {v(1), v(1)}),
      incomplete("dead", 1, 1, {v(1), v(1)}),
      incomplete("ok", 1, 6, {v(2), v(2)}),
      incomplete("gap", 1, 6, {v(2), gap}),
  };
  e.process_tick(1, batch);
  CHECK(e.report().arrivals == 6);
  CHECK(e.report().rejected == 5);
  CHECK(e.report().diagnostics.size() == 5);
  CHECK(e.current().objects.size() == 1);
  CHECK(e.answers().ids() == std::vector<std::string>{"ok"});
  CHECK_THROWS(e.process_tick(0, {}));
}

TEST_CASE("incomplete arrivals are imputed from the repository") {
  std::vector<dd_rule> rules{{{0}, {10}, 3, 2}};
  auto imp = std::make_shared<const imputer>(small_repo(), rules, 5.0, 2);
  engine e({0.45, 4}, imp);
  e.process_tick(6, {incomplete("o5", 6, 11, {v(70), v(2), v(2), gap})});
  REQUIRE(e.current().objects.size() == 1);
  CHECK(e.current().objects[0]->instances.size() == 2);
  CHECK(e.answers().ids() == std::vector<std::string>{"o5"});
  CHECK_THROWS(engine({0.5, 3}, imp));
}

TEST_CASE("replayed answers match the oracle at every tick") {
  gen g(62);
  for (int run = 0; run < 150; ++run) {
    double alpha = g.real(0.1, 0.9);
    size_t d = static_cast<size_t>(g.integer(1, 4));
    auto stream = g.stream(60, d, 4, 5, 2, static_cast<int>(g.integer(3, 6)));
    engine e({alpha, d});
    std::map<std::string, int64_t> pruned_until;
    int64_t last = stream.rbegin()->first + 6;
    for (int64_t t = 1; t <= last; ++t) {
      auto before = e.answers();
      auto it = stream.find(t);
      e.process_imputed(t, it == stream.end() ? std::vector<prob_object>{} : it->second);
      REQUIRE(e.tree().validate());
      const auto& w = e.current();
      for (const auto& o : w.objects)
        if (!e.tree().contains(o->id) && o->arr == t) pruned_until[o->id] = o->exp;
      if (world_count(w) > 2e5) continue;
      auto truth = brute_answer_set(w, alpha);
      REQUIRE(e.answers().ids() == truth);
      auto brute = brute_skyline_probabilities(w);
      for (const auto& m : e.answers().members) {
        auto it = std::find_if(w.objects.begin(), w.objects.end(), [&](const object_ref& o) { return o->id == m.id; });
        size_t i = static_cast<size_t>(it - w.objects.begin());
        if (m.exact)
          REQUIRE(std::abs(m.p - brute[i]) < 1e-9);
        else
          REQUIRE(m.p <= brute[i] + 1e-9);
      }
      for (const auto& id : truth) {
        auto p = pruned_until.find(id);
        REQUIRE((p == pruned_until.end() || p->second <= t));
      }
      // a tick with deletions only never drops a surviving answer
      if (e.report().arrivals == 0)
        for (const auto& m : before.members)
          if (std::any_of(w.objects.begin(), w.objects.end(), [&](const object_ref& o) { return o->id == m.id; }))
            REQUIRE(e.answers().contains(m.id));
    }
  }
}

TEST_CASE("answer line format") {
  answer_set a;
  a.t = 12;
  a.members = {{"3", 0.5, true}, {"10", 1.0 / 3.0, false}};
  CHECK(format_answers(a) == "12: 3@0.500000 10@0.333333");
  CHECK(format_answers(answer_set{4, {}}) == "4:");
}
