#include "doctest.h"
#include "fixtures.hpp"

#include "pskyline/oracle.hpp"
#include "pskyline/skyline_tree.hpp"

using namespace pskyline;
using namespace fixtures;

namespace {

// plays the sensor stream into a bare tree up to and including tick `until`
skyline_tree sensor_tree(int64_t until, double alpha = 0.45) {
  skyline_tree st(alpha);
  for (auto& [t, batch] : sensor_replay()) {
    if (t > until) break;
    st.delete_expired(t);
    for (auto& o : batch) st.insert(std::make_shared<const prob_object>(o));
  }
  st.delete_expired(until);
  return st;
}

const char* tree_at_8 = "layer 1\n"
                        "  (o3, 9, 1, -)\n"
                        "layer 2\n"
                        "    (o6, 10, 2, o3)\n"
                        "    (o2, 12, 2, o3)\n"
                        "layer 3\n"
                        "      (o1, 12, 3, o6)\n";

} // namespace

TEST_CASE("sensor stream tree at t=8") {
  auto st = sensor_tree(8);
  CHECK(st.dump() == tree_at_8);
  CHECK_FALSE(st.contains("o4"));
  CHECK_FALSE(st.contains("o5"));
  CHECK(st.first_layer().size() == 1);
  CHECK(st.first_layer()[0]->id == "o3");
  CHECK(st.parent_of("o6") == std::string("o3"));
  CHECK(st.parent_of("o3") == std::string());
  CHECK(st.children_of("o3") == std::vector<std::string>{"o2", "o6"});
  std::vector<std::string> diag;
  CHECK(st.validate(&diag));
  CHECK(diag.empty());
}

TEST_CASE("sensor stream tree after o3 expires") {
  auto st = sensor_tree(8);
  st.delete_expired(8);
  CHECK(st.dump() == tree_at_8);
  auto gone = st.delete_expired(9);
  REQUIRE(gone.size() == 1);
  CHECK(gone[0]->id == "o3");
  CHECK(st.dump() == "layer 1\n"
                     "  (o6, 10, 1, -)\n"
                     "  (o2, 12, 1, -)\n"
                     "layer 2\n"
                     "    (o1, 12, 2, o6)\n");
  CHECK(st.validate());
}

TEST_CASE("insertion outcomes") {
  skyline_tree st(0.5);
  auto a = std::make_shared<const prob_object>(point_object({5, 5}, "a", 0, 10));
  auto r = st.insert(a);
  CHECK(r.status == insert_status::inserted);
  CHECK(r.layer == 1);
  CHECK(st.parent_of("a") == std::string());
  auto b = std::make_shared<const prob_object>(point_object({1, 1}, "b", 0, 5));
  r = st.insert(b);
  CHECK(r.status == insert_status::pruned);
  CHECK(r.pruner->id == "a");
  CHECK(st.size() == 1);
  auto c = std::make_shared<const prob_object>(point_object({1, 1}, "c", 0, 20));
  r = st.insert(c);
  CHECK(r.status == insert_status::inserted);
  CHECK(r.layer == 2);
  auto top = std::make_shared<const prob_object>(point_object({9, 9}, "top", 0, 30));
  r = st.insert(top);
  CHECK(r.removed.size() == 2);
  CHECK(st.size() == 1);
  CHECK_THROWS(st.insert(top));
}

TEST_CASE("validation catches a bad parent") {
  auto st = sensor_tree(8);
  st.debug_set_parent("o6", "o2");
  std::vector<std::string> diag;
  CHECK_FALSE(st.validate(&diag));
  CHECK_FALSE(diag.empty());
}

TEST_CASE("empty tree") {
  skyline_tree st(0.3);
  CHECK(st.first_layer().empty());
  CHECK(st.layer_count() == 0);
  CHECK(st.validate());
  CHECK(st.delete_expired(100).empty());
  CHECK(st.dump().empty());
  CHECK_THROWS(skyline_tree(0.0));
  CHECK_THROWS(skyline_tree(1.0));
}

TEST_CASE("randomised insert and expire keep the invariants") {
  gen g(51);
  for (int run = 0; run < 120; ++run) {
    double alpha = g.real(0.1, 0.9);
    size_t d = static_cast<size_t>(g.integer(1, 4));
    auto stream = g.stream(120, d, 4, 8, 3, static_cast<int>(g.integer(3, 8)));
    skyline_tree st(alpha);
    std::vector<object_ref> all;
    for (auto& [t, batch] : stream) {
      st.delete_expired(t);
      REQUIRE(st.validate());
      for (auto& o : batch) {
        auto ref = std::make_shared<const prob_object>(o);
        all.push_back(ref);
        st.insert(ref);
        std::vector<std::string> diag;
        INFO(st.dump());
        REQUIRE(st.validate(&diag));
      }
      for (const auto& n : st.nodes()) REQUIRE(n->exp > t);
      auto w = live_window(all, t);
      if (world_count(w) > 5e4) continue;
      auto truth = brute_answer_set(w, alpha);
      for (const auto& id : truth) REQUIRE(st.contains(id));
      auto layer1 = st.first_layer();
      for (const auto& id : truth)
        REQUIRE(std::any_of(layer1.begin(), layer1.end(), [&](const object_ref& o) { return o->id == id; }));
    }
  }
}
