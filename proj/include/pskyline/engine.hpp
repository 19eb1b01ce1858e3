#pragma once

#include <memory>
#include <string>
#include <vector>

#include "pskyline/imputation.hpp"
#include "pskyline/model.hpp"
#include "pskyline/skyline_tree.hpp"

namespace pskyline {

double skyline_probability(const prob_object& obj, const window& w);
// skyline probability of the min corner, never above the exact value
double lb_skyline_probability(const prob_object& obj, const window& w);
// skyline probability of the max corner, never below the exact value
double ub_skyline_probability(const prob_object& obj, const window& w);

struct answer {
  std::string id;
  double p = 0.0;
  bool exact = true; // false when the lower bound alone certified membership
};

struct answer_set {
  int64_t t = 0;
  std::vector<answer> members; // ordered by id_less

  std::vector<std::string> ids() const;
  bool contains(const std::string& id) const;
};

struct update_flags {
  bool insertions = false;
  bool deletions = false;
};

answer_set refine(const skyline_tree& tree, const window& w, double alpha, const answer_set& prev,
                  update_flags flags);

struct prune_counts {
  size_t spatial = 0;
  size_t max_corner = 0;
  size_t min_corner = 0;
  size_t exact = 0; // caught only by the tree's exact dominance test

  size_t by_rules() const { return spatial + max_corner + min_corner; }
  size_t total() const { return by_rules() + exact; }
};

struct tick_report {
  int64_t t = 0;
  size_t arrivals = 0;
  size_t rejected = 0;
  size_t expired = 0;
  size_t inserted = 0;
  prune_counts pruned;  // arrivals eliminated before insertion
  prune_counts evicted; // tree nodes removed by a newer dominator
  size_t window_size = 0;
  size_t tree_size = 0;
  size_t layer1 = 0;
  size_t candidates_checked = 0;
  double maintain_sec = 0.0;
  double query_sec = 0.0;
  std::vector<std::string> diagnostics;
};

class engine {
public:
  explicit engine(query_config cfg, std::shared_ptr<const imputer> imp = nullptr);

  // expire, impute, prune, insert, refine
  const answer_set& process_tick(int64_t t, const std::vector<stream_object>& arrivals);
  // same loop for arrivals that are already probabilistic
  const answer_set& process_imputed(int64_t t, std::vector<prob_object> arrivals);

  const window& current() const { return window_; }
  const skyline_tree& tree() const { return tree_; }
  const answer_set& answers() const { return answers_; }
  const tick_report& report() const { return report_; }
  const query_config& config() const { return cfg_; }

private:
  query_config cfg_;
  std::shared_ptr<const imputer> imputer_;
  window window_;
  skyline_tree tree_;
  answer_set answers_;
  tick_report report_;
  bool started_ = false;

  void expire(int64_t t, update_flags& flags);
  void admit(object_ref o, update_flags& flags);
  bool live(const std::string& id) const;
};

std::string format_answers(const answer_set& a);

} // namespace pskyline
