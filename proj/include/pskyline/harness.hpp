#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pskyline/csv_io.hpp"
#include "pskyline/engine.hpp"
#include "pskyline/imputation.hpp"

namespace pskyline {

enum class dist_kind { uniform, correlated, anticorrelated };

dist_kind parse_kind(const std::string& s);
std::string kind_name(dist_kind k);

// A, B, ..., Z, A1, B1, ...
std::vector<std::string> attr_names(size_t d);
// B->A, C->B, ..., A->last, every rule with the same tolerances
std::vector<dd_rule> cycle_rules(size_t d, double det_eps = 0.001, double dep_eps = 0.01);

struct gen_config {
  dist_kind kind = dist_kind::correlated;
  size_t d = 4;
  size_t repo_size = 12000;
  size_t stream_size = 6000;
  size_t window = 2000; // target live-window size
  size_t theta = 30;    // arrivals per tick
  double domain = 10.0;
  uint64_t seed = 1;
  std::vector<dd_rule> rules; // empty means cycle_rules(d)
};

struct synthetic_data {
  repository repo;
  stream_file stream;
  std::vector<dd_rule> rules;
  size_t seeds = 0;
};

synthetic_data gen_synthetic(const gen_config& cfg);

// xi: chance an object loses values; m: how many it loses
stream_file mask_stream(const stream_file& s, double xi, size_t m, uint64_t seed);

struct dd_violation {
  size_t rule = 0;
  size_t a = 0, b = 0; // row indices
};
// pairs that agree on the determinants within tolerance but not on the dependent
std::vector<dd_violation> dd_violations(const std::vector<attr_vec>& rows, const std::vector<dd_rule>& rules,
                                        size_t limit = 10);

struct accuracy {
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
  size_t true_positive = 0;
  size_t returned = 0;
  size_t expected = 0;
  std::vector<std::string> diagnostics;
};

// answer sets are matched by timestamp; micro pools all ticks, macro averages per tick
accuracy f_score(const std::vector<answer_set>& returned, const std::vector<answer_set>& truth, bool macro = false);

struct experiment_config {
  gen_config gen;
  double alpha = 0.5;
  size_t m = 1;
  double xi = 0.3;
  std::optional<double> u; // nullopt tunes the cell side
  size_t lambda = 2;
  double beta = 0.5;
  double eta = 0.01;
  double d2 = 0.0;
  double t_cell = 1e-6;
  double t_sr = 1e-7;
  bool truth = true; // also replay the unmasked stream
  bool macro = false;

  static experiment_config desk();
  static experiment_config paper_scale();
};

struct metrics {
  size_t ticks = 0;
  size_t arrivals = 0;
  size_t rejected = 0;
  size_t incomplete = 0;
  double mean_instances = 0.0; // per incomplete object
  prune_counts pruned;
  prune_counts evicted;
  double prune_ratio_rules = 0.0; // eliminated by the three lemmas
  double prune_ratio_total = 0.0; // lemmas plus the exact test
  double layer1_fraction = 0.0;   // mean over steady-state ticks
  double mean_window = 0.0;
  double max_layer1_fraction = 0.0;
  double median_maintain_sec = 0.0;
  double median_query_sec = 0.0;
  double total_sec = 0.0;
  double u = 0.0;
  size_t answers = 0; // pooled answer count
  std::optional<accuracy> quality;

  void write(std::ostream& out) const;
  void write_json(std::ostream& out) const;
};

struct experiment_result {
  metrics stats;
  std::vector<answer_set> answers;
  std::vector<answer_set> truth;
};

// replays one stream against the engine and fills everything but quality
metrics replay(engine& e, const stream_file& s, std::vector<answer_set>* answers, size_t steady_from = 0);

experiment_result run_experiment(const experiment_config& cfg);
experiment_result run_experiment(const experiment_config& cfg, const synthetic_data& data);

double tune_for(const repository& repo, const std::vector<dd_rule>& rules, double beta, double eta, double d2,
                double t_cell, double t_sr);

} // namespace pskyline
