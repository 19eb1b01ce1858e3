#pragma once

#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pskyline/model.hpp"
#include "pskyline/repo_index.hpp"

namespace pskyline {

constexpr size_t instance_cap = 64;

// X -> A_j with tolerance [0, eps] on every attribute of X and on A_j
struct dd_rule {
  std::vector<size_t> determinants;
  std::vector<double> det_eps;
  size_t dependent = 0;
  double dep_eps = 0.0;
};

void check_rule(const dd_rule& r, size_t d);

// one rule per line: `X1,X2->Aj : eps_X1,eps_X2,eps_Aj`; blank and # lines skipped
std::vector<dd_rule> parse_dd_rules(std::istream& in, const std::vector<std::string>& header);
std::vector<dd_rule> load_dd_rules(const std::string& path, const std::vector<std::string>& header);
std::string format_dd_rule(const dd_rule& r, const std::vector<std::string>& header);

struct lattice_node {
  std::vector<size_t> attrs; // sorted union of the combined determinant sets
  std::vector<double> eps;   // intersected tolerance per attrs entry
  double dep_eps = 0.0;
  size_t level = 0;
  uint64_t mask = 0; // which base rules were combined
  double est = 0.0;  // expected repository matches
};

struct lattice {
  size_t dependent = 0;
  std::vector<dd_rule> base;
  std::vector<lattice_node> nodes; // nodes[0] is the empty node
  std::vector<std::vector<size_t>> levels; // node indices per level, in visiting order
};

lattice build_lattice(const std::vector<dd_rule>& rules);
// orders each level by ascending estimated match count, ties by attribute set
void rank_lattice(lattice& lat, const repository_index& index);

struct imputed_distribution {
  size_t attr = 0;
  std::vector<std::pair<double, double>> support; // (value, probability), ascending values
};

query_range node_range(const lattice_node& n, const stream_object& o);

struct selection {
  std::optional<size_t> node; // nullopt means the statistics fallback
  std::vector<size_t> samples;
};

selection select_dd(const lattice& lat, const stream_object& o, const repository_index& index);
imputed_distribution impute_attribute(const stream_object& o, const lattice_node& n, const repository_index& index);
imputed_distribution fallback_impute(size_t attr, const repository& repo);
imputed_distribution distribution_of(size_t attr, const std::vector<double>& values);

// cross product of independent per-attribute distributions, capped at instance_cap
prob_object combine_distributions(const stream_object& o, const std::vector<imputed_distribution>& dists);

class imputer {
public:
  imputer(repository repo, const std::vector<dd_rule>& rules, double u, size_t lambda);

  prob_object impute(const stream_object& o) const;
  // records which lattice level served the attribute, 0 for the fallback
  imputed_distribution impute_one(const stream_object& o, size_t attr, size_t* level = nullptr) const;

  const repository& repo() const { return repo_; }
  const lattice* lattice_for(size_t attr) const;
  const repository_index* index_for(size_t attr) const;

private:
  repository repo_;
  std::map<size_t, lattice> lattices_;
  std::map<size_t, std::unique_ptr<repository_index>> indexes_;
  std::vector<imputed_distribution> fallback_;
};

} // namespace pskyline
