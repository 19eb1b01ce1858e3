#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pskyline/model.hpp"

namespace pskyline {

struct repository {
  std::vector<std::string> header;
  std::vector<attr_vec> rows;

  size_t dims() const { return header.size(); }
  // per-dimension max - min over the rows
  std::vector<double> domain_lengths() const;
};

struct interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double v) const { return lo <= v && v <= hi; }
};

// constraints on some attributes, wildcard elsewhere
struct query_range {
  std::vector<std::pair<size_t, interval>> terms;
  bool contains(const attr_vec& row) const;
};

struct bucket {
  uint64_t cnt = 0;
  double lo = 0.0; // dependent-value interval, meaningful when cnt > 0
  double hi = 0.0;
};

struct bounds {
  bool any = false; // false when no intersecting bucket holds samples
  double lo = 0.0;
  double hi = 0.0;
  uint64_t count_lo = 0;
  uint64_t count_hi = 0;
};

// grid cells of side u under an R-tree style hierarchy; every node keeps a
// lambda^|dims| histogram of counts and dependent-value intervals
class repository_index {
public:
  struct node {
    bool cell = false;
    std::vector<int64_t> key; // grid coordinates, cells only
    attr_vec lo, hi;          // mbr over the indexed dims
    std::vector<int> children;
    std::vector<size_t> samples; // cells only
    int parent = -1;
    std::vector<bucket> hist;
  };

  repository_index(std::vector<size_t> dims, size_t dependent, double u, size_t lambda, size_t fanout = 8);
  repository_index(const repository& repo, std::vector<size_t> dims, size_t dependent, double u,
                   size_t lambda, size_t fanout = 8);

  void insert_sample(const attr_vec& s);
  std::vector<size_t> range_query(const query_range& q) const;
  bounds attribute_bounds(const query_range& q, size_t depth) const;

  const std::vector<size_t>& dims() const { return dims_; }
  size_t dependent() const { return dependent_; }
  double cell_side() const { return u_; }
  size_t lambda() const { return lambda_; }
  size_t height() const; // depth of the cell level, root at 0
  size_t cell_count() const { return cells_.size(); }
  size_t size() const { return samples_.size(); }
  const attr_vec& sample(size_t i) const { return samples_[i]; }
  const std::vector<attr_vec>& samples() const { return samples_; }
  const node& root() const { return nodes_[root_]; }
  const std::vector<node>& nodes() const { return nodes_; }
  int root_id() const { return root_; }

  // expected matches of a tolerance box centred on a repository sample,
  // estimated from the root histogram projected on the constrained dims
  double estimate_matches(const std::vector<std::pair<size_t, double>>& tolerances) const;

  // recounts every histogram from the samples; empty string when consistent
  std::string check() const;

private:
  std::vector<size_t> dims_;
  size_t dependent_;
  double u_;
  size_t lambda_;
  size_t fanout_;
  std::vector<attr_vec> samples_;
  std::vector<node> nodes_;
  int root_ = -1;
  std::map<std::vector<int64_t>, int> cells_;
  std::vector<char> dirty_;

  std::vector<int64_t> cell_key(const attr_vec& s) const;
  int new_node(bool cell);
  int place_sample(size_t i); // returns the cell, creating it when needed
  void attach(int cell);
  void split(int n);
  void grow(int n, const attr_vec& lo, const attr_vec& hi);
  double edge(const node& n, size_t k, size_t b) const;
  size_t bucket_of(const node& n, const attr_vec& s) const;
  void add_to_hist(node& n, const attr_vec& s) const;
  void rebuild_hist(int n);
  void collect(int n, std::vector<size_t>& out) const;
  bool intersects(const attr_vec& lo, const attr_vec& hi, const query_range& q) const;
  bool inside(const attr_vec& lo, const attr_vec& hi, const query_range& q) const;
};

} // namespace pskyline
