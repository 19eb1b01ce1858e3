#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pskyline {

constexpr double prob_tol = 1e-9;

using attr_vec = std::vector<double>;

struct dimension_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// one stream tuple; nullopt marks a missing slot
struct stream_object {
  std::string id;
  int64_t arr = 0;
  int64_t exp = 0;
  std::vector<std::optional<double>> attrs;

  bool complete() const;
  size_t missing_count() const;
};

struct instance {
  attr_vec attrs;
  double p = 1.0;
};

struct prob_object {
  std::string id;
  int64_t arr = 0;
  int64_t exp = 0;
  std::vector<instance> instances;
  attr_vec min; // mbr corners
  attr_vec max;

  size_t dims() const { return min.size(); }
};

using object_ref = std::shared_ptr<const prob_object>;

struct window {
  int64_t t = 0;
  std::vector<object_ref> objects;
};

struct query_config {
  double alpha = 0.5;
  size_t d = 4;
};

inline bool prob_ge(double a, double b) { return a >= b - prob_tol; }
inline bool prob_gt(double a, double b) { return a > b + prob_tol; }

inline bool valid_at(const prob_object& o, int64_t t) { return o.arr <= t && t < o.exp; }

bool dominates(const attr_vec& a, const attr_vec& b);
bool weakly_dominates(const attr_vec& a, const attr_vec& b);

// Pr{p dominates q}
double dominance_probability(const prob_object& p, const prob_object& q);
// Pr{p dominates point}
double dominance_probability(const prob_object& p, const attr_vec& point);
// Pr{point dominates q}
double dominance_probability(const attr_vec& point, const prob_object& q);

bool spatial_prune(const prob_object& candidate, const prob_object& other);
bool max_corner_prune(const prob_object& candidate, const prob_object& other, double alpha);
bool min_corner_prune(const prob_object& candidate, const prob_object& other, double alpha);

// merges duplicate instances, checks the probability mass and fills the mbr
prob_object make_prob_object(std::string id, int64_t arr, int64_t exp, std::vector<instance> instances);
prob_object point_object(const attr_vec& v, std::string id = "", int64_t arr = 0, int64_t exp = 1);
prob_object certain_object(const stream_object& o);

// throws std::invalid_argument on a malformed tuple
void check_stream_object(const stream_object& o, size_t d);

// integers compare numerically, everything else lexicographically
bool id_less(const std::string& a, const std::string& b);

} // namespace pskyline
