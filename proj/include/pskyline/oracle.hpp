#pragma once

#include <string>
#include <vector>

#include "pskyline/model.hpp"

namespace pskyline {

constexpr double world_guard = 1e6;

struct world_limit_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// choice[i] is the instance picked for window.objects[i]
struct possible_world {
  std::vector<size_t> choice;
  double p = 1.0;
};

double world_count(const window& w);

std::vector<possible_world> enumerate_worlds(const window& w);

double brute_skyline_probability(const prob_object& obj, const window& w);

// one probability per window object, single enumeration pass
std::vector<double> brute_skyline_probabilities(const window& w);

// ids ordered by id_less
std::vector<std::string> brute_answer_set(const window& w, double alpha);

} // namespace pskyline
