#pragma once

#include <vector>

#include "pskyline/imputation.hpp"

namespace pskyline {

struct cost_params {
  double beta = 0.5;
  double t_cell = 1e-6; // seconds per visited cell
  double t_sr = 1e-7;   // seconds per refined sample
  double d2 = 0.0;      // correlation fractal dimension, 0 means d
  double n = 0.0;       // repository size
  std::vector<double> lengths; // domain length per dimension
  std::vector<dd_rule> rules;
  double eta = 0.01;
};

void check_cost_params(const cost_params& p);

double estimate_cost(const cost_params& p, double u);

struct tune_result {
  double u = 0.0;
  int iterations = 0;
};

// bisection on the sign of a central difference of estimate_cost
tune_result tune_cell_size(const cost_params& p);

} // namespace pskyline
