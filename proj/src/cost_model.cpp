#include "pskyline/cost_model.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

namespace pskyline {

void check_cost_params(const cost_params& p) {
  const double d = static_cast<double>(p.lengths.size());
  if (!(p.beta > 0.0 && p.beta < 1.0)) throw std::invalid_argument("beta must lie in (0,1)");
  if (!(p.eta > 0.0)) throw std::invalid_argument("eta must be positive");
  if (p.lengths.empty()) throw std::invalid_argument("domain lengths missing");
  if (p.d2 < 0.0 || p.d2 > d) throw std::invalid_argument(fmt::format("D2 {} outside (0,{}]", p.d2, d));
  for (const auto& r : p.rules)
    for (size_t a : r.determinants)
      if (a >= p.lengths.size()) throw dimension_error("rule attribute outside the domain");
}

double estimate_cost(const cost_params& p, double u) {
  if (!(u > 0.0)) throw std::invalid_argument("cell side must be positive");
  const size_t d = p.lengths.size();
  const double k = (p.d2 > 0.0 ? p.d2 : static_cast<double>(d)) / static_cast<double>(d);
  double total = 0.0;
  for (const auto& r : p.rules) {
    double cell = p.t_cell * p.beta;
    double outside = 1.0, grown = 1.0, tight = 1.0;
    for (size_t x = 0; x < d; ++x) {
      auto it = std::find(r.determinants.begin(), r.determinants.end(), x);
      if (it == r.determinants.end()) {
        cell *= p.lengths[x] / u;
        outside *= std::pow(p.lengths[x], k);
      } else {
        double eps = r.det_eps[static_cast<size_t>(it - r.determinants.begin())];
        cell *= 2.0 * eps / u + 2.0;
        grown *= std::pow(2.0 * eps + 2.0 * u, k);
        tight *= std::pow(2.0 * eps, k);
      }
    }
    double extra = (p.n - 1.0) * p.t_sr * (1.0 - p.beta) * outside * (grown - tight);
    total += cell + extra;
  }
  return total;
}

tune_result tune_cell_size(const cost_params& p) {
  check_cost_params(p);
  double lo = 0.0, hi = *std::max_element(p.lengths.begin(), p.lengths.end());
  const double h = p.eta / 10.0;
  tune_result out;
  while (hi - lo >= 2.0 * p.eta) {
    double u = (lo + hi) / 2.0;
    double slope = (estimate_cost(p, u + h) - estimate_cost(p, u - h)) / (2.0 * h);
    if (slope > 0)
      hi = u;
    else
      lo = u;
    ++out.iterations;
  }
  out.u = (lo + hi) / 2.0;
  return out;
}

} // namespace pskyline
