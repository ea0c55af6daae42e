#pragma once

#include <limits>

#include "twr/linalg.hpp"

namespace twr {

// Cost of activating a stream with gain g: the capacity form charges 1/g^2
// (gains enter the rate as log(1 + g^2 p)), the literal form charges 1/g.
enum class WaterfillForm { capacity, literal };

struct WaterfillResult {
  RVec powers;
  double water_level = 0.0;  // mu; allocations are max(1/mu - cost_i, 0)
};

// Solves p_i = max(1/mu - cost_i, 0) with sum_i p_i = budget by bisecting the
// water level. Streams with nonpositive gain receive nothing.
inline WaterfillResult water_fill(const RVec& gains, double budget,
                                  WaterfillForm form = WaterfillForm::capacity,
                                  double rel_tol = 1e-9, int max_iter = 200) {
  if (gains.size() < 1) throw std::invalid_argument("water_fill: no gains given");
  if (!(budget > 0.0)) throw std::invalid_argument("water_fill: budget must be positive");

  const Index n = gains.size();
  RVec cost(n);
  double min_cost = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < n; ++i) {
    if (gains(i) > 0.0)
      cost(i) = form == WaterfillForm::capacity ? 1.0 / (gains(i) * gains(i)) : 1.0 / gains(i);
    else
      cost(i) = std::numeric_limits<double>::infinity();
    min_cost = std::min(min_cost, cost(i));
  }
  if (!std::isfinite(min_cost))
    throw std::invalid_argument("water_fill: all gains are nonpositive");

  const auto allocated = [&](double depth) {
    double total = 0.0;
    for (Index i = 0; i < n; ++i)
      if (depth > cost(i)) total += depth - cost(i);
    return total;
  };

  // allocated() is continuous and increasing in the water depth 1/mu; the
  // cheapest stream alone absorbs the whole budget at min_cost + budget.
  double lo = min_cost, hi = min_cost + budget, depth = hi;
  for (int it = 0; it < max_iter; ++it) {
    depth = 0.5 * (lo + hi);
    const double total = allocated(depth);
    if (std::abs(total - budget) <= rel_tol * budget) break;
    (total > budget ? hi : lo) = depth;
  }

  WaterfillResult r;
  r.water_level = 1.0 / depth;
  r.powers = RVec::Zero(n);
  for (Index i = 0; i < n; ++i)
    if (depth > cost(i)) r.powers(i) = depth - cost(i);
  return r;
}

}  // namespace twr
