#pragma once

#include <cstdint>

namespace specmon {

struct PercentInterval {
  double lo = 0.0;
  double hi = 100.0;

  bool contains(double v) const { return lo <= v && v <= hi; }
};

/// Central binomial acceptance interval for the sample proportion of n trials with success
/// probability p, expressed in percent. Uses exact binomial quantiles.
PercentInterval binomial_interval(std::int64_t n, double p, double confidence);

}  // namespace specmon
