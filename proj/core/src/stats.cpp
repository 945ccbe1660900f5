#include "specmon/stats.hpp"

#include <cmath>

#include "specmon/error.hpp"

namespace specmon {

PercentInterval binomial_interval(std::int64_t n, double p, double confidence) {
  if (n <= 0) throw InvalidArgument("binomial_interval: n must be positive");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("binomial_interval: p outside [0,1]");
  if (!(confidence > 0.0 && confidence < 1.0)) throw InvalidArgument("binomial_interval: confidence outside (0,1)");
  if (p == 0.0) return {0.0, 0.0};
  if (p == 1.0) return {100.0, 100.0};

  const double tail = (1.0 - confidence) / 2.0;
  const double lp = std::log(p);
  const double lq = std::log1p(-p);
  const double lgn = std::lgamma(static_cast<double>(n) + 1.0);
  auto pmf = [&](std::int64_t k) {
    const double kd = static_cast<double>(k);
    return std::exp(lgn - std::lgamma(kd + 1.0) - std::lgamma(static_cast<double>(n - k) + 1.0) + kd * lp +
                    static_cast<double>(n - k) * lq);
  };

  std::int64_t lo = 0;
  double cdf = 0.0;
  for (std::int64_t k = 0; k <= n; ++k) {
    cdf += pmf(k);
    if (cdf >= tail) {
      lo = k;
      break;
    }
  }
  std::int64_t hi = n;
  double upper = 0.0;
  for (std::int64_t k = n; k >= 0; --k) {
    upper += pmf(k);
    if (upper >= tail) {
      hi = k;
      break;
    }
  }
  const double nd = static_cast<double>(n);
  return {100.0 * static_cast<double>(lo) / nd, 100.0 * static_cast<double>(hi) / nd};
}

}  // namespace specmon
