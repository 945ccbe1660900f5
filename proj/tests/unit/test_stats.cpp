#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "specmon/stats.hpp"

using namespace specmon;

TEST_CASE("degenerate probabilities pin the interval") {
  const auto z = binomial_interval(360, 0.0, 0.999);
  CHECK(z.lo == 0.0);
  CHECK(z.hi == 0.0);
  const auto one = binomial_interval(360, 1.0, 0.999);
  CHECK(one.lo == 100.0);
  CHECK(one.hi == 100.0);
}

TEST_CASE("interval agrees with the recurrence oracle") {
  for (std::int64_t n : {1, 7, 60, 360, 1000, 3600}) {
    for (double p : {0.001, 0.05, 0.25, 0.5, 0.7, 0.99}) {
      for (double conf : {0.9, 0.999}) {
        const auto a = binomial_interval(n, p, conf);
        const auto [lo, hi] = testing::oracle_binomial_interval(n, p, conf);
        INFO("n=" << n << " p=" << p << " conf=" << conf);
        CHECK(a.lo == doctest::Approx(lo));
        CHECK(a.hi == doctest::Approx(hi));
      }
    }
  }
}

TEST_CASE("interval brackets the mean and widens with confidence") {
  const auto narrow = binomial_interval(360, 0.25, 0.9);
  const auto wide = binomial_interval(360, 0.25, 0.999);
  CHECK(narrow.contains(25.0));
  CHECK(wide.lo <= narrow.lo);
  CHECK(wide.hi >= narrow.hi);
  CHECK(wide.lo > 10.0);
  CHECK(wide.hi < 40.0);
}
