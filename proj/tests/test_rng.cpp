#include <cstdint>

#include <doctest.h>

#include "jumpcal/rng.hpp"

using namespace jumpcal;

TEST_CASE("substreams are reproducible and distinct") {
  Rng a = Rng::stream(42, 7);
  Rng b = Rng::stream(42, 7);
  Rng c = Rng::stream(42, 8);
  for (int i = 0; i < 100; ++i) {
    const std::uint64_t va = a.raw();
    CHECK(va == b.raw());
    CHECK(va != c.raw());
  }
}

TEST_CASE("uniform stays in [0,1) and fills the interval") {
  Rng rng = Rng::stream(1, 0);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    lo = u < lo ? u : lo;
    hi = u > hi ? u : hi;
  }
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);
}

TEST_CASE("poisson sample mean tracks the requested mean") {
  Rng rng = Rng::stream(3, 0);
  for (double mean : {0.5, 5.0, 80.0}) {
    double total = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i)
      total += static_cast<double>(rng.poisson(mean));
    const double avg = total / n;
    // 5 sigma band around the mean.
    const double band = 5.0 * std::sqrt(mean / n);
    CHECK(std::abs(avg - mean) < band);
  }
}

TEST_CASE("exponential has the right mean") {
  Rng rng = Rng::stream(9, 0);
  double total = 0.0;
  const int n = 40000;
  for (int i = 0; i < n; ++i) total += rng.exponential(2.0);
  CHECK(total / n == doctest::Approx(0.5).epsilon(0.03));
}
