#include <catch2/catch_amalgamated.hpp>

#include "italex/rng.hpp"

using namespace italex;

TEST_CASE("counter rng streams are reproducible and addressable") {
  CounterRng a(42), b(42);
  for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());

  CounterRng c(42);
  c.next_u64();
  CounterRng d(43);
  REQUIRE(c.next_u64() != d.next_u64());
}

TEST_CASE("uniform values land in range") {
  CounterRng rng(7);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  REQUIRE(lo < 0.05);
  REQUIRE(hi > 0.95);
}

TEST_CASE("normal draws have roughly standard moments") {
  CounterRng rng(11);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sumsq += z * z;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  REQUIRE(std::abs(mean) < 0.01);
  REQUIRE(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("index sampling is uniform over the range") {
  CounterRng rng(5);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) counts[rng.index(7)]++;
  for (int c : counts) {
    REQUIRE(c > 9000);
    REQUIRE(c < 11000);
  }
}
