#include "cdm/rng.hpp"

#include <cmath>

#include "cdm/error.hpp"
#include "doctest.h"

using namespace cdm;

namespace {
// Standard normal CDF via erfc, an independent check on the inverse.
double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
}  // namespace

TEST_CASE("splitmix64 matches the reference first output") {
  CHECK(splitmix64(0) == 0xE220A8397B1DCDAFull);
}

TEST_CASE("inverse_normal_cdf hits textbook quantiles") {
  CHECK(inverse_normal_cdf(0.5) == 0.0);
  CHECK(inverse_normal_cdf(0.975) ==
        doctest::Approx(1.959963984540054).epsilon(1e-14));
  CHECK(inverse_normal_cdf(0.025) ==
        doctest::Approx(-1.959963984540054).epsilon(1e-14));
  CHECK(inverse_normal_cdf(0.8413447460685429) ==
        doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("inverse_normal_cdf round-trips through the CDF") {
  for (double p :
       {1e-12, 1e-8, 1e-4, 0.01, 0.2, 0.5, 0.8, 0.99, 1.0 - 1e-8}) {
    const double x = inverse_normal_cdf(p);
    CHECK(normal_cdf(x) == doctest::Approx(p).epsilon(1e-12));
  }
  double prev = -1e300;
  for (double p = 0.001; p < 1.0; p += 0.001) {
    const double x = inverse_normal_cdf(p);
    CHECK(x > prev);
    prev = x;
  }
}

TEST_CASE("inverse_normal_cdf rejects p outside (0, 1)") {
  CHECK_THROWS_AS(inverse_normal_cdf(0.0), Error);
  CHECK_THROWS_AS(inverse_normal_cdf(1.0), Error);
  CHECK_THROWS_AS(inverse_normal_cdf(-0.5), Error);
}

TEST_CASE("streams are reproducible and distinct") {
  Rng a(42, 0), b(42, 0), c(42, 1), d(7, 0);
  bool distinct_stream = false, distinct_seed = false;
  for (int i = 0; i < 64; ++i) {
    const std::uint64_t va = a.next_u64();
    CHECK(va == b.next_u64());
    if (va != c.next_u64()) distinct_stream = true;
    if (va != d.next_u64()) distinct_seed = true;
  }
  CHECK(distinct_stream);
  CHECK(distinct_seed);
}

TEST_CASE("uniform01 stays strictly inside (0, 1)") {
  Rng rng(123);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform01();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("normal draws have sane first moments") {
  Rng rng(99);
  const int n = 20000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean) < 0.03);
  CHECK(var == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("uniform_index covers its range without bias artifacts") {
  Rng rng(5);
  int counts[7] = {0};
  for (int i = 0; i < 7000; ++i) {
    const std::size_t v = rng.uniform_index(7);
    CHECK(v < 7);
    ++counts[v];
  }
  for (int c : counts) CHECK(c > 800);
  CHECK_THROWS_AS(rng.uniform_index(0), Error);
}
