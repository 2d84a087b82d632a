#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "scnet/rng.hpp"

using scnet::RngState;

TEST_CASE("same seed reproduces the exact stream") {
  RngState a(42), b(42);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
  CHECK(a.draws() == 1000);
}

TEST_CASE("different seeds diverge") {
  RngState a(1), b(2);
  int same = 0;
  for (int i = 0; i < 100; ++i)
    if (a.next_u64() == b.next_u64()) ++same;
  CHECK(same == 0);
}

TEST_CASE("uniform stays in [0, 1) and fills the range") {
  RngState r(7);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double v = r.uniform();
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);
}

TEST_CASE("bounded uniform respects endpoints") {
  RngState r(9);
  for (int i = 0; i < 1000; ++i) {
    const double v = r.uniform(-2.5, 3.5);
    CHECK(v >= -2.5);
    CHECK(v < 3.5);
  }
}

TEST_CASE("normal draws have roughly standard moments") {
  RngState r(11);
  const int n = 100000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = r.normal();
    sum += v;
    sumsq += v * v;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.03);
}

TEST_CASE("below is uniform over small ranges") {
  RngState r(13);
  std::vector<int> counts(5, 0);
  for (int i = 0; i < 50000; ++i) {
    const auto v = r.below(5);
    REQUIRE(v < 5);
    counts[static_cast<std::size_t>(v)] += 1;
  }
  for (int c : counts) CHECK(std::abs(c - 10000) < 500);
}

TEST_CASE("permutation is a bijection") {
  RngState r(17);
  auto p = r.permutation(257);
  std::vector<bool> seen(257, false);
  for (auto v : p) {
    REQUIRE(v >= 0);
    REQUIRE(v < 257);
    CHECK(!seen[static_cast<std::size_t>(v)]);
    seen[static_cast<std::size_t>(v)] = true;
  }
}

TEST_CASE("a fresh state with the same seed restarts the stream") {
  RngState r(23);
  CHECK(r.seed() == 23);
  const auto first = r.next_u64();
  r.next_u64();
  RngState r2(23);
  CHECK(r2.draws() == 0);
  CHECK(r2.next_u64() == first);
}
