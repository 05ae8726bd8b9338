#include <doctest.h>

#include <gce/rng.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

using gce::Rng;

TEST_CASE("same seed gives the same stream") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) CHECK(a.next() == b.next());
}

TEST_CASE("below stays in range and covers the range") {
  Rng rng(7);
  std::vector<int> seen(10, 0);
  for (int i = 0; i < 10000; ++i) {
    std::uint64_t v = rng.below(10);
    REQUIRE(v < 10);
    ++seen[v];
  }
  for (int count : seen) CHECK(count > 0);
  CHECK(rng.below(1) == 0);
}

TEST_CASE("below(25) is uniform by chi-square at 24 dof") {
  Rng rng(20240815);
  constexpr int draws = 100000;
  constexpr int bins = 25;
  std::vector<double> count(bins, 0.0);
  for (int i = 0; i < draws; ++i) ++count[rng.below(bins)];
  double expected = static_cast<double>(draws) / bins;
  double chi2 = 0.0;
  for (double c : count) chi2 += (c - expected) * (c - expected) / expected;
  // 0.999 quantile of chi-square with 24 dof is 51.18; a biased generator
  // (e.g. plain modulo) lands far above.
  CHECK(chi2 < 51.18);
}

TEST_CASE("uniform01 is in [0,1) and roughly centered") {
  Rng rng(3);
  double sum = 0.0;
  for (int i = 0; i < 20000; ++i) {
    double u = rng.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / 20000 - 0.5) < 0.01);
}

TEST_CASE("normal has the requested moments, roughly") {
  Rng rng(11);
  double sum = 0.0, sq = 0.0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    double x = rng.normal(2.0, 3.0);
    sum += x;
    sq += x * x;
  }
  double mean = sum / n;
  double var = sq / n - mean * mean;
  CHECK(std::abs(mean - 2.0) < 0.1);
  CHECK(std::abs(std::sqrt(var) - 3.0) < 0.1);
}

TEST_CASE("shuffle produces a permutation and depends on the seed") {
  std::vector<int> v(100);
  std::iota(v.begin(), v.end(), 0);
  std::vector<int> w = v;

  Rng a(5);
  a.shuffle(v);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == w);

  std::vector<int> v2(100);
  std::iota(v2.begin(), v2.end(), 0);
  Rng b(5);
  b.shuffle(v2);
  CHECK(v2 == v);

  std::vector<int> v3(100);
  std::iota(v3.begin(), v3.end(), 0);
  Rng c(6);
  c.shuffle(v3);
  CHECK(v3 != v);
}

TEST_CASE("derive gives distinct, stable child seeds") {
  CHECK(Rng::derive(1, 2) == Rng::derive(1, 2));
  CHECK(Rng::derive(1, 2) != Rng::derive(1, 3));
  CHECK(Rng::derive(1, 2) != Rng::derive(2, 2));

  // Child streams should not collide for nearby inputs.
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = 0; s < 100; ++s)
    for (std::uint64_t t = 0; t < 10; ++t)
      seeds.push_back(Rng::derive(s, t));
  std::sort(seeds.begin(), seeds.end());
  CHECK(std::adjacent_find(seeds.begin(), seeds.end()) == seeds.end());
}
