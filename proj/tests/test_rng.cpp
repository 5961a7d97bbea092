#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "bhrc/rng.hpp"
#include "helpers.hpp"

using bhrc::Rng;

TEST_CASE("u01 range, mean, and determinism", "[rng]") {
  Rng rng(42);
  double sum = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    double x = rng.u01();
    REQUIRE(x >= 0.0);
    REQUIRE(x < 1.0);
    sum += x;
  }
  // mean of n uniforms has sd 1/sqrt(12 n) ~ 0.002; allow 5 sd
  REQUIRE(std::abs(sum / n - 0.5) < 0.011);

  Rng a(7), b(7), c(8);
  std::vector<double> xa, xb, xc;
  for (int i = 0; i < 50; ++i) {
    xa.push_back(a.u01());
    xb.push_back(b.u01());
    xc.push_back(c.u01());
  }
  REQUIRE(xa == xb);
  REQUIRE(xa != xc);
}

TEST_CASE("normal moments", "[rng]") {
  Rng rng(11);
  const int n = 40000;
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    double x = rng.normal();
    s1 += x;
    s2 += x * x;
  }
  double mean = s1 / n;
  double var = s2 / n - mean * mean;
  REQUIRE(std::abs(mean) < 0.025);       // 5 sd of the sample mean
  REQUIRE(std::abs(var - 1.0) < 0.036);  // ~5 sd of the sample variance
}

TEST_CASE("below is uniform on its range", "[rng]") {
  Rng rng(3);
  const int bins = 5, draws = 25000;
  std::vector<int> count(bins, 0);
  for (int i = 0; i < draws; ++i) {
    int v = rng.below(bins);
    REQUIRE(v >= 0);
    REQUIRE(v < bins);
    ++count[v];
  }
  for (int b = 0; b < bins; ++b) {
    // each bin: mean 5000, sd ~ 63, allow 5 sd
    REQUIRE(std::abs(count[b] - draws / bins) < 320);
  }
}

TEST_CASE("distinct draws without replacement", "[rng]") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int> got = rng.distinct(10, 4);
    REQUIRE(got.size() == 4);
    std::set<int> uniq(got.begin(), got.end());
    REQUIRE(uniq.size() == 4);
    for (int v : got) {
      REQUIRE(v >= 0);
      REQUIRE(v < 10);
    }
  }
  std::vector<int> all = rng.distinct(6, 6);
  std::set<int> uniq(all.begin(), all.end());
  REQUIRE(uniq.size() == 6);
  REQUIRE(testutil::error_code([&] { rng.distinct(3, 4); }) == "SampleTooLarge");
}

TEST_CASE("discrete respects weights", "[rng]") {
  Rng rng(9);
  bhrc::Vec w(4);
  w << 1.0, 0.0, 3.0, 0.0;
  const int draws = 40000;
  std::vector<int> count(4, 0);
  for (int i = 0; i < draws; ++i) ++count[rng.discrete(w)];
  REQUIRE(count[1] == 0);
  REQUIRE(count[3] == 0);
  // index 0 probability 1/4: mean 10000, sd ~ 87, allow 5 sd
  REQUIRE(std::abs(count[0] - 10000) < 440);
  REQUIRE(count[0] + count[2] == draws);

  bhrc::Vec neg(2);
  neg << 0.5, -0.1;
  REQUIRE(testutil::error_code([&] { rng.discrete(neg); }) == "NegativeWeight");
  bhrc::Vec zero = bhrc::Vec::Zero(3);
  REQUIRE(testutil::error_code([&] { rng.discrete(zero); }) == "ZeroWeight");
}

TEST_CASE("shuffle permutes and is roughly uniform", "[rng]") {
  Rng rng(17);
  std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7};
  rng.shuffle(v);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  REQUIRE(sorted == std::vector<int>({0, 1, 2, 3, 4, 5, 6, 7}));

  // frequency of each of the 6 permutations of 3 items
  std::map<std::vector<int>, int> freq;
  const int trials = 12000;
  for (int i = 0; i < trials; ++i) {
    std::vector<int> p{0, 1, 2};
    rng.shuffle(p);
    ++freq[p];
  }
  REQUIRE(freq.size() == 6);
  for (const auto& [perm, cnt] : freq) {
    // mean 2000, sd ~ 41, allow 5 sd
    REQUIRE(std::abs(cnt - trials / 6) < 210);
  }
}

TEST_CASE("gaussian matrices fill column-major from the normal stream", "[rng]") {
  Rng a(23);
  bhrc::Mat m = a.gaussian_mat(2, 3);
  Rng b(23);
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 2; ++i) REQUIRE(m(i, j) == b.normal());

  Rng c(23);
  bhrc::Vec v = c.gaussian_vec(5);
  REQUIRE(v.size() == 5);
  Rng d(23);
  for (int i = 0; i < 5; ++i) REQUIRE(v[i] == d.normal());
}
