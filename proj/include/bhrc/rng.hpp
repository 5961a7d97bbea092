#pragma once

// Seeded random streams. Everything downstream draws through this wrapper so
// that runs are bit-reproducible across standard libraries: mt19937_64 output
// is specified by the standard, while distribution adapters are not, so the
// uniform and normal transforms are done by hand here.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "common.hpp"

namespace bhrc {

struct Rng {
  std::mt19937_64 eng;
  bool have_spare = false;
  double spare = 0.0;

  explicit Rng(std::uint64_t seed) : eng(seed) {}

  // Uniform on [0, 1) with 53 random bits.
  double u01() { return double(eng() >> 11) * 0x1.0p-53; }

  // Standard normal via the Marsaglia polar method.
  double normal() {
    if (have_spare) {
      have_spare = false;
      return spare;
    }
    double u, v, s;
    do {
      u = 2.0 * u01() - 1.0;
      v = 2.0 * u01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double f = std::sqrt(-2.0 * std::log(s) / s);
    spare = v * f;
    have_spare = true;
    return u * f;
  }

  // Unbiased integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    std::uint64_t lim = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = eng();
    } while (x >= lim);
    return x % n;
  }

  int index(int n) { return int(below(std::uint64_t(n))); }

  // Index with probability weights[i] / sum(weights). Negative weights are
  // rejected; a zero-sum vector is a caller bug.
  int discrete(const Vec& weights) {
    double total = 0.0;
    for (int i = 0; i < weights.size(); ++i) {
      check_invariant(weights[i] >= 0.0, "NegativeWeight", "discrete() needs nonnegative weights");
      total += weights[i];
    }
    check_invariant(total > 0.0, "ZeroWeight", "discrete() needs a positive total weight");
    double x = u01() * total;
    double acc = 0.0;
    for (int i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      if (x < acc) return i;
    }
    return int(weights.size()) - 1;
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = below(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  // q distinct values from [0, n), order randomized.
  std::vector<int> distinct(int n, int q) {
    check_config(q <= n, "SampleTooLarge", "cannot draw " + std::to_string(q) +
                                               " distinct values from " + std::to_string(n));
    std::vector<char> used(n, 0);
    std::vector<int> out;
    out.reserve(q);
    while (int(out.size()) < q) {
      int x = index(n);
      if (!used[x]) {
        used[x] = 1;
        out.push_back(x);
      }
    }
    return out;
  }

  Vec gaussian_vec(int n) {
    Vec x(n);
    for (int i = 0; i < n; ++i) x[i] = normal();
    return x;
  }

  Mat gaussian_mat(int rows, int cols) {
    Mat x(rows, cols);
    for (int j = 0; j < cols; ++j)
      for (int i = 0; i < rows; ++i) x(i, j) = normal();
    return x;
  }
};

}  // namespace bhrc
