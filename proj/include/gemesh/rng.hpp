#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace gemesh {

// Deterministic randomness. std::mt19937_64 output is fully specified by the
// standard; the std distributions are not, so every draw that must reproduce
// across compilers is implemented here.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t raw() { return gen_(); }

  // uniform in [0, 1) with 53 random bits
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal via Box-Muller (both branches, cached)
  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // unbiased integer in [0, n)
  uint64_t below(uint64_t n);

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

  // k distinct values from [0, n), order randomized
  std::vector<int> sample_without_replacement(int n, int k);

 private:
  std::mt19937_64 gen_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

// Stable sub-seed for a named purpose, so adding a consumer never shifts the
// streams of existing ones.
uint64_t derive_seed(uint64_t root, std::string_view purpose);

}  // namespace gemesh
