#include "gemesh/rng.hpp"

#include <cmath>
#include <numbers>

#include "gemesh/errors.hpp"

namespace gemesh {

double Rng::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * std::numbers::pi * u2;
  cached_ = r * std::sin(a);
  has_cached_ = true;
  return r * std::cos(a);
}

uint64_t Rng::below(uint64_t n) {
  check(n > 0, Err::IndexOutOfRange, "Rng::below(0)");
  // Lemire's multiply-shift rejection method
  __uint128_t m = static_cast<__uint128_t>(gen_()) * n;
  uint64_t lo = static_cast<uint64_t>(m);
  if (lo < n) {
    uint64_t threshold = (0 - n) % n;
    while (lo < threshold) {
      m = static_cast<__uint128_t>(gen_()) * n;
      lo = static_cast<uint64_t>(m);
    }
  }
  return static_cast<uint64_t>(m >> 64);
}

std::vector<int> Rng::sample_without_replacement(int n, int k) {
  check(k >= 0 && k <= n, Err::IndexOutOfRange, "sample_without_replacement: k out of range");
  std::vector<int> pool(n);
  for (int i = 0; i < n; ++i) pool[i] = i;
  // partial Fisher-Yates: first k entries are the sample
  for (int i = 0; i < k; ++i) {
    int j = i + static_cast<int>(below(static_cast<uint64_t>(n - i)));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

uint64_t derive_seed(uint64_t root, std::string_view purpose) {
  // FNV-1a over the purpose string, mixed with the root via splitmix64
  uint64_t h = 1469598103934665603ull;
  for (char c : purpose) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  uint64_t z = root + 0x9e3779b97f4a7c15ull + h;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace gemesh
