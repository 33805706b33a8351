#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace ipmgnn {

std::uint64_t splitmix64(std::uint64_t x);

// Seed of the stream used for the index-th item of a batch.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

// mt19937_64 with distribution code written out here, since the standard
// library distributions are allowed to differ between implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  // Uniform integer on [lo, hi], both inclusive, without modulo bias.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  // k distinct values from [0, n), in draw order (partial Fisher-Yates).
  std::vector<int> sample_without_replacement(int n, int k);
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

  static constexpr const char* kName = "mt19937_64/splitmix64";

 private:
  std::mt19937_64 engine_;
};

}  // namespace ipmgnn
