#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace occr {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// FNV-1a; used to fold string identifiers (wallet ids) into seeds.
constexpr std::uint64_t hash_id(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Seed for the substream addressed by `path` under `seed`. Distinct paths
/// give statistically independent engines; the mapping depends on nothing
/// but its arguments, so work can be scheduled in any order.
constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                    std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t x : path) h = splitmix64(h ^ splitmix64(x + 0x632BE59BD9B4E019ULL));
  return h;
}

class Stream {
 public:
  using engine_type = std::mt19937_64;

  explicit Stream(std::uint64_t seed) : engine_(seed) {}

  static Stream sub(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    return Stream(derive_seed(seed, path));
  }

  /// Uniform on [0,1).
  double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0,1]; safe as a base for negative powers and logs.
  double uniform_pos() noexcept {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  double normal() { return normal_(engine_); }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  engine_type& engine() noexcept { return engine_; }

 private:
  engine_type engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace occr
