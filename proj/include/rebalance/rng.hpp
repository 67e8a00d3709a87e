#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace rebalance {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Mixes a base seed with any number of tag words. Used everywhere a
/// component needs an independent, reproducible stream.
inline std::uint64_t derive_seed(std::uint64_t base) { return splitmix64(base); }

template <class... Rest>
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t next, Rest... rest) {
  return derive_seed(splitmix64(base ^ (next + 0x9E3779B97F4A7C15ull)), rest...);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ull;
  }
  return h;
}

// Stream tags. Each call site mixes one of these so unrelated consumers of the
// same user seed never share a stream.
namespace seeds {
inline constexpr std::uint64_t fold_plan = 0x01;
inline constexpr std::uint64_t learner = 0x02;
inline constexpr std::uint64_t swarm_init = 0x03;
inline constexpr std::uint64_t dynamics = 0x04;
inline constexpr std::uint64_t evaluation = 0x05;
inline constexpr std::uint64_t sigmoid = 0x06;
inline constexpr std::uint64_t mask = 0x07;
inline constexpr std::uint64_t bootstrap = 0x08;
inline constexpr std::uint64_t subset = 0x09;
inline constexpr std::uint64_t jitter = 0x0A;
inline constexpr std::uint64_t final_train = 0x0B;
inline constexpr std::uint64_t resample = 0x0C;
inline constexpr std::uint64_t trial = 0x0D;
inline constexpr std::uint64_t swarm_run = 0x0F;
inline constexpr std::uint64_t synth = 0x10;
}  // namespace seeds

/// mt19937_64 with hand-rolled draw helpers. The standard engine is fully
/// specified, but std::uniform_*_distribution is not; these helpers keep
/// sequences identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

  /// Uniform index in [0, n). Lemire multiply-shift; n must be > 0.
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(next()) * static_cast<unsigned __int128>(n)) >> 64);
  }

  /// Standard normal via Box-Muller with a cached spare.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform01();  // (0, 1]
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * 3.141592653589793238462643383279502884 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace rebalance
