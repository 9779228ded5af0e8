#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace qheat {

// SplitMix64 finalizer; decorrelates consecutive (seed, index) pairs.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

/// Seeded stream owned by the caller. One per trajectory, derived from
/// (master seed, trajectory index), so results do not depend on how
/// trajectories are split across threads.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  static Rng for_index(std::uint64_t master, std::uint64_t index) { return Rng(derive_seed(master, index)); }

  // Uniform on [0, 1) with 53 random bits; identical across standard libraries.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Index drawn with probability proportional to weights[i].
  std::size_t discrete(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    const double r = uniform() * total;
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] <= 0.0) continue;
      last_positive = i;
      acc += weights[i];
      if (r < acc) return i;
    }
    return last_positive;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace qheat
