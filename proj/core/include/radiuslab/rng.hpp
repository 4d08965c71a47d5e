// radius-lab: deterministic seeded RNG with per-work-item substreams
#pragma once

#include <cstdint>
#include <random>

namespace radiuslab {

/// Seeded generator. Parallel sweeps derive one independent substream per work
/// item so results do not depend on scheduling.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(mix(seed)) {}

  static Rng substream(std::uint64_t seed, std::uint64_t stream) {
    return Rng(mix(seed + 0x9e3779b97f4a7c15ULL * (stream + 1)));
  }

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }
  double angle() { return uniform(0.0, 6.283185307179586); }
  std::uint64_t next() { return gen_(); }

private:
  // splitmix64 finalizer; decouples nearby seeds
  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::mt19937_64 gen_;
};

}  // namespace radiuslab
