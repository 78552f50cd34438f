#pragma once

#include <cstdint>

namespace fwm {

/// Counter-based uniform stream: a SplitMix64 sequence whose starting state is
/// a hash of (seed, shot). Draws for one shot never depend on other shots.
class ShotRng {
 public:
  ShotRng(std::uint64_t seed, std::uint64_t shot) : state_(mix(seed ^ mix(shot + 0x632BE59BD9B4E019ULL))) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

}  // namespace fwm
