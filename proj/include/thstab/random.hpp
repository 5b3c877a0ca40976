#pragma once

#include <cstdint>
#include <random>

namespace thstab {

/// Seeded generator with a platform-independent mapping to [0,1).
/// std::uniform_real_distribution is implementation-defined, so the
/// conversion is done by hand from the 64-bit Mersenne Twister output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace thstab
