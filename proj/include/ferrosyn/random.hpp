#pragma once

#include <cstdint>
#include <random>

namespace ferrosyn {

/// Seeded generator with platform-independent real draws. The standard
/// distributions are implementation-defined, so uniform doubles are built
/// directly from the top 53 bits of the engine output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Box-Muller; consumes two draws per call.
  double normal(double mean, double sigma);

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ferrosyn
