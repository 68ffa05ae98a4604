#pragma once

#include <cstdint>
#include <random>

namespace cellid {

/// Seeded generator with an explicit uniform-double mapping, so sequences are
/// identical across standard libraries and platforms.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  int uniform_int(int n) {
    auto i = static_cast<int>(uniform() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

private:
  std::mt19937_64 gen_;
};

} // namespace cellid
