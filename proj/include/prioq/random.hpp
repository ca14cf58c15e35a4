#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>

namespace prioq {

/// Seeded random stream. (seed, stream) pairs select independent substreams,
/// so replication r of an experiment can be regenerated on its own.
///
/// Variates are produced by explicit inverse transforms rather than the
/// standard <random> distributions, whose output is implementation defined.
class RandomStream {
public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      0x70726971u};
    engine_.seed(seq);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  /// Uniform index in [0, n).
  std::size_t index(std::size_t n) {
    const auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

private:
  std::mt19937_64 engine_;
};

}  // namespace prioq
