// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

namespace tsa {

/// Seeded generator with platform-independent draws.
///
/// The std:: distributions are implementation-defined, so bounded integers,
/// uniform reals and normals are derived here directly from mt19937_64 to keep
/// every seeded run bit-identical across standard libraries.
class Rng {
public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed), seed_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, bound). `bound` must be positive.
  std::uint64_t index(std::uint64_t bound);

  /// Standard normal via Box-Muller (no cached second value).
  double normal();

  /// Derive an independent stream for sub-task `stream` (splitmix64 mix).
  Rng split(std::uint64_t stream) const;

  std::uint64_t seed() const noexcept { return seed_; }

private:
  std::mt19937_64 engine_;
  std::uint64_t seed_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

} // namespace tsa
