#pragma once

#include <cstdint>
#include <random>

namespace sdcn {

// Deterministic random stream. The raw generator is std::mt19937_64 (fully
// specified by the standard); every distribution is implemented here on top
// of the raw 64-bit output, so sequences are identical across standard
// libraries and across serial/parallel execution given the same seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform double in [0, 1), 53-bit resolution.
  double uniform();
  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n); n must be positive.
  std::uint64_t uniform_int(std::uint64_t n);

  /// Standard normal draw (Box-Muller, one spare cached).
  double normal();
  double normal(double mean, double stddev);

  /// Poisson draw; exact inversion for small lambda, PTRS rejection above.
  std::int64_t poisson(double lambda);

  /// Derives a decorrelated seed for an independent substream.
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream);

 private:
  std::int64_t poisson_inversion(double lambda);
  std::int64_t poisson_ptrs(double lambda);

  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace sdcn
