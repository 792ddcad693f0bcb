#pragma once

#include <cstdint>
#include <random>

namespace qrng {

/// SplitMix64 finalizer; derives independent sub-seeds from (base, stream).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept;

/// Deterministic sampler for the simulator.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The variate transforms below are written out instead of using
/// <random> distributions, whose algorithms differ between standard library
/// implementations; this keeps simulated streams identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_pos() { return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53; }

  /// Exponential with the given rate (mean 1/rate).
  double exponential(double rate);

  /// Standard normal (Marsaglia polar method).
  double normal();

  /// Poisson variate; Knuth's product method below mean 12, Hoermann's PTRS above.
  std::uint64_t poisson(double mean);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace qrng
