#pragma once

#include <cstdint>

namespace bootagg {

/// Deterministic PRNG with named substreams.
///
/// The generator is PCG32 (XSH-RR output on a 64-bit LCG); substream(i)
/// derives an independent stream from the root seed and the index alone, so
/// replicate i produces the same values whether streams are consumed in
/// parallel, out of order, or not at all. The bit stream depends only on
/// integer arithmetic and is stable across platforms.
class SeededRng {
public:
  static constexpr const char* kAlgorithmId = "pcg32-xsh-rr/substream-v1";

  explicit SeededRng(std::uint64_t seed, std::uint64_t stream = 0);

  /// Stream keyed by (root seed, index). Independent of draws already made.
  SeededRng substream(std::uint64_t index) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  /// Uniform double in [0, 1), 53 random bits.
  double next_double();

  /// Uniform integer in [0, bound), unbiased. bound must be >= 1.
  std::uint64_t next_below(std::uint64_t bound);

  /// Standard normal deviate (Box-Muller, second value cached).
  double next_normal();

  /// Exponential deviate with the given rate.
  double next_exponential(double rate);

private:
  std::uint64_t state_;
  std::uint64_t inc_;
  std::uint64_t seed_;
  std::uint64_t stream_;
  double spare_normal_ = 0.0;
  bool has_spare_normal_ = false;
};

/// SplitMix64 finalizer; used for seed/stream mixing and exposed for tests.
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace bootagg
