#include "bootagg/rng.hpp"

#include <cmath>

#include "bootagg/errors.hpp"

namespace bootagg {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;
constexpr std::uint64_t kPcgMultiplier = 6364136223846793005ull;
}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

SeededRng::SeededRng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream) {
  const std::uint64_t init_state = splitmix64(seed ^ splitmix64(stream));
  inc_ = (splitmix64(stream ^ kGolden) << 1u) | 1u;
  state_ = 0u;
  next_u32();
  state_ += init_state;
  next_u32();
}

SeededRng SeededRng::substream(std::uint64_t index) const {
  return SeededRng(seed_, splitmix64(stream_ ^ splitmix64(index + 1)));
}

std::uint32_t SeededRng::next_u32() {
  const std::uint64_t old = state_;
  state_ = old * kPcgMultiplier + inc_;
  const auto xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
  const auto rot = static_cast<std::uint32_t>(old >> 59u);
  return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
}

std::uint64_t SeededRng::next_u64() {
  const std::uint64_t hi = next_u32();
  const std::uint64_t lo = next_u32();
  return (hi << 32) | lo;
}

double SeededRng::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t SeededRng::next_below(std::uint64_t bound) {
  if (bound == 0) throw DomainError("SeededRng::next_below: bound must be >= 1");
  // Rejection from the top of the 64-bit range keeps draws unbiased.
  const std::uint64_t threshold = (0ull - bound) % bound;
  for (;;) {
    const std::uint64_t r = next_u64();
    if (r >= threshold) return r % bound;
  }
}

double SeededRng::next_normal() {
  if (has_spare_normal_) {
    has_spare_normal_ = false;
    return spare_normal_;
  }
  // Box-Muller; u1 is kept away from zero so the log stays finite.
  const double u1 = (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  const double u2 = next_double();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * M_PI * u2;
  spare_normal_ = radius * std::sin(angle);
  has_spare_normal_ = true;
  return radius * std::cos(angle);
}

double SeededRng::next_exponential(double rate) {
  if (!(rate > 0.0)) throw DomainError("SeededRng::next_exponential: rate must be positive");
  const double u = (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  return -std::log(u) / rate;
}

}  // namespace bootagg
