#include "bootagg/coverage.hpp"

#include <cmath>
#include <string>

#include "bootagg/special_functions.hpp"

namespace bootagg {

double implied_coverage(std::int64_t n) {
  if (n < 1) throw DomainError("implied_coverage: n must be >= 1, got " + std::to_string(n));
  return static_cast<double>(n - 1) / static_cast<double>(n + 1);
}

std::int64_t required_n(double c) {
  if (!(c >= 0.0 && c < 1.0)) {
    throw DomainError("required_n: coverage must be in [0,1), got " + std::to_string(c));
  }
  // Smallest n with (n-1)/(n+1) >= c, i.e. (n-1) - c(n+1) >= 0. The fma keeps
  // the sign test exact in the product; the slack absorbs c's representation
  // error (half an ulp, scaled by n+1). Without it the boundary hit depends
  // on which side the decimal rounded: 0.95 is stored below 38/40 and lands
  // on 39, but 0.8 is stored above 8/10 and would skip its exact n=9.
  const double approx = (c + 1.0) / (1.0 - c);
  std::int64_t n = static_cast<std::int64_t>(std::floor(approx)) - 2;
  if (n < 1) n = 1;
  while (std::fma(-c, static_cast<double>(n + 1), static_cast<double>(n - 1)) <
         -2.3e-16 * static_cast<double>(n + 1)) {
    ++n;
  }
  return n;
}

double jeffreys_mean(std::int64_t n) {
  if (n < 1) throw DomainError("jeffreys_mean: n must be >= 1, got " + std::to_string(n));
  return (static_cast<double>(n) + 0.5) / static_cast<double>(n + 1);
}

RegionInferenceResult jeffreys_interval(std::int64_t z, const CoverageSpec& spec) {
  spec.validate();
  if (z < 0 || z > spec.n) {
    throw DomainError("jeffreys_interval: z must be in [0, n], got z=" + std::to_string(z) +
                      " n=" + std::to_string(spec.n));
  }
  const BetaParams posterior{static_cast<double>(z) + 0.5,
                             static_cast<double>(spec.n - z) + 0.5};
  RegionInferenceResult result;
  result.z = z;
  result.n = spec.n;
  result.jeffreys_mean = posterior.a / (posterior.a + posterior.b);
  result.jeffreys_lower = (z == 0) ? 0.0 : beta_quantile(spec.alpha, posterior);
  return result;
}

}  // namespace bootagg
