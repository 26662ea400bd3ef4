#pragma once

#include <cstdint>

#include "bootagg/errors.hpp"

namespace bootagg {

/// Sample-image count and significance level for region inference.
struct CoverageSpec {
  std::int64_t n;
  double alpha;

  void validate() const {
    if (n < 1) throw DomainError("CoverageSpec: n must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("CoverageSpec: alpha must be in (0,1)");
  }
};

/// Result of region-occupancy inference: out of n images, z had an empty
/// region; the Jeffreys posterior over the underlying proportion gives the
/// one-sided lower credible bound and the posterior mean.
struct RegionInferenceResult {
  std::int64_t z;
  std::int64_t n;
  double jeffreys_lower;
  double jeffreys_mean;
};

/// Coverage implied by aggregating n images: (n-1)/(n+1).
double implied_coverage(std::int64_t n);

/// Smallest n whose implied coverage reaches c, for c in [0,1). Exact on
/// integral boundaries: required_n(0.95) is 39, not 40.
std::int64_t required_n(double c);

/// Posterior mean (n+0.5)/(n+1) of the Jeffreys model when all n images miss
/// the region.
double jeffreys_mean(std::int64_t n);

/// One-sided Jeffreys interval [lower, 1] for the proportion of images with
/// an empty region, from posterior Beta(z+0.5, n-z+0.5). For z = 0 the lower
/// bound is 0 by the standard boundary rule.
RegionInferenceResult jeffreys_interval(std::int64_t z, const CoverageSpec& spec);

}  // namespace bootagg
