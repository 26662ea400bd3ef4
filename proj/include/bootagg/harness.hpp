#pragma once

#include <cstdint>
#include <vector>

#include "bootagg/raster.hpp"
#include "bootagg/render.hpp"
#include "bootagg/rng.hpp"

namespace bootagg {

// Sampling distributions for the Monte Carlo checks. The discrete family is
// there to exercise ties, where the range-coverage bound is an inequality
// rather than an equality.
class ScalarDistribution {
 public:
  enum class Kind { normal, uniform, exponential, discrete };

  static ScalarDistribution normal(double mu, double sigma);
  static ScalarDistribution uniform(double a, double b);
  static ScalarDistribution exponential(double rate);
  static ScalarDistribution discrete(std::vector<double> values,
                                     std::vector<double> probs);

  Kind kind() const { return kind_; }
  double sample(SeededRng& rng) const;
  double cdf(double x) const;
  // Smallest x with cdf(x) >= p.
  double quantile(double p) const;

 private:
  ScalarDistribution() = default;
  Kind kind_ = Kind::normal;
  double a_ = 0.0, b_ = 1.0;  // (mu, sigma), (a, b), or (rate, unused)
  std::vector<double> values_;
  std::vector<double> cum_;  // cumulative probabilities, same length
};

struct CoverageReport {
  std::int64_t n = 0;
  std::int64_t trials = 0;
  std::int64_t hits = 0;
  double estimate = 0.0;
  double theoretical = 0.0;
  double mc_std_error = 0.0;
};

struct RegionInferenceReport {
  std::int64_t n = 0;
  std::int64_t trials = 0;
  std::int64_t valid_trials = 0;
  double validity = 0.0;
  double alpha = 0.0;
  double threshold = 0.0;
  double true_p = 0.0;   // P(statistic <= threshold)
  double mean_lower = 0.0;
};

// Draw X_1..X_n, form [min, max], check a fresh X lands inside (closed
// interval). Theoretical coverage is (n-1)/(n+1), exact for continuous laws.
CoverageReport simulate_range_coverage(const ScalarDistribution& dist,
                                       std::int64_t n, std::int64_t trials,
                                       const SeededRng& rng);

// Same experiment run through the image pipeline: synthesize a dataset,
// bootstrap n resamples, render each point-estimate mark, and check whether
// the mark of one further resample lands (by center column) inside the column
// range spanned by the n mark centers.
CoverageReport simulate_pipeline_coverage(const ScalarDistribution& generator,
                                          std::int64_t n, std::int64_t trials,
                                          const PlotFrame& frame,
                                          const RenderSpec& spec,
                                          const SeededRng& rng,
                                          std::int64_t dataset_rows = 50);

// Frequentist validity of the Jeffreys lower bound for P(statistic <=
// threshold): per trial, count how many of n draws stay at or below the
// threshold, form the lower bound, and check it does not exceed the true
// probability. Validity across trials should be >= 1 - alpha.
RegionInferenceReport simulate_region_inference(const ScalarDistribution& dist,
                                                std::int64_t n, double threshold,
                                                std::int64_t trials,
                                                const SeededRng& rng,
                                                double alpha = 0.05);

}  // namespace bootagg
