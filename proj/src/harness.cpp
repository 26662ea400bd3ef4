#include "bootagg/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "bootagg/coverage.hpp"
#include "bootagg/dataset.hpp"
#include "bootagg/errors.hpp"

namespace bootagg {

ScalarDistribution ScalarDistribution::normal(double mu, double sigma) {
  if (!(sigma > 0.0)) throw DomainError("normal sigma must be positive");
  ScalarDistribution d;
  d.kind_ = Kind::normal;
  d.a_ = mu;
  d.b_ = sigma;
  return d;
}

ScalarDistribution ScalarDistribution::uniform(double a, double b) {
  if (!(a < b)) throw DomainError("uniform needs a < b");
  ScalarDistribution d;
  d.kind_ = Kind::uniform;
  d.a_ = a;
  d.b_ = b;
  return d;
}

ScalarDistribution ScalarDistribution::exponential(double rate) {
  if (!(rate > 0.0)) throw DomainError("exponential rate must be positive");
  ScalarDistribution d;
  d.kind_ = Kind::exponential;
  d.a_ = rate;
  return d;
}

ScalarDistribution ScalarDistribution::discrete(std::vector<double> values,
                                                std::vector<double> probs) {
  if (values.empty() || values.size() != probs.size())
    throw DomainError("discrete distribution needs matching values and probabilities");
  std::vector<size_t> order(values.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t i, size_t j) { return values[i] < values[j]; });
  ScalarDistribution d;
  d.kind_ = Kind::discrete;
  double cum = 0.0;
  for (size_t i : order) {
    if (!(probs[i] >= 0.0)) throw DomainError("discrete probabilities must be >= 0");
    cum += probs[i];
    d.values_.push_back(values[i]);
    d.cum_.push_back(cum);
  }
  if (std::fabs(cum - 1.0) > 1e-9)
    throw DomainError("discrete probabilities must sum to 1");
  d.cum_.back() = 1.0;
  return d;
}

double ScalarDistribution::sample(SeededRng& rng) const {
  switch (kind_) {
    case Kind::normal:
      return a_ + b_ * rng.next_normal();
    case Kind::uniform:
      return a_ + (b_ - a_) * rng.next_double();
    case Kind::exponential:
      return rng.next_exponential(a_);
    case Kind::discrete: {
      double u = rng.next_double();
      for (size_t i = 0; i < cum_.size(); ++i)
        if (u < cum_[i]) return values_[i];
      return values_.back();
    }
  }
  return 0.0;
}

double ScalarDistribution::cdf(double x) const {
  switch (kind_) {
    case Kind::normal:
      return 0.5 * std::erfc(-(x - a_) / (b_ * std::sqrt(2.0)));
    case Kind::uniform:
      if (x <= a_) return 0.0;
      if (x >= b_) return 1.0;
      return (x - a_) / (b_ - a_);
    case Kind::exponential:
      return x <= 0.0 ? 0.0 : -std::expm1(-a_ * x);
    case Kind::discrete: {
      double acc = 0.0;
      for (size_t i = 0; i < values_.size(); ++i)
        if (values_[i] <= x) acc = cum_[i];
      return acc;
    }
  }
  return 0.0;
}

double ScalarDistribution::quantile(double p) const {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile level must be in [0,1]");
  switch (kind_) {
    case Kind::normal: {
      // Monotone bisection on the cdf; +/- 40 sigma brackets any useful level.
      double lo = a_ - 40.0 * b_, hi = a_ + 40.0 * b_;
      for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        (cdf(mid) < p ? lo : hi) = mid;
      }
      return 0.5 * (lo + hi);
    }
    case Kind::uniform:
      return a_ + p * (b_ - a_);
    case Kind::exponential:
      return p >= 1.0 ? std::numeric_limits<double>::infinity()
                      : -std::log1p(-p) / a_;
    case Kind::discrete:
      for (size_t i = 0; i < cum_.size(); ++i)
        if (cum_[i] >= p) return values_[i];
      return values_.back();
  }
  return 0.0;
}

namespace {

CoverageReport finish_report(std::int64_t n, std::int64_t trials, std::int64_t hits) {
  CoverageReport r;
  r.n = n;
  r.trials = trials;
  r.hits = hits;
  r.estimate = static_cast<double>(hits) / static_cast<double>(trials);
  r.theoretical = implied_coverage(n);
  r.mc_std_error =
      std::sqrt(r.estimate * (1.0 - r.estimate) / static_cast<double>(trials));
  return r;
}

// Center column of the single mark in a rendered image: midpoint of the span
// of non-background columns. Throws if the frame is entirely background.
std::int64_t mark_center_column(const RasterImage& img, Rgb background) {
  std::int64_t lo = -1, hi = -1;
  for (std::int64_t col = 0; col < img.width(); ++col) {
    bool any = false;
    for (std::int64_t row = 0; row < img.height(); ++row)
      if (!(img.pixel(col, row) == background)) {
        any = true;
        break;
      }
    if (!any) continue;
    if (lo < 0) lo = col;
    hi = col;
  }
  if (lo < 0) throw DomainError("rendered mark fell entirely outside the frame");
  return (lo + hi) / 2;
}

}  // namespace

CoverageReport simulate_range_coverage(const ScalarDistribution& dist,
                                       std::int64_t n, std::int64_t trials,
                                       const SeededRng& rng) {
  if (n < 2) throw DomainError("range coverage needs n >= 2");
  if (trials < 1) throw DomainError("trials must be >= 1");
  std::int64_t hits = 0;
  for (std::int64_t t = 0; t < trials; ++t) {
    SeededRng trial_rng = rng.substream(static_cast<std::uint64_t>(t));
    double lo = 0.0, hi = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      double x = dist.sample(trial_rng);
      if (i == 0) {
        lo = hi = x;
      } else {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
    }
    double fresh = dist.sample(trial_rng);
    if (fresh >= lo && fresh <= hi) ++hits;
  }
  return finish_report(n, trials, hits);
}

CoverageReport simulate_pipeline_coverage(const ScalarDistribution& generator,
                                          std::int64_t n, std::int64_t trials,
                                          const PlotFrame& frame,
                                          const RenderSpec& spec,
                                          const SeededRng& rng,
                                          std::int64_t dataset_rows) {
  if (spec.kind != RenderKind::point_estimate)
    throw DomainError("pipeline coverage is defined for point-estimate renders");
  if (n < 2) throw DomainError("pipeline coverage needs n >= 2");
  if (trials < 1) throw DomainError("trials must be >= 1");
  if (dataset_rows < 1) throw DomainError("dataset rows must be >= 1");
  frame.validate();
  spec.validate();

  std::int64_t hits = 0;
  for (std::int64_t t = 0; t < trials; ++t) {
    SeededRng trial_rng = rng.substream(static_cast<std::uint64_t>(t));
    std::vector<double> column(static_cast<size_t>(dataset_rows));
    for (double& v : column) v = generator.sample(trial_rng);
    Dataset data = Dataset::from_numeric_columns({spec.value_column}, {column});

    // n + 1 exchangeable resamples: the last one plays the fresh draw.
    SeededRng boot_root = trial_rng.substream(0);
    std::int64_t lo = 0, hi = 0;
    std::int64_t fresh_col = 0;
    for (std::int64_t i = 0; i <= n; ++i) {
      SeededRng res_rng = boot_root.substream(static_cast<std::uint64_t>(i));
      Dataset resample = bootstrap_resample(data, res_rng);
      RasterImage img = render_point_estimate(resample, data, frame, spec);
      std::int64_t center = mark_center_column(img, frame.background);
      if (i == n) {
        fresh_col = center;
      } else if (i == 0) {
        lo = hi = center;
      } else {
        lo = std::min(lo, center);
        hi = std::max(hi, center);
      }
    }
    if (fresh_col >= lo && fresh_col <= hi) ++hits;
  }
  return finish_report(n, trials, hits);
}

RegionInferenceReport simulate_region_inference(const ScalarDistribution& dist,
                                                std::int64_t n, double threshold,
                                                std::int64_t trials,
                                                const SeededRng& rng,
                                                double alpha) {
  if (n < 1) throw DomainError("region inference needs n >= 1");
  if (trials < 1) throw DomainError("trials must be >= 1");
  CoverageSpec spec{n, alpha};
  spec.validate();

  RegionInferenceReport report;
  report.n = n;
  report.trials = trials;
  report.alpha = alpha;
  report.threshold = threshold;
  report.true_p = dist.cdf(threshold);

  double lower_sum = 0.0;
  for (std::int64_t t = 0; t < trials; ++t) {
    SeededRng trial_rng = rng.substream(static_cast<std::uint64_t>(t));
    std::int64_t z = 0;
    for (std::int64_t i = 0; i < n; ++i)
      if (dist.sample(trial_rng) <= threshold) ++z;
    RegionInferenceResult res = jeffreys_interval(z, spec);
    lower_sum += res.jeffreys_lower;
    if (report.true_p >= res.jeffreys_lower) ++report.valid_trials;
  }
  report.validity =
      static_cast<double>(report.valid_trials) / static_cast<double>(trials);
  report.mean_lower = lower_sum / static_cast<double>(trials);
  return report;
}

}  // namespace bootagg
