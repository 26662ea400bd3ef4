#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "bootagg/coverage.hpp"
#include "bootagg/harness.hpp"

using bootagg::CoverageReport;
using bootagg::PlotFrame;
using bootagg::RegionInferenceReport;
using bootagg::RenderKind;
using bootagg::RenderSpec;
using bootagg::ScalarDistribution;
using bootagg::SeededRng;

namespace {

double binom_pmf(int n, int z, double p) {
  double c = 0.0;  // log C(n, z)
  for (int i = 0; i < z; ++i)
    c += std::log(double(n - i)) - std::log(double(i + 1));
  return std::exp(c + z * std::log(p) + (n - z) * std::log1p(-p));
}

RenderSpec point_spec() {
  RenderSpec spec;
  spec.kind = RenderKind::point_estimate;
  spec.value_column = "v";
  return spec;
}

}  // namespace

TEST_CASE("distribution cdf and quantile basics") {
  auto nrm = ScalarDistribution::normal(0.0, 1.0);
  CHECK(nrm.cdf(0.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(nrm.quantile(0.975) == doctest::Approx(1.959964).epsilon(1e-5));
  CHECK(nrm.cdf(nrm.quantile(0.3)) == doctest::Approx(0.3).epsilon(1e-9));

  auto uni = ScalarDistribution::uniform(2.0, 4.0);
  CHECK(uni.cdf(3.0) == 0.5);
  CHECK(uni.cdf(1.0) == 0.0);
  CHECK(uni.cdf(9.0) == 1.0);
  CHECK(uni.quantile(0.25) == 2.5);

  auto expo = ScalarDistribution::exponential(2.0);
  CHECK(expo.cdf(std::log(2.0) / 2.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(expo.quantile(0.5) == doctest::Approx(std::log(2.0) / 2.0).epsilon(1e-12));
  CHECK(expo.cdf(-1.0) == 0.0);

  auto disc = ScalarDistribution::discrete({2.0, 1.0, 3.0}, {0.5, 0.2, 0.3});
  CHECK(disc.cdf(0.5) == 0.0);
  CHECK(disc.cdf(1.0) == doctest::Approx(0.2));
  CHECK(disc.cdf(1.5) == doctest::Approx(0.2));
  CHECK(disc.cdf(2.0) == doctest::Approx(0.7));
  CHECK(disc.cdf(5.0) == 1.0);
  CHECK(disc.quantile(0.1) == 1.0);
  CHECK(disc.quantile(0.2) == 1.0);
  CHECK(disc.quantile(0.21) == 2.0);
  CHECK(disc.quantile(1.0) == 3.0);
}

TEST_CASE("distribution samples follow the law") {
  SeededRng rng(2024);
  auto disc = ScalarDistribution::discrete({0.0, 1.0, 2.0}, {0.5, 0.3, 0.2});
  int counts[3] = {0, 0, 0};
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) counts[int(disc.sample(rng))]++;
  CHECK(counts[0] / double(draws) == doctest::Approx(0.5).epsilon(0.02));
  CHECK(counts[1] / double(draws) == doctest::Approx(0.3).epsilon(0.03));
  CHECK(counts[2] / double(draws) == doctest::Approx(0.2).epsilon(0.04));

  auto uni = ScalarDistribution::uniform(-1.0, 3.0);
  double sum = 0.0;
  for (int i = 0; i < draws; ++i) sum += uni.sample(rng);
  CHECK(sum / draws == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("distribution parameter validation") {
  CHECK_THROWS_AS(ScalarDistribution::normal(0.0, 0.0), bootagg::DomainError);
  CHECK_THROWS_AS(ScalarDistribution::uniform(2.0, 2.0), bootagg::DomainError);
  CHECK_THROWS_AS(ScalarDistribution::exponential(-1.0), bootagg::DomainError);
  CHECK_THROWS_AS(ScalarDistribution::discrete({1.0}, {0.5}), bootagg::DomainError);
  CHECK_THROWS_AS(ScalarDistribution::discrete({1.0, 2.0}, {0.5}),
                  bootagg::DomainError);
  CHECK_THROWS_AS(ScalarDistribution::normal(0, 1).quantile(1.5),
                  bootagg::DomainError);
}

TEST_CASE("range coverage on a point mass is certain") {
  auto dist = ScalarDistribution::discrete({5.0}, {1.0});
  CoverageReport r = simulate_range_coverage(dist, 2, 200, SeededRng(1));
  CHECK(r.hits == 200);
  CHECK(r.estimate == 1.0);
  CHECK(r.theoretical == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("range coverage matches the order-statistics law for continuous draws") {
  auto dist = ScalarDistribution::normal(0.0, 1.0);
  CoverageReport r = simulate_range_coverage(dist, 39, 10000, SeededRng(1729));
  CHECK(r.n == 39);
  CHECK(r.trials == 10000);
  CHECK(r.theoretical == doctest::Approx(0.95));
  CHECK(std::fabs(r.estimate - 0.95) <= 4.5 * r.mc_std_error);
  CHECK(r.estimate > 0.94);
  CHECK(r.estimate < 0.96);

  // Other continuous families obey the same law.
  CoverageReport u =
      simulate_range_coverage(ScalarDistribution::uniform(0, 1), 19, 4000, SeededRng(3));
  CHECK(std::fabs(u.estimate - 0.9) <= 4.5 * u.mc_std_error);
  CoverageReport e = simulate_range_coverage(ScalarDistribution::exponential(1.5), 9,
                                             4000, SeededRng(4));
  CHECK(std::fabs(e.estimate - 0.8) <= 4.5 * e.mc_std_error);
}

TEST_CASE("ties push range coverage above the bound") {
  auto dist = ScalarDistribution::discrete({0.0, 1.0, 2.0}, {0.5, 0.3, 0.2});
  CoverageReport r = simulate_range_coverage(dist, 9, 10000, SeededRng(99));
  CHECK(r.estimate >= 0.800 - 3.0 * r.mc_std_error);
  // With ties this heavy the excess should be visible, not marginal.
  CHECK(r.estimate > 0.85);
}

TEST_CASE("doubling trials shrinks the reported error like one over root two") {
  auto dist = ScalarDistribution::normal(0.0, 1.0);
  CoverageReport small = simulate_range_coverage(dist, 39, 2500, SeededRng(7));
  CoverageReport large = simulate_range_coverage(dist, 39, 10000, SeededRng(7));
  CHECK(small.mc_std_error / large.mc_std_error == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("range coverage is deterministic in the seed") {
  auto dist = ScalarDistribution::normal(0.0, 1.0);
  CoverageReport a = simulate_range_coverage(dist, 9, 500, SeededRng(42));
  CoverageReport b = simulate_range_coverage(dist, 9, 500, SeededRng(42));
  CHECK(a.hits == b.hits);
  CoverageReport c = simulate_range_coverage(dist, 9, 500, SeededRng(43));
  CHECK(a.hits != c.hits);  // astronomically unlikely to collide
}

TEST_CASE("simulation argument validation") {
  auto dist = ScalarDistribution::normal(0.0, 1.0);
  CHECK_THROWS_AS(simulate_range_coverage(dist, 1, 10, SeededRng(1)),
                  bootagg::DomainError);
  CHECK_THROWS_AS(simulate_range_coverage(dist, 5, 0, SeededRng(1)),
                  bootagg::DomainError);
  PlotFrame frame{-6.0, 6.0, -1.0, 1.0, 100, 50};
  RenderSpec bar;
  bar.kind = RenderKind::bar_chart;
  bar.category_column = "c";
  bar.categories = {"x"};
  CHECK_THROWS_AS(
      simulate_pipeline_coverage(dist, 39, 10, frame, bar, SeededRng(1)),
      bootagg::DomainError);
  CHECK_THROWS_AS(simulate_region_inference(dist, 0, 0.0, 10, SeededRng(1)),
                  bootagg::DomainError);
}

TEST_CASE("pipeline coverage at n=2 tracks one third from above") {
  auto dist = ScalarDistribution::normal(0.0, 1.0);
  PlotFrame frame{-6.0, 6.0, -1.0, 1.0, 300, 60};
  CoverageReport r = simulate_pipeline_coverage(dist, 2, 1000, frame, point_spec(),
                                                SeededRng(11), 50);
  CHECK(r.theoretical == doctest::Approx(1.0 / 3.0));
  // The mark sd here is only ~3.5 columns, so the fresh mark often lands in
  // the same column as an endpoint and the closed-interval test counts it.
  // That inflates the rate above the continuous 1/3 (by roughly the column
  // tie probability); it can never deflate it.
  CHECK(r.estimate >= 1.0 / 3.0 - 3.0 * r.mc_std_error);
  CHECK(r.estimate <= 0.50);
}

TEST_CASE("pipeline coverage tracks the scalar law at moderate n") {
  auto dist = ScalarDistribution::normal(0.0, 1.0);
  PlotFrame frame{-6.0, 6.0, -1.0, 1.0, 300, 50};
  CoverageReport pipe = simulate_pipeline_coverage(dist, 39, 300, frame,
                                                   point_spec(), SeededRng(77), 50);
  CHECK(pipe.estimate >= 0.90);
  CHECK(pipe.estimate <= 0.99);

  // Quantization can only add containment at the ends of the interval, so the
  // pipeline rate must not fall visibly below the scalar rate.
  CHECK(pipe.estimate >= 0.95 - 4.5 * pipe.mc_std_error);
}

TEST_CASE("a one-column frame makes containment certain") {
  auto dist = ScalarDistribution::normal(0.0, 1.0);
  // Asymmetric limits keep the data region strictly inside a single column.
  // (Symmetric limits would put x = 0 exactly on a column boundary and turn
  // the column index into a sign test of the resample mean.)
  PlotFrame frame{-3e6, 1e6, -1.0, 1.0, 50, 20};
  CoverageReport r = simulate_pipeline_coverage(dist, 5, 60, frame, point_spec(),
                                                SeededRng(13), 30);
  CHECK(r.estimate == 1.0);
}

TEST_CASE("pipeline coverage is deterministic in the seed") {
  auto dist = ScalarDistribution::uniform(-1.0, 1.0);
  PlotFrame frame{-2.0, 2.0, -1.0, 1.0, 200, 40};
  CoverageReport a = simulate_pipeline_coverage(dist, 5, 80, frame, point_spec(),
                                                SeededRng(31), 25);
  CoverageReport b = simulate_pipeline_coverage(dist, 5, 80, frame, point_spec(),
                                                SeededRng(31), 25);
  CHECK(a.hits == b.hits);
}

TEST_CASE("region inference is always valid when the threshold clears the support") {
  auto dist = ScalarDistribution::normal(0.0, 1.0);
  RegionInferenceReport r =
      simulate_region_inference(dist, 20, 50.0, 300, SeededRng(17));
  CHECK(r.true_p == 1.0);
  CHECK(r.validity == 1.0);
  CHECK(r.valid_trials == 300);
  CHECK(r.mean_lower > 0.8);  // z = n every trial
}

TEST_CASE("region inference validity matches the exact binomial oracle") {
  auto dist = ScalarDistribution::normal(0.0, 1.0);
  const int n = 39;
  const double alpha = 0.05;
  const double p = 0.98;
  double threshold = dist.quantile(p);
  const int trials = 2000;

  RegionInferenceReport r =
      simulate_region_inference(dist, n, threshold, trials, SeededRng(1729), alpha);
  CHECK(r.true_p == doctest::Approx(p).epsilon(1e-9));

  // Oracle: validity probability = sum over z of pmf(z) where the lower bound
  // at z does not exceed p. Z ~ Binomial(n, p) exactly. At this p every z is
  // valid, so the sum is 1 up to rounding; clamp before forming a variance.
  double oracle = 0.0;
  for (int z = 0; z <= n; ++z) {
    auto res = bootagg::jeffreys_interval(z, {n, alpha});
    if (res.jeffreys_lower <= r.true_p) oracle += binom_pmf(n, z, p);
  }
  oracle = std::min(oracle, 1.0);
  CHECK(oracle >= 1.0 - alpha);  // the frequentist guarantee itself

  double se = std::sqrt(oracle * (1.0 - oracle) / trials);
  CHECK(std::fabs(r.validity - oracle) <= 3.0 * se + 1e-12);
  CHECK(r.validity >= 0.95 - 3.0 * se);
}

TEST_CASE("region inference matches the oracle where validity dips below 1") {
  // p a bit under the z = n lower bound (0.9522 at n=39) makes some outcomes
  // invalid, so the oracle is strictly inside (0,1) and the agreement check
  // actually discriminates. No validity floor here: the one-sided Jeffreys
  // rate genuinely oscillates below 1 - alpha in this regime.
  auto dist = ScalarDistribution::normal(0.0, 1.0);
  const int n = 39;
  const double alpha = 0.05;
  const double p = 0.93;
  const int trials = 2000;

  RegionInferenceReport r = simulate_region_inference(
      dist, n, dist.quantile(p), trials, SeededRng(1729), alpha);
  CHECK(r.true_p == doctest::Approx(p).epsilon(1e-9));

  double oracle = 0.0;
  for (int z = 0; z <= n; ++z) {
    auto res = bootagg::jeffreys_interval(z, {n, alpha});
    if (res.jeffreys_lower <= r.true_p) oracle += binom_pmf(n, z, p);
  }
  CHECK(oracle < 1.0);
  CHECK(oracle > 0.5);

  double se = std::sqrt(oracle * (1.0 - oracle) / trials);
  CHECK(std::fabs(r.validity - oracle) <= 3.0 * se + 1e-12);
}

TEST_CASE("region inference with a single observation") {
  auto dist = ScalarDistribution::normal(0.0, 1.0);
  const double p = 0.98;
  RegionInferenceReport r = simulate_region_inference(dist, 1, dist.quantile(p),
                                                      400, SeededRng(23), 0.05);
  // With one observation the z = 1 lower bound is a genuine number in (0,1).
  auto res = bootagg::jeffreys_interval(1, {1, 0.05});
  CHECK(res.jeffreys_lower > 0.0);
  CHECK(res.jeffreys_lower < 1.0);

  double oracle = 0.0;
  for (int z = 0; z <= 1; ++z) {
    auto zres = bootagg::jeffreys_interval(z, {1, 0.05});
    if (zres.jeffreys_lower <= p) oracle += binom_pmf(1, z, p);
  }
  double se = std::sqrt(oracle * (1.0 - oracle) / 400.0);
  CHECK(std::fabs(r.validity - oracle) <= 3.0 * se + 1e-12);
}
