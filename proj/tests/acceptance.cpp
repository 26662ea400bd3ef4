// Acceptance gate: one pass/fail line per criterion, nonzero exit if any
// fail. Each criterion is self-contained and states its own tolerances;
// runtime limits are enforced with a wall clock where the criterion has one.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "bootagg/aggregate.hpp"
#include "bootagg/coverage.hpp"
#include "bootagg/dataset.hpp"
#include "bootagg/harness.hpp"
#include "bootagg/png_io.hpp"
#include "bootagg/raster.hpp"
#include "bootagg/render.hpp"
#include "bootagg/rng.hpp"
#include "bootagg/special_functions.hpp"
#include "support/quadrature.hpp"
#include "support/testutil.hpp"

namespace fs = std::filesystem;
using namespace bootagg;

namespace {

const std::string kCli = BOOTAGG_CLI_PATH;

struct Outcome {
  bool ok = true;
  std::vector<std::string> notes;
};

void expect(Outcome& o, bool cond, const std::string& what) {
  if (!cond) {
    o.ok = false;
    if (o.notes.size() < 12) o.notes.push_back(what);
  }
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fixture_csv() {
  std::ostringstream ss;
  ss << "x\n";
  char buf[32];
  for (int i = 0; i < 25; ++i) {
    std::snprintf(buf, sizeof(buf), "%.6f\n", 0.3 + 9.2 * i / 24.0);
    ss << buf;
  }
  return ss.str();
}

double log_choose(std::int64_t n, std::int64_t k) {
  return std::lgamma(double(n + 1)) - std::lgamma(double(k + 1)) -
         std::lgamma(double(n - k + 1));
}

// --- criterion 1: coverage table ------------------------------------------

Outcome criterion_table() {
  Outcome o;
  struct Row {
    int n;
    const char* implied;
    const char* mean;
    double lower;
  };
  const Row rows[] = {
      {9, "0.8000", "0.9500", 0.8126},     {19, "0.9000", "0.9750", 0.9051},
      {39, "0.9500", "0.9875", 0.9522},    {199, "0.9900", "0.9975", 0.9904},
      {1999, "0.9990", "0.9998", 0.9990},
  };
  auto t0 = std::chrono::steady_clock::now();
  for (const Row& row : rows) {
    auto res = testutil::run_command(kCli + " coverage --n " + std::to_string(row.n));
    expect(o, res.exit_code == 0, "coverage exited nonzero for n=" + std::to_string(row.n));
    if (res.exit_code != 0) continue;
    expect(o, testutil::kv_lookup(res.output, "implied_coverage") == row.implied,
           "implied_coverage mismatch at n=" + std::to_string(row.n));
    expect(o, testutil::kv_lookup(res.output, "jeffreys_mean") == row.mean,
           "jeffreys_mean mismatch at n=" + std::to_string(row.n));
    double lower = std::stod(testutil::kv_lookup(res.output, "jeffreys_lower"));
    expect(o, std::fabs(lower - row.lower) <= 5e-4,
           "jeffreys_lower off at n=" + std::to_string(row.n));
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  expect(o, secs < 1.0, "runtime " + std::to_string(secs) + "s exceeds 1s");
  return o;
}

// --- criterion 2: scalar range coverage, continuous draws ------------------

Outcome criterion_range_normal() {
  Outcome o;
  auto t0 = std::chrono::steady_clock::now();
  SeededRng rng(1729);
  CoverageReport r =
      simulate_range_coverage(ScalarDistribution::normal(0.0, 1.0), 39, 10000, rng);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  expect(o, r.theoretical == 0.95, "theoretical coverage is not 0.95");
  expect(o, std::fabs(r.estimate - 0.950) <= 0.010,
         "estimate " + std::to_string(r.estimate) + " outside 0.950 +- 0.010");
  expect(o, secs < 5.0, "runtime " + std::to_string(secs) + "s exceeds 5s");
  return o;
}

// --- criterion 3: coverage inequality under ties ---------------------------

Outcome criterion_range_ties() {
  Outcome o;
  auto t0 = std::chrono::steady_clock::now();
  SeededRng rng(1729);
  CoverageReport r = simulate_range_coverage(
      ScalarDistribution::discrete({0.0, 0.5, 1.0}, {0.5, 0.3, 0.2}), 9, 10000, rng);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  expect(o, r.theoretical == 0.80, "theoretical coverage is not 0.80");
  expect(o, r.estimate >= 0.800 - 3.0 * r.mc_std_error,
         "estimate " + std::to_string(r.estimate) + " below 0.800 - 3se");
  expect(o, secs < 5.0, "runtime " + std::to_string(secs) + "s exceeds 5s");
  return o;
}

// --- criterion 4: binary stack mass conservation ---------------------------

Outcome criterion_conservation() {
  Outcome o;
  SeededRng rng(2026);
  for (int n = 2; n <= 200; ++n) {
    // Fresh skewed distribution over which of the 3 pixels each image lights.
    double w0 = rng.next_double();
    double w1 = rng.next_double() * (1.0 - w0);
    std::vector<RasterImage> imgs;
    imgs.reserve(size_t(n));
    for (int i = 0; i < n; ++i) {
      RasterImage img(3, 1, kBlack);
      double u = rng.next_double();
      int lit = u < w0 ? 0 : (u < w0 + w1 ? 1 : 2);
      img.set_pixel(lit, 0, kWhite);
      imgs.push_back(std::move(img));
    }
    AggregateImage agg = mean_aggregate(ImageStack(std::move(imgs)));
    double sum = agg.channel(0, 0, 0) + agg.channel(1, 0, 0) + agg.channel(2, 0, 0);
    expect(o, std::fabs(sum - 1.0) <= 1e-12,
           "pixel means sum to " + std::to_string(sum) + " at n=" + std::to_string(n));
    expect(o, std::fabs(sum / 3.0 - 1.0 / 3.0) <= 1e-12,
           "grand mean off at n=" + std::to_string(n));
  }
  return o;
}

// --- criterion 5: transform property fuzz ----------------------------------

Outcome criterion_transform_fuzz() {
  Outcome o;
  SeededRng rng(555);
  std::int64_t checks = 0;
  for (int c = 0; c < 2500; ++c) {
    TransformParams p;
    p.slope = 0.2 + 20.0 * rng.next_double();
    p.threshold = 0.01 + 0.48 * rng.next_double();
    double x = rng.next_double();

    double fx = transform_scalar(x, p);
    expect(o, std::fabs(fx + transform_scalar(1.0 - x, p) - 1.0) <= 1e-12,
           "symmetry violated");
    ++checks;
    expect(o, fx >= p.threshold - 1e-15 && fx <= 1.0 - p.threshold + 1e-15,
           "range violated");
    ++checks;
    double y = rng.next_double();
    double lo = std::min(x, y), hi = std::max(x, y);
    expect(o, transform_scalar(lo, p) <= transform_scalar(hi, p) + 1e-15,
           "monotonicity violated");
    ++checks;

    // Random frequency table over distinct channel values.
    int m = 1 + int(rng.next_below(8));
    ChannelFrequencyTable table;
    std::uint8_t v = std::uint8_t(rng.next_below(40));
    for (int e = 0; e < m; ++e) {
      table.entries.push_back({v, std::int64_t(1 + rng.next_below(50))});
      table.total += table.entries.back().count;
      v = std::uint8_t(v + 1 + rng.next_below(20));
    }
    std::vector<double> hat = transform_frequencies(table, p);
    double sum = 0.0;
    for (double w : hat) sum += w;
    expect(o, hat.size() == size_t(m), "weight count mismatch");
    expect(o, std::fabs(sum - 1.0) <= 1e-12, "simplex sum violated");
    ++checks;
    if (m == 1) expect(o, hat[0] == 1.0, "single-entry table must map to [1.0]");
  }
  expect(o, checks >= 10000,
         "only " + std::to_string(checks) + " fuzz checks ran");

  // Disabled transform must equal the plain mean, channel doubles identical.
  for (int rep = 0; rep < 10; ++rep) {
    int n = 2 + int(rng.next_below(10));
    int w = 1 + int(rng.next_below(6)), h = 1 + int(rng.next_below(6));
    std::vector<RasterImage> imgs;
    for (int i = 0; i < n; ++i) {
      RasterImage img(w, h);
      for (auto& b : img.bytes()) b = std::uint8_t(rng.next_below(256));
      imgs.push_back(std::move(img));
    }
    ImageStack stack(std::move(imgs));
    TransformParams off;
    off.enabled = false;
    expect(o, transform_aggregate(stack, off).channels() ==
                  mean_aggregate(stack).channels(),
           "disabled transform differs from mean aggregate");
  }
  return o;
}

// --- criterion 6: incomplete-beta oracle equivalence -----------------------

Outcome criterion_beta_oracles() {
  Outcome o;
  // Integer shapes: I_x(a,b) = sum_{j=a}^{a+b-1} C(a+b-1,j) x^j (1-x)^(a+b-1-j).
  for (int a = 1; a <= 5; ++a)
    for (int b = 1; b <= 5; ++b)
      for (int xi = 0; xi <= 20; ++xi) {
        double x = xi / 20.0;
        int nn = a + b - 1;
        double closed = 0.0;
        for (int j = a; j <= nn; ++j)
          closed += std::exp(log_choose(nn, j)) * std::pow(x, j) *
                    std::pow(1.0 - x, nn - j);
        if (x == 0.0) closed = 0.0;
        if (x == 1.0) closed = 1.0;
        double got = reg_inc_beta(x, {double(a), double(b)});
        expect(o, std::fabs(got - closed) <= 1e-12,
               "integer-shape mismatch at a=" + std::to_string(a) +
                   " b=" + std::to_string(b) + " x=" + std::to_string(x));
      }

  SeededRng rng(808);
  for (int c = 0; c < 1000; ++c) {
    double a = 0.1 + 99.9 * rng.next_double();
    double b = 0.1 + 99.9 * rng.next_double();
    double x = rng.next_double();
    double got = reg_inc_beta(x, {a, b});
    double ref = oracle::beta_cdf_quadrature(x, a, b);
    expect(o, std::fabs(got - ref) <= 1e-9,
           "quadrature mismatch at a=" + std::to_string(a) + " b=" +
               std::to_string(b) + " x=" + std::to_string(x));
  }

  for (int c = 0; c < 1000; ++c) {
    double a = 0.1 + 99.9 * rng.next_double();
    double b = 0.1 + 99.9 * rng.next_double();
    double p = 0.001 + 0.998 * rng.next_double();
    double x = beta_quantile(p, {a, b});
    expect(o, std::fabs(reg_inc_beta(x, {a, b}) - p) <= 1e-9,
           "quantile round-trip off at a=" + std::to_string(a) + " b=" +
               std::to_string(b) + " p=" + std::to_string(p));
  }
  return o;
}

// --- criterion 7: kept stack interval matches recomputed marks -------------

Outcome criterion_interval_exactness() {
  Outcome o;
  testutil::TempDir dir;
  testutil::write_file(dir.file("data.csv"), fixture_csv());
  const std::string out = dir.file("agg.png");
  auto res = testutil::run_command(
      kCli + " run --data " + dir.file("data.csv") +
      " --n 39 --seed 4242 --builtin point_estimate --column x --out " + out +
      " --size 300x100 --xlim 0:10 --ylim 0:1 --keep-stack");
  expect(o, res.exit_code == 0, "run exited nonzero:\n" + res.output);
  if (res.exit_code != 0) return o;

  const fs::path stack_dir = fs::path(dir.path()) / "agg_stack";
  std::vector<RasterImage> images;
  std::vector<std::int64_t> centers, mins, maxs;
  for (int i = 0; i < 39; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "replicate_%04d.png", i);
    fs::path p = stack_dir / name;
    if (!fs::exists(p)) {
      expect(o, false, std::string("missing ") + name);
      return o;
    }
    RasterImage img = read_png_file(p);
    std::int64_t lo = img.width(), hi = -1;
    for (int row = 0; row < img.height(); ++row)
      for (int col = 0; col < img.width(); ++col)
        if (!(img.pixel(col, row) == kWhite)) {
          lo = std::min<std::int64_t>(lo, col);
          hi = std::max<std::int64_t>(hi, col);
        }
    expect(o, hi >= 0, std::string(name) + " is blank");
    expect(o, (lo + hi) % 2 == 0, std::string(name) + " mark is not symmetric");
    centers.push_back((lo + hi) / 2);
    mins.push_back(lo);
    maxs.push_back(hi);
    images.push_back(std::move(img));
  }

  ImageStack stack(std::move(images));
  auto [obs_lo, obs_hi] = observed_interval(stack, Axis::horizontal);
  std::int64_t scan_lo = *std::min_element(mins.begin(), mins.end());
  std::int64_t scan_hi = *std::max_element(maxs.begin(), maxs.end());
  std::int64_t c_lo = *std::min_element(centers.begin(), centers.end());
  std::int64_t c_hi = *std::max_element(centers.begin(), centers.end());
  expect(o, obs_lo == scan_lo && obs_hi == scan_hi,
         "observed interval does not match the per-image scan");
  // mark_size 3 inks two columns either side of each center.
  expect(o, obs_lo == c_lo - 2 && obs_hi == c_hi + 2,
         "observed interval does not bracket the mark centers");

  // Recompute the 39 resample means straight from the resample stream and
  // map them through the frame; they must hit the scanned centers exactly.
  Dataset data = load_dataset_csv_file(dir.file("data.csv"));
  const std::vector<double>& x = data.numeric_column("x");
  PlotFrame frame{0.0, 10.0, 0.0, 1.0, 300, 100, kWhite};
  SeededRng root(4242);
  for (int i = 0; i < 39; ++i) {
    SeededRng rng = root.substream(std::uint64_t(i));
    std::vector<std::size_t> idx = resample_indices(data.row_count(), rng);
    double mean = 0.0;
    for (std::size_t j : idx) mean += x[j];
    mean /= double(idx.size());
    PixelCoord pc = frame.data_to_pixel(mean, 0.5);
    expect(o, pc.col == centers[size_t(i)],
           "replicate " + std::to_string(i) + ": recomputed mean lands at col " +
               std::to_string(pc.col) + ", rendered mark at " +
               std::to_string(centers[size_t(i)]));
  }
  return o;
}

// --- criterion 8: pipeline coverage ----------------------------------------

Outcome criterion_pipeline() {
  Outcome o;
  auto t0 = std::chrono::steady_clock::now();
  PlotFrame frame{-6.0, 6.0, -1.0, 1.0, 300, 150, kWhite};
  RenderSpec spec;
  spec.kind = RenderKind::point_estimate;
  spec.value_column = "value";
  spec.mark_size = 3;
  SeededRng rng(1729);
  CoverageReport r = simulate_pipeline_coverage(
      ScalarDistribution::normal(0.0, 1.0), 39, 1000, frame, spec, rng, 50);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  expect(o, r.estimate >= 0.92 && r.estimate <= 0.98,
         "estimate " + std::to_string(r.estimate) + " outside [0.92, 0.98]");
  expect(o, secs < 120.0, "runtime " + std::to_string(secs) + "s exceeds 2min");
  return o;
}

// --- criterion 9: region inference validity --------------------------------

Outcome criterion_region() {
  Outcome o;
  // Full-occupancy bound must be the same quantile the coverage table prints.
  RegionInferenceResult full = jeffreys_interval(39, {39, 0.05});
  double q = beta_quantile(0.05, {39.5, 0.5});
  expect(o, full.jeffreys_lower == q, "z=n lower bound is not the Beta quantile");
  expect(o, std::fabs(full.jeffreys_lower - 0.9522) <= 5e-4,
         "z=n lower bound off the table value");
  auto res = testutil::run_command(kCli + " coverage --n 39");
  char printed[16];
  std::snprintf(printed, sizeof(printed), "%.4f", full.jeffreys_lower);
  expect(o, res.exit_code == 0 &&
                testutil::kv_lookup(res.output, "jeffreys_lower") == printed,
         "CLI prints a different bound than the library computes");

  ScalarDistribution dist = ScalarDistribution::normal(0.0, 1.0);
  double threshold = dist.quantile(0.98);
  SeededRng rng(1729);
  RegionInferenceReport r = simulate_region_inference(dist, 39, threshold, 2000, rng, 0.05);
  expect(o, std::fabs(r.true_p - 0.98) <= 1e-6, "true probability is not 0.98");

  // Exact validity of the lower bound under Binomial(39, p) occupancy counts.
  // At p = 0.98 every z is valid, so the pmf sum is 1 up to rounding; clamp
  // before forming a variance.
  double p = r.true_p;
  double exact = 0.0;
  for (int z = 0; z <= 39; ++z) {
    double lower = jeffreys_interval(z, {39, 0.05}).jeffreys_lower;
    if (lower <= p)
      exact += std::exp(log_choose(39, z) + z * std::log(p) +
                        (39 - z) * std::log1p(-p));
  }
  exact = std::min(exact, 1.0);
  double se = std::sqrt(exact * (1.0 - exact) / 2000.0);
  expect(o, exact >= 0.95, "exact validity below the nominal level");
  expect(o, r.validity >= 0.95 - 3.0 * se,
         "simulated validity " + std::to_string(r.validity) + " below 0.95 - 3se");
  expect(o, std::fabs(r.validity - exact) <= 3.0 * se + 1e-12,
         "simulated validity " + std::to_string(r.validity) +
             " disagrees with exact " + std::to_string(exact));
  return o;
}

// --- criterion 10: determinism across reruns and parallelism ---------------

Outcome criterion_determinism() {
  Outcome o;
  testutil::TempDir dir;
  testutil::write_file(dir.file("data.csv"), fixture_csv());
  const std::string base = " run --data " + dir.file("data.csv") +
                           " --n 39 --seed 7 --builtin point_estimate --column x"
                           " --size 300x100 --xlim 0:10 --ylim 0:1";
  auto a = testutil::run_command(kCli + base + " --out " + dir.file("a.png"));
  auto b = testutil::run_command(kCli + base + " --out " + dir.file("b.png"));
  auto c = testutil::run_command(kCli + base + " --out " + dir.file("c.png") +
                                 " --parallelism 8");
  expect(o, a.exit_code == 0 && b.exit_code == 0 && c.exit_code == 0,
         "a run exited nonzero");
  std::string bytes = slurp(dir.file("a.png"));
  expect(o, !bytes.empty(), "no output produced");
  expect(o, bytes == slurp(dir.file("b.png")), "repeat run differs");
  expect(o, bytes == slurp(dir.file("c.png")), "parallel run differs");
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    Outcome (*fn)();
  };
  const Criterion criteria[] = {
      {1, "coverage table rationals and credible bounds", criterion_table},
      {2, "range coverage calibration, normal draws", criterion_range_normal},
      {3, "range coverage under ties stays above the bound", criterion_range_ties},
      {4, "binary stack mass conservation", criterion_conservation},
      {5, "intensity transform property fuzz", criterion_transform_fuzz},
      {6, "incomplete beta oracle equivalence", criterion_beta_oracles},
      {7, "kept stack interval matches recomputed marks", criterion_interval_exactness},
      {8, "pipeline coverage within quantization band", criterion_pipeline},
      {9, "region inference validity vs exact binomial", criterion_region},
      {10, "byte-identical reruns across parallelism", criterion_determinism},
  };

  int failed = 0;
  for (const Criterion& c : criteria) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o.ok = false;
      o.notes.push_back(std::string("exception: ") + e.what());
    }
    double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s  criterion %2d: %s  (%.2fs)\n", o.ok ? "PASS" : "FAIL", c.id,
                c.name, secs);
    for (const std::string& note : o.notes) std::printf("      - %s\n", note.c_str());
    if (!o.ok) ++failed;
  }
  if (failed)
    std::printf("%d of 10 criteria FAILED\n", failed);
  else
    std::printf("all 10 criteria passed\n");
  return failed == 0 ? 0 : 1;
}
