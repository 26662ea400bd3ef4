#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "bootagg/raster.hpp"
#include "bootagg/rng.hpp"

namespace bootagg {

// An ordered stack of same-sized images, one per bootstrap replicate.
class ImageStack {
 public:
  explicit ImageStack(std::vector<RasterImage> images);

  std::int64_t size() const { return static_cast<std::int64_t>(images_.size()); }
  std::int64_t width() const { return images_.front().width(); }
  std::int64_t height() const { return images_.front().height(); }
  const RasterImage& image(std::int64_t i) const {
    return images_[static_cast<size_t>(i)];
  }
  const std::vector<RasterImage>& images() const { return images_; }

 private:
  std::vector<RasterImage> images_;
};

struct TransformParams {
  double slope = 2.5;      // k: steepness of the S-curve
  double threshold = 0.3;  // tau: floor/ceiling pulled in from 0 and 1
  bool enabled = true;
  // When set, argmax ties are broken by a generator seeded with this value
  // instead of the default smallest-channel-value rule.
  std::optional<std::uint64_t> random_tie_seed;

  void validate() const;
};

// Distinct 8-bit channel values and their multiplicities at one pixel/channel.
struct ChannelFrequencyTable {
  struct Entry {
    std::uint8_t value;
    std::int64_t count;
  };
  std::vector<Entry> entries;  // ascending by value
  std::int64_t total = 0;
};

ChannelFrequencyTable build_frequency_table(const std::vector<std::uint8_t>& values);

struct RegionMask {
  std::int64_t width = 0;
  std::int64_t height = 0;
  std::vector<std::uint8_t> mask;  // row-major, nonzero = inside

  RegionMask(std::int64_t w, std::int64_t h, bool fill = false);
  bool at(std::int64_t col, std::int64_t row) const {
    return mask[static_cast<size_t>(row * width + col)] != 0;
  }
  void set(std::int64_t col, std::int64_t row, bool v) {
    mask[static_cast<size_t>(row * width + col)] = v ? 1 : 0;
  }
};

// Per-channel means/weighted means held as 64-bit reals in [0,1].
class AggregateImage {
 public:
  AggregateImage(std::int64_t width, std::int64_t height);

  std::int64_t width() const { return width_; }
  std::int64_t height() const { return height_; }
  double channel(std::int64_t col, std::int64_t row, int c) const {
    return channels_[static_cast<size_t>((row * width_ + col) * 3 + c)];
  }
  void set_channel(std::int64_t col, std::int64_t row, int c, double v) {
    channels_[static_cast<size_t>((row * width_ + col) * 3 + c)] = v;
  }
  const std::vector<double>& channels() const { return channels_; }

 private:
  std::int64_t width_;
  std::int64_t height_;
  std::vector<double> channels_;
};

AggregateImage mean_aggregate(const ImageStack& stack);

// (1 - 2*tau) * I_x(k, k) + tau: the S-shaped remap of a frequency in [0,1]
// into [tau, 1-tau].
double transform_scalar(double x, const TransformParams& params);

// Reallocates the frequency vector: the dominant frequency x_c goes to
// f(x_c); the rest share f(1-x_c) proportionally. A single entry stays [1.0].
std::vector<double> transform_frequencies(const ChannelFrequencyTable& table,
                                          const TransformParams& params,
                                          SeededRng* tie_rng = nullptr);

// Per pixel, per channel: frequency table -> reallocated weights -> weighted
// mean of the distinct values. With the transform disabled this is exactly
// mean_aggregate.
AggregateImage transform_aggregate(const ImageStack& stack,
                                   const TransformParams& params);

// round(value * 255) with round-half-to-even.
RasterImage quantize(const AggregateImage& agg);

// Number of stack images whose masked pixels are all within `tolerance` of
// `background` per channel.
std::int64_t region_occupancy(const ImageStack& stack, const RegionMask& region,
                              Rgb background = kWhite, int tolerance = 0);

enum class Axis { horizontal, vertical };

// Extreme pixel coordinates along the axis at which any image deviates from
// background. Throws if the whole stack is background.
std::pair<std::int64_t, std::int64_t> observed_interval(const ImageStack& stack,
                                                        Axis axis,
                                                        Rgb background = kWhite,
                                                        int tolerance = 0);

// Per-column [min,max] rows of non-background pixels across the stack;
// columns that stay background are nullopt.
std::vector<std::optional<std::pair<std::int64_t, std::int64_t>>> column_envelope(
    const ImageStack& stack, Rgb background = kWhite, int tolerance = 0);

}  // namespace bootagg
