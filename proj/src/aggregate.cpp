#include "bootagg/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "bootagg/errors.hpp"
#include "bootagg/special_functions.hpp"

namespace bootagg {

namespace {

void check_same_dims(const std::vector<RasterImage>& images) {
  for (size_t i = 1; i < images.size(); ++i) {
    if (images[i].width() != images[0].width() ||
        images[i].height() != images[0].height()) {
      char buf[160];
      std::snprintf(buf, sizeof(buf),
                    "image %zu is %lldx%lld, expected %lldx%lld", i,
                    static_cast<long long>(images[i].width()),
                    static_cast<long long>(images[i].height()),
                    static_cast<long long>(images[0].width()),
                    static_cast<long long>(images[0].height()));
      throw DimensionMismatchError(buf);
    }
  }
}

bool near_background(Rgb p, Rgb background, int tolerance) {
  return std::abs(int(p.r) - int(background.r)) <= tolerance &&
         std::abs(int(p.g) - int(background.g)) <= tolerance &&
         std::abs(int(p.b) - int(background.b)) <= tolerance;
}

}  // namespace

ImageStack::ImageStack(std::vector<RasterImage> images) : images_(std::move(images)) {
  if (images_.empty()) throw DomainError("image stack must hold at least one image");
  check_same_dims(images_);
}

void TransformParams::validate() const {
  if (!(slope > 0.0)) throw DomainError("transform slope must be positive");
  if (!(threshold > 0.0 && threshold < 0.5))
    throw DomainError("transform threshold must lie in (0, 0.5)");
}

ChannelFrequencyTable build_frequency_table(const std::vector<std::uint8_t>& values) {
  if (values.empty()) throw DomainError("frequency table needs at least one value");
  std::int64_t counts[256] = {0};
  for (std::uint8_t v : values) ++counts[v];
  ChannelFrequencyTable table;
  table.total = static_cast<std::int64_t>(values.size());
  for (int v = 0; v < 256; ++v)
    if (counts[v] > 0)
      table.entries.push_back({static_cast<std::uint8_t>(v), counts[v]});
  return table;
}

AggregateImage::AggregateImage(std::int64_t width, std::int64_t height)
    : width_(width), height_(height) {
  if (width <= 0 || height <= 0)
    throw DomainError("aggregate dimensions must be positive");
  channels_.assign(static_cast<size_t>(width * height * 3), 0.0);
}

AggregateImage mean_aggregate(const ImageStack& stack) {
  const std::int64_t w = stack.width(), h = stack.height(), n = stack.size();
  AggregateImage agg(w, h);
  std::vector<double> sums(static_cast<size_t>(w * h * 3), 0.0);
  for (std::int64_t i = 0; i < n; ++i) {
    const std::vector<std::uint8_t>& bytes = stack.image(i).bytes();
    for (size_t j = 0; j < bytes.size(); ++j) sums[j] += bytes[j];
  }
  const double scale = 1.0 / (255.0 * static_cast<double>(n));
  for (std::int64_t row = 0; row < h; ++row)
    for (std::int64_t col = 0; col < w; ++col)
      for (int c = 0; c < 3; ++c)
        agg.set_channel(col, row, c,
                        sums[static_cast<size_t>((row * w + col) * 3 + c)] * scale);
  return agg;
}

double transform_scalar(double x, const TransformParams& params) {
  params.validate();
  BetaParams beta{params.slope, params.slope};
  return (1.0 - 2.0 * params.threshold) * reg_inc_beta(x, beta) + params.threshold;
}

std::vector<double> transform_frequencies(const ChannelFrequencyTable& table,
                                          const TransformParams& params,
                                          SeededRng* tie_rng) {
  params.validate();
  const size_t m = table.entries.size();
  if (m == 0) throw DomainError("frequency table is empty");
  if (m == 1) return {1.0};

  std::int64_t max_count = 0;
  for (const auto& e : table.entries) max_count = std::max(max_count, e.count);
  // Entries are ascending by value, so the first hit is the smallest value;
  // the optional seeded mode picks uniformly among the tied entries instead.
  size_t c = m;
  if (tie_rng) {
    std::vector<size_t> tied;
    for (size_t i = 0; i < m; ++i)
      if (table.entries[i].count == max_count) tied.push_back(i);
    c = tied.size() == 1 ? tied[0]
                         : tied[tie_rng->next_below(
                               static_cast<std::uint64_t>(tied.size()))];
  } else {
    for (size_t i = 0; i < m; ++i)
      if (table.entries[i].count == max_count) {
        c = i;
        break;
      }
  }

  const double total = static_cast<double>(table.total);
  const double x_c = static_cast<double>(table.entries[c].count) / total;
  const double f_c = transform_scalar(x_c, params);
  const double f_rest = transform_scalar(1.0 - x_c, params);
  std::vector<double> out(m);
  for (size_t i = 0; i < m; ++i) {
    if (i == c) {
      out[i] = f_c;
    } else {
      double x_i = static_cast<double>(table.entries[i].count) / total;
      out[i] = f_rest * x_i / (1.0 - x_c);
    }
  }
  return out;
}

AggregateImage transform_aggregate(const ImageStack& stack,
                                   const TransformParams& params) {
  params.validate();
  if (!params.enabled) return mean_aggregate(stack);

  const std::int64_t w = stack.width(), h = stack.height(), n = stack.size();
  AggregateImage agg(w, h);
  std::optional<SeededRng> tie_rng;
  if (params.random_tie_seed) tie_rng.emplace(*params.random_tie_seed);

  std::vector<std::uint8_t> values(static_cast<size_t>(n));
  for (std::int64_t row = 0; row < h; ++row) {
    for (std::int64_t col = 0; col < w; ++col) {
      for (int c = 0; c < 3; ++c) {
        for (std::int64_t i = 0; i < n; ++i) {
          Rgb p = stack.image(i).pixel(col, row);
          values[static_cast<size_t>(i)] = c == 0 ? p.r : (c == 1 ? p.g : p.b);
        }
        ChannelFrequencyTable table = build_frequency_table(values);
        std::vector<double> weights =
            transform_frequencies(table, params, tie_rng ? &*tie_rng : nullptr);
        double out = 0.0;
        for (size_t i = 0; i < weights.size(); ++i)
          out += weights[i] * (static_cast<double>(table.entries[i].value) / 255.0);
        agg.set_channel(col, row, c, out);
      }
    }
  }
  return agg;
}

RasterImage quantize(const AggregateImage& agg) {
  RasterImage img(agg.width(), agg.height());
  for (std::int64_t row = 0; row < agg.height(); ++row) {
    for (std::int64_t col = 0; col < agg.width(); ++col) {
      std::uint8_t ch[3];
      for (int c = 0; c < 3; ++c) {
        double v = std::nearbyint(agg.channel(col, row, c) * 255.0);
        ch[c] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
      }
      img.set_pixel(col, row, {ch[0], ch[1], ch[2]});
    }
  }
  return img;
}

std::int64_t region_occupancy(const ImageStack& stack, const RegionMask& region,
                              Rgb background, int tolerance) {
  if (region.width != stack.width() || region.height != stack.height()) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "region mask is %lldx%lld, stack is %lldx%lld",
                  static_cast<long long>(region.width),
                  static_cast<long long>(region.height),
                  static_cast<long long>(stack.width()),
                  static_cast<long long>(stack.height()));
    throw DimensionMismatchError(buf);
  }
  std::int64_t z = 0;
  for (std::int64_t i = 0; i < stack.size(); ++i) {
    const RasterImage& img = stack.image(i);
    bool empty = true;
    for (std::int64_t row = 0; row < region.height && empty; ++row)
      for (std::int64_t col = 0; col < region.width; ++col)
        if (region.at(col, row) &&
            !near_background(img.pixel(col, row), background, tolerance)) {
          empty = false;
          break;
        }
    if (empty) ++z;
  }
  return z;
}

RegionMask::RegionMask(std::int64_t w, std::int64_t h, bool fill)
    : width(w), height(h) {
  if (w <= 0 || h <= 0) throw DomainError("region dimensions must be positive");
  mask.assign(static_cast<size_t>(w * h), fill ? 1 : 0);
}

std::pair<std::int64_t, std::int64_t> observed_interval(const ImageStack& stack,
                                                        Axis axis, Rgb background,
                                                        int tolerance) {
  std::int64_t lo = -1, hi = -1;
  for (std::int64_t i = 0; i < stack.size(); ++i) {
    const RasterImage& img = stack.image(i);
    for (std::int64_t row = 0; row < stack.height(); ++row) {
      for (std::int64_t col = 0; col < stack.width(); ++col) {
        if (near_background(img.pixel(col, row), background, tolerance)) continue;
        std::int64_t coord = axis == Axis::horizontal ? col : row;
        if (lo < 0 || coord < lo) lo = coord;
        if (coord > hi) hi = coord;
      }
    }
  }
  if (lo < 0) throw DomainError("stack contains no non-background pixels");
  return {lo, hi};
}

std::vector<std::optional<std::pair<std::int64_t, std::int64_t>>> column_envelope(
    const ImageStack& stack, Rgb background, int tolerance) {
  std::vector<std::optional<std::pair<std::int64_t, std::int64_t>>> env(
      static_cast<size_t>(stack.width()));
  for (std::int64_t i = 0; i < stack.size(); ++i) {
    const RasterImage& img = stack.image(i);
    for (std::int64_t row = 0; row < stack.height(); ++row) {
      for (std::int64_t col = 0; col < stack.width(); ++col) {
        if (near_background(img.pixel(col, row), background, tolerance)) continue;
        auto& slot = env[static_cast<size_t>(col)];
        if (!slot) {
          slot = {row, row};
        } else {
          slot->first = std::min(slot->first, row);
          slot->second = std::max(slot->second, row);
        }
      }
    }
  }
  return env;
}

}  // namespace bootagg
