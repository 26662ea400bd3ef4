#include "bootagg/raster.hpp"

#include <cmath>
#include <string>

namespace bootagg {

RasterImage::RasterImage(int width, int height, Rgb fill)
    : width_(width), height_(height) {
  if (width < 1 || height < 1) {
    throw DomainError("RasterImage: dimensions must be positive, got " +
                      std::to_string(width) + "x" + std::to_string(height));
  }
  pixels_.resize(static_cast<std::size_t>(width) * height * 3);
  for (std::size_t i = 0; i < pixels_.size(); i += 3) {
    pixels_[i] = fill.r;
    pixels_[i + 1] = fill.g;
    pixels_[i + 2] = fill.b;
  }
}

RasterImage RasterImage::rows_slice(int row0, int count) const {
  if (row0 < 0 || count < 1 || row0 + count > height_) {
    throw DomainError("rows_slice: range out of bounds");
  }
  RasterImage out(width_, count);
  const std::size_t stride = static_cast<std::size_t>(width_) * 3;
  std::copy(pixels_.begin() + row0 * stride,
            pixels_.begin() + (row0 + static_cast<std::size_t>(count)) * stride,
            out.pixels_.begin());
  return out;
}

void PlotFrame::validate() const {
  if (!(x_min < x_max) || !(y_min < y_max)) {
    throw DomainError("PlotFrame: bounds must satisfy x_min < x_max and y_min < y_max");
  }
  if (width < 1 || height < 1) {
    throw DomainError("PlotFrame: pixel dimensions must be positive");
  }
}

namespace {

// round half away from zero, clamped so far-out-of-frame points stay
// representable instead of overflowing lround
std::int64_t round_away(double v) {
  if (!(v > -1e12)) return -static_cast<std::int64_t>(2e12);
  if (!(v < 1e12)) return static_cast<std::int64_t>(2e12);
  return std::llround(v);
}

}  // namespace

PixelCoord PlotFrame::data_to_pixel(double x, double y) const {
  const double col = (x - x_min) / (x_max - x_min) * (width - 1);
  const double row = (y_max - y) / (y_max - y_min) * (height - 1);
  return PixelCoord{round_away(col), round_away(row)};
}

double PlotFrame::col_to_x(int col) const {
  if (width == 1) return 0.5 * (x_min + x_max);
  return x_min + static_cast<double>(col) * (x_max - x_min) / (width - 1);
}

double PlotFrame::row_to_y(int row) const {
  if (height == 1) return 0.5 * (y_min + y_max);
  return y_max - static_cast<double>(row) * (y_max - y_min) / (height - 1);
}

}  // namespace bootagg
