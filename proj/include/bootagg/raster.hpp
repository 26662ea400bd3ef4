#pragma once

#include <cstdint>
#include <vector>

#include "bootagg/errors.hpp"

namespace bootagg {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

inline constexpr Rgb kWhite{255, 255, 255};
inline constexpr Rgb kBlack{0, 0, 0};

/// Fixed-size RGB raster, 8-bit channels, row-major.
class RasterImage {
public:
  RasterImage(int width, int height, Rgb fill = kWhite);

  int width() const { return width_; }
  int height() const { return height_; }

  Rgb pixel(int col, int row) const {
    const std::size_t i = index(col, row);
    return Rgb{pixels_[i], pixels_[i + 1], pixels_[i + 2]};
  }
  void set_pixel(int col, int row, Rgb color) {
    const std::size_t i = index(col, row);
    pixels_[i] = color.r;
    pixels_[i + 1] = color.g;
    pixels_[i + 2] = color.b;
  }
  /// set_pixel that ignores out-of-bounds coordinates.
  void set_pixel_clipped(std::int64_t col, std::int64_t row, Rgb color) {
    if (col < 0 || row < 0 || col >= width_ || row >= height_) return;
    set_pixel(static_cast<int>(col), static_cast<int>(row), color);
  }

  const std::vector<std::uint8_t>& bytes() const { return pixels_; }
  std::vector<std::uint8_t>& bytes() { return pixels_; }

  /// Copy of rows [row0, row0+count), same width.
  RasterImage rows_slice(int row0, int count) const;

  friend bool operator==(const RasterImage&, const RasterImage&) = default;

private:
  std::size_t index(int col, int row) const {
    return (static_cast<std::size_t>(row) * width_ + col) * 3;
  }

  int width_;
  int height_;
  std::vector<std::uint8_t> pixels_;
};

struct PixelCoord {
  std::int64_t col;
  std::int64_t row;
};

/// Data-coordinate bounds of a plot, fixed per run; never derived from a
/// resample. Maps data space onto the pixel grid.
struct PlotFrame {
  double x_min;
  double x_max;
  double y_min;
  double y_max;
  int width;
  int height;
  Rgb background = kWhite;

  void validate() const;

  /// Affine map into pixel indices: x_min -> col 0, x_max -> col width-1,
  /// y_max -> row 0 (raster y grows downward). Fractions round
  /// half-away-from-zero. Out-of-frame points yield out-of-range indices for
  /// the caller to clip.
  PixelCoord data_to_pixel(double x, double y) const;

  /// Data x at the center of a pixel column (inverse of the column map).
  double col_to_x(int col) const;
  /// Data y at a pixel row.
  double row_to_y(int row) const;
};

}  // namespace bootagg
