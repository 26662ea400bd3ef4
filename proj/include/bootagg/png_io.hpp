#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "bootagg/raster.hpp"

namespace bootagg {

/// Lossless PNG bytes (8-bit RGB, non-interlaced). Deterministic for
/// identical input within one release.
std::vector<std::uint8_t> encode_png(const RasterImage& image);

/// Decode a PNG stream into an RGB raster. Gray, palette, and 16-bit inputs
/// are converted; alpha (RGBA, gray+alpha, tRNS) is composited over opaque
/// white. Both interlaced and non-interlaced streams are accepted. Throws
/// ParseError on malformed input.
RasterImage decode_png(const std::vector<std::uint8_t>& bytes);

RasterImage read_png_file(const std::filesystem::path& path);
void write_png_file(const std::filesystem::path& path, const RasterImage& image);

}  // namespace bootagg
