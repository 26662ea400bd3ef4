#include "bootagg/png_io.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>
#include <string>

namespace bootagg {

namespace {

constexpr std::uint8_t kSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
         (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

void append_chunk(std::vector<std::uint8_t>& out, const char type[4],
                  const std::vector<std::uint8_t>& payload) {
  put_u32(out, static_cast<std::uint32_t>(payload.size()));
  const std::size_t crc_start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), payload.begin(), payload.end());
  const uLong crc = crc32(crc32(0L, Z_NULL, 0), out.data() + crc_start,
                          static_cast<uInt>(out.size() - crc_start));
  put_u32(out, static_cast<std::uint32_t>(crc));
}

int paeth_predictor(int a, int b, int c) {
  const int p = a + b - c;
  const int pa = std::abs(p - a);
  const int pb = std::abs(p - b);
  const int pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

std::vector<std::uint8_t> zlib_compress(const std::vector<std::uint8_t>& raw) {
  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> out(bound);
  if (compress2(out.data(), &bound, raw.data(), static_cast<uLong>(raw.size()),
                Z_DEFAULT_COMPRESSION) != Z_OK) {
    throw IoError("png encode: zlib compression failed");
  }
  out.resize(bound);
  return out;
}

std::vector<std::uint8_t> zlib_decompress(const std::vector<std::uint8_t>& data,
                                          std::size_t expected_size) {
  std::vector<std::uint8_t> out(expected_size);
  z_stream zs{};
  if (inflateInit(&zs) != Z_OK) throw ParseError("png decode: inflate init failed");
  zs.next_in = const_cast<Bytef*>(data.data());
  zs.avail_in = static_cast<uInt>(data.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&zs, Z_FINISH);
  inflateEnd(&zs);
  if (rc != Z_STREAM_END || zs.avail_out != 0) {
    throw ParseError("png decode: truncated or corrupt compressed image data");
  }
  return out;
}

struct PngHeader {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  int bit_depth = 0;
  int color_type = 0;
  int interlace = 0;
};

int samples_per_pixel(int color_type) {
  switch (color_type) {
    case 0: return 1;  // gray
    case 2: return 3;  // rgb
    case 3: return 1;  // palette index
    case 4: return 2;  // gray + alpha
    case 6: return 4;  // rgba
    default: throw ParseError("png decode: unsupported color type " + std::to_string(color_type));
  }
}

std::uint8_t composite_over_white(int value, int alpha) {
  return static_cast<std::uint8_t>((value * alpha + 255 * (255 - alpha) + 127) / 255);
}

// Per-pixel sample fetch from a defiltered scanline, normalized to 8 bits.
struct SampleReader {
  const std::uint8_t* row;
  int bit_depth;

  int sample(int index) const {
    switch (bit_depth) {
      case 8: return row[index];
      case 16: return row[index * 2];  // high byte
      case 1:
      case 2:
      case 4: {
        const int per_byte = 8 / bit_depth;
        const int byte = index / per_byte;
        const int shift = 8 - bit_depth * (index % per_byte + 1);
        return (row[byte] >> shift) & ((1 << bit_depth) - 1);
      }
      default: throw ParseError("png decode: unsupported bit depth");
    }
  }
};

// Maximum value of a sample at this depth, for scaling gray values to 8 bits.
int sample_max(int bit_depth) { return bit_depth == 16 ? 255 : (1 << bit_depth) - 1; }

void defilter(std::vector<std::uint8_t>& raw, std::size_t row_bytes, std::size_t rows,
              int bytes_per_pixel) {
  // raw holds rows of (filter byte + data); defilters in place, compacting
  // out the filter bytes.
  std::size_t src = 0;
  std::size_t dst = 0;
  const std::size_t stride = row_bytes;
  for (std::size_t y = 0; y < rows; ++y) {
    const int filter = raw[src++];
    const std::uint8_t* prior = (y == 0) ? nullptr : raw.data() + dst - stride;
    std::uint8_t* line = raw.data() + dst;
    std::memmove(line, raw.data() + src, row_bytes);
    switch (filter) {
      case 0:
        break;
      case 1:
        for (std::size_t i = bytes_per_pixel; i < row_bytes; ++i) line[i] += line[i - bytes_per_pixel];
        break;
      case 2:
        if (prior) {
          for (std::size_t i = 0; i < row_bytes; ++i) line[i] += prior[i];
        }
        break;
      case 3:
        for (std::size_t i = 0; i < row_bytes; ++i) {
          const int left = i >= static_cast<std::size_t>(bytes_per_pixel) ? line[i - bytes_per_pixel] : 0;
          const int up = prior ? prior[i] : 0;
          line[i] = static_cast<std::uint8_t>(line[i] + (left + up) / 2);
        }
        break;
      case 4:
        for (std::size_t i = 0; i < row_bytes; ++i) {
          const int left = i >= static_cast<std::size_t>(bytes_per_pixel) ? line[i - bytes_per_pixel] : 0;
          const int up = prior ? prior[i] : 0;
          const int up_left =
              (prior && i >= static_cast<std::size_t>(bytes_per_pixel)) ? prior[i - bytes_per_pixel] : 0;
          line[i] = static_cast<std::uint8_t>(line[i] + paeth_predictor(left, up, up_left));
        }
        break;
      default:
        throw ParseError("png decode: unknown filter type " + std::to_string(filter));
    }
    src += row_bytes;
    dst += row_bytes;
  }
  raw.resize(dst);
}

struct Palette {
  std::vector<Rgb> colors;
  std::vector<std::uint8_t> alpha;  // parallel to colors; 255 when absent
};

void emit_pixel(RasterImage& image, int col, int row, const PngHeader& hdr,
                const SampleReader& reader, int pixel_index, const Palette& palette,
                const std::vector<int>& transparent_key) {
  const int maxv = sample_max(hdr.bit_depth);
  switch (hdr.color_type) {
    case 0: {
      int g = reader.sample(pixel_index);
      if (!transparent_key.empty() && g == transparent_key[0]) {
        image.set_pixel(col, row, kWhite);
        return;
      }
      g = g * 255 / maxv;
      image.set_pixel(col, row, Rgb{static_cast<std::uint8_t>(g), static_cast<std::uint8_t>(g),
                                    static_cast<std::uint8_t>(g)});
      return;
    }
    case 2: {
      const int r = reader.sample(pixel_index * 3);
      const int g = reader.sample(pixel_index * 3 + 1);
      const int b = reader.sample(pixel_index * 3 + 2);
      if (transparent_key.size() == 3 && r == transparent_key[0] && g == transparent_key[1] &&
          b == transparent_key[2]) {
        image.set_pixel(col, row, kWhite);
        return;
      }
      image.set_pixel(col, row, Rgb{static_cast<std::uint8_t>(r * 255 / maxv),
                                    static_cast<std::uint8_t>(g * 255 / maxv),
                                    static_cast<std::uint8_t>(b * 255 / maxv)});
      return;
    }
    case 3: {
      const int idx = reader.sample(pixel_index);
      if (idx >= static_cast<int>(palette.colors.size())) {
        throw ParseError("png decode: palette index out of range");
      }
      const Rgb c = palette.colors[idx];
      const int a = palette.alpha[idx];
      image.set_pixel(col, row, Rgb{composite_over_white(c.r, a), composite_over_white(c.g, a),
                                    composite_over_white(c.b, a)});
      return;
    }
    case 4: {
      const int g = reader.sample(pixel_index * 2) * 255 / maxv;
      const int a = reader.sample(pixel_index * 2 + 1) * 255 / maxv;
      const std::uint8_t v = composite_over_white(g, a);
      image.set_pixel(col, row, Rgb{v, v, v});
      return;
    }
    case 6: {
      const int r = reader.sample(pixel_index * 4) * 255 / maxv;
      const int g = reader.sample(pixel_index * 4 + 1) * 255 / maxv;
      const int b = reader.sample(pixel_index * 4 + 2) * 255 / maxv;
      const int a = reader.sample(pixel_index * 4 + 3) * 255 / maxv;
      image.set_pixel(col, row, Rgb{composite_over_white(r, a), composite_over_white(g, a),
                                    composite_over_white(b, a)});
      return;
    }
    default:
      throw ParseError("png decode: unsupported color type");
  }
}

// Adam7 pass geometry
constexpr int kPassColStart[7] = {0, 4, 0, 2, 0, 1, 0};
constexpr int kPassColStep[7] = {8, 8, 4, 4, 2, 2, 1};
constexpr int kPassRowStart[7] = {0, 0, 4, 0, 2, 0, 1};
constexpr int kPassRowStep[7] = {8, 8, 8, 4, 4, 2, 2};

}  // namespace

std::vector<std::uint8_t> encode_png(const RasterImage& image) {
  const std::size_t row_bytes = static_cast<std::size_t>(image.width()) * 3;
  std::vector<std::uint8_t> raw;
  raw.reserve((row_bytes + 1) * image.height());
  const auto& pixels = image.bytes();
  for (int y = 0; y < image.height(); ++y) {
    raw.push_back(0);  // filter: none
    const std::uint8_t* row = pixels.data() + static_cast<std::size_t>(y) * row_bytes;
    raw.insert(raw.end(), row, row + row_bytes);
  }

  std::vector<std::uint8_t> out(kSignature, kSignature + 8);
  std::vector<std::uint8_t> ihdr;
  put_u32(ihdr, static_cast<std::uint32_t>(image.width()));
  put_u32(ihdr, static_cast<std::uint32_t>(image.height()));
  ihdr.push_back(8);  // bit depth
  ihdr.push_back(2);  // color type: RGB
  ihdr.push_back(0);  // compression
  ihdr.push_back(0);  // filter method
  ihdr.push_back(0);  // no interlace
  append_chunk(out, "IHDR", ihdr);
  append_chunk(out, "IDAT", zlib_compress(raw));
  append_chunk(out, "IEND", {});
  return out;
}

RasterImage decode_png(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kSignature, 8) != 0) {
    throw ParseError("png decode: not a PNG stream");
  }

  PngHeader hdr;
  Palette palette;
  std::vector<int> transparent_key;
  std::vector<std::uint8_t> idat;
  bool saw_ihdr = false;
  bool saw_iend = false;

  std::size_t pos = 8;
  while (pos + 12 <= bytes.size()) {
    const std::uint32_t length = get_u32(bytes.data() + pos);
    if (pos + 12 + static_cast<std::size_t>(length) > bytes.size()) {
      throw ParseError("png decode: truncated chunk");
    }
    const char* type = reinterpret_cast<const char*>(bytes.data() + pos + 4);
    const std::uint8_t* payload = bytes.data() + pos + 8;
    const std::uint32_t stored_crc = get_u32(payload + length);
    const uLong crc = crc32(crc32(0L, Z_NULL, 0), bytes.data() + pos + 4, length + 4);
    if (static_cast<std::uint32_t>(crc) != stored_crc) {
      throw ParseError(std::string("png decode: CRC mismatch in ") + std::string(type, 4) +
                       " chunk");
    }

    if (std::memcmp(type, "IHDR", 4) == 0) {
      if (length != 13) throw ParseError("png decode: bad IHDR length");
      hdr.width = get_u32(payload);
      hdr.height = get_u32(payload + 4);
      hdr.bit_depth = payload[8];
      hdr.color_type = payload[9];
      if (payload[10] != 0 || payload[11] != 0) {
        throw ParseError("png decode: unsupported compression or filter method");
      }
      hdr.interlace = payload[12];
      if (hdr.interlace != 0 && hdr.interlace != 1) {
        throw ParseError("png decode: unknown interlace method");
      }
      if (hdr.width == 0 || hdr.height == 0) throw ParseError("png decode: zero dimension");
      samples_per_pixel(hdr.color_type);  // validates the color type
      const bool depth_ok =
          (hdr.bit_depth == 8 || hdr.bit_depth == 16)
              ? (hdr.color_type != 3 || hdr.bit_depth == 8)
              : ((hdr.bit_depth == 1 || hdr.bit_depth == 2 || hdr.bit_depth == 4) &&
                 (hdr.color_type == 0 || hdr.color_type == 3));
      if (!depth_ok) {
        throw ParseError("png decode: unsupported bit depth " + std::to_string(hdr.bit_depth) +
                         " for color type " + std::to_string(hdr.color_type));
      }
      saw_ihdr = true;
    } else if (std::memcmp(type, "PLTE", 4) == 0) {
      if (length % 3 != 0) throw ParseError("png decode: bad PLTE length");
      for (std::uint32_t i = 0; i < length; i += 3) {
        palette.colors.push_back(Rgb{payload[i], payload[i + 1], payload[i + 2]});
        palette.alpha.push_back(255);
      }
    } else if (std::memcmp(type, "tRNS", 4) == 0) {
      if (hdr.color_type == 3) {
        for (std::uint32_t i = 0; i < length && i < palette.alpha.size(); ++i) {
          palette.alpha[i] = payload[i];
        }
      } else if (hdr.color_type == 0 && length >= 2) {
        transparent_key = {(payload[0] << 8) | payload[1]};
      } else if (hdr.color_type == 2 && length >= 6) {
        transparent_key = {(payload[0] << 8) | payload[1], (payload[2] << 8) | payload[3],
                           (payload[4] << 8) | payload[5]};
      }
      if (hdr.bit_depth == 16) {
        for (int& key : transparent_key) key >>= 8;  // samples are read as high bytes
      }
    } else if (std::memcmp(type, "IDAT", 4) == 0) {
      idat.insert(idat.end(), payload, payload + length);
    } else if (std::memcmp(type, "IEND", 4) == 0) {
      saw_iend = true;
      break;
    }
    // ancillary chunks are skipped
    pos += 12 + length;
  }

  if (!saw_ihdr) throw ParseError("png decode: missing IHDR");
  if (!saw_iend) throw ParseError("png decode: truncated stream (no IEND)");
  if (idat.empty()) throw ParseError("png decode: missing image data");
  if (hdr.color_type == 3 && palette.colors.empty()) {
    throw ParseError("png decode: palette image without PLTE");
  }

  const int spp = samples_per_pixel(hdr.color_type);
  const int bits_per_pixel = spp * hdr.bit_depth;
  const int bytes_per_pixel = (bits_per_pixel + 7) / 8;
  const auto row_bytes_for = [&](std::uint32_t pixels) -> std::size_t {
    return (static_cast<std::size_t>(pixels) * bits_per_pixel + 7) / 8;
  };

  // expected raw size across passes (one filter byte per non-empty row)
  std::size_t expected = 0;
  if (hdr.interlace == 0) {
    expected = (row_bytes_for(hdr.width) + 1) * hdr.height;
  } else {
    for (int pass = 0; pass < 7; ++pass) {
      const std::uint32_t cols =
          (hdr.width > static_cast<std::uint32_t>(kPassColStart[pass]))
              ? (hdr.width - kPassColStart[pass] + kPassColStep[pass] - 1) / kPassColStep[pass]
              : 0;
      const std::uint32_t rows =
          (hdr.height > static_cast<std::uint32_t>(kPassRowStart[pass]))
              ? (hdr.height - kPassRowStart[pass] + kPassRowStep[pass] - 1) / kPassRowStep[pass]
              : 0;
      if (cols && rows) expected += (row_bytes_for(cols) + 1) * rows;
    }
  }

  std::vector<std::uint8_t> raw = zlib_decompress(idat, expected);

  RasterImage image(static_cast<int>(hdr.width), static_cast<int>(hdr.height));
  if (hdr.interlace == 0) {
    const std::size_t row_bytes = row_bytes_for(hdr.width);
    defilter(raw, row_bytes, hdr.height, bytes_per_pixel);
    for (std::uint32_t y = 0; y < hdr.height; ++y) {
      SampleReader reader{raw.data() + static_cast<std::size_t>(y) * row_bytes, hdr.bit_depth};
      for (std::uint32_t x = 0; x < hdr.width; ++x) {
        emit_pixel(image, static_cast<int>(x), static_cast<int>(y), hdr, reader,
                   static_cast<int>(x), palette, transparent_key);
      }
    }
  } else {
    std::size_t offset = 0;
    for (int pass = 0; pass < 7; ++pass) {
      const std::uint32_t cols =
          (hdr.width > static_cast<std::uint32_t>(kPassColStart[pass]))
              ? (hdr.width - kPassColStart[pass] + kPassColStep[pass] - 1) / kPassColStep[pass]
              : 0;
      const std::uint32_t rows =
          (hdr.height > static_cast<std::uint32_t>(kPassRowStart[pass]))
              ? (hdr.height - kPassRowStart[pass] + kPassRowStep[pass] - 1) / kPassRowStep[pass]
              : 0;
      if (!cols || !rows) continue;
      const std::size_t row_bytes = row_bytes_for(cols);
      std::vector<std::uint8_t> pass_raw(raw.begin() + offset,
                                         raw.begin() + offset + (row_bytes + 1) * rows);
      offset += (row_bytes + 1) * rows;
      defilter(pass_raw, row_bytes, rows, bytes_per_pixel);
      for (std::uint32_t py = 0; py < rows; ++py) {
        SampleReader reader{pass_raw.data() + static_cast<std::size_t>(py) * row_bytes,
                            hdr.bit_depth};
        const int y = kPassRowStart[pass] + static_cast<int>(py) * kPassRowStep[pass];
        for (std::uint32_t px = 0; px < cols; ++px) {
          const int x = kPassColStart[pass] + static_cast<int>(px) * kPassColStep[pass];
          emit_pixel(image, x, y, hdr, reader, static_cast<int>(px), palette, transparent_key);
        }
      }
    }
  }
  return image;
}

RasterImage read_png_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open PNG file: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_png(bytes);
}

void write_png_file(const std::filesystem::path& path, const RasterImage& image) {
  const auto bytes = encode_png(image);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open PNG file for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing PNG file: " + path.string());
}

}  // namespace bootagg
