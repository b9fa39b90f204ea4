#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <zlib.h>

#include "blindcount/common.hpp"

namespace blindcount {

// 8-bit grayscale raster, row-major.
struct ImageU8 {
  int height = 0;
  int width = 0;
  std::vector<uint8_t> pixels;

  ImageU8() = default;
  ImageU8(int h, int w, uint8_t fill = 0)
      : height(h), width(w), pixels(static_cast<size_t>(h) * w, fill) {}

  uint8_t& at(int y, int x) { return pixels[static_cast<size_t>(y) * width + x]; }
  uint8_t at(int y, int x) const { return pixels[static_cast<size_t>(y) * width + x]; }
  bool contains(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
};

// Bbox coordinates are half-open: [x0, x1) x [y0, y1).
inline ImageU8 crop(const ImageU8& img, int x0, int y0, int x1, int y1) {
  x0 = std::clamp(x0, 0, img.width);
  x1 = std::clamp(x1, 0, img.width);
  y0 = std::clamp(y0, 0, img.height);
  y1 = std::clamp(y1, 0, img.height);
  require(x1 > x0 && y1 > y0, "crop: empty region");
  ImageU8 out(y1 - y0, x1 - x0);
  for (int y = y0; y < y1; ++y)
    std::memcpy(&out.at(y - y0, 0), &img.at(y, x0), static_cast<size_t>(x1 - x0));
  return out;
}

inline void save_pgm(const std::filesystem::path& path, const ImageU8& img) {
  std::ofstream f(path, std::ios::binary);
  require(f.good(), "save_pgm: cannot open " + path.string());
  f << "P5\n" << img.width << " " << img.height << "\n255\n";
  f.write(reinterpret_cast<const char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  require(f.good(), "save_pgm: write failed for " + path.string());
}

namespace detail {
inline int pgm_token(std::istream& in) {
  // skips whitespace and '#' comments
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (!std::isspace(c)) {
      break;
    }
    c = in.get();
  }
  require(c != EOF, "pgm: truncated header");
  int value = 0;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    c = in.get();
  }
  return value;
}
}  // namespace detail

inline ImageU8 load_pgm(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  require(f.good(), "load_pgm: cannot open " + path.string());
  char magic[2] = {0, 0};
  f.read(magic, 2);
  require(magic[0] == 'P' && magic[1] == '5', "load_pgm: not a binary PGM: " + path.string());
  const int w = detail::pgm_token(f);
  const int h = detail::pgm_token(f);
  const int maxval = detail::pgm_token(f);
  require(w > 0 && h > 0 && maxval == 255, "load_pgm: unsupported PGM variant");
  ImageU8 img(h, w);
  f.read(reinterpret_cast<char*>(img.pixels.data()),
         static_cast<std::streamsize>(img.pixels.size()));
  require(f.gcount() == static_cast<std::streamsize>(img.pixels.size()),
          "load_pgm: truncated pixel data");
  return img;
}

namespace detail {
inline void png_chunk(std::ofstream& f, const char type[4], const std::vector<uint8_t>& data) {
  auto be32 = [](uint32_t v) {
    return std::array<uint8_t, 4>{static_cast<uint8_t>(v >> 24), static_cast<uint8_t>(v >> 16),
                                  static_cast<uint8_t>(v >> 8), static_cast<uint8_t>(v)};
  };
  auto len = be32(static_cast<uint32_t>(data.size()));
  f.write(reinterpret_cast<const char*>(len.data()), 4);
  f.write(type, 4);
  if (!data.empty()) f.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(type), 4);
  if (!data.empty()) crc = crc32(crc, data.data(), static_cast<uInt>(data.size()));
  auto crcb = be32(static_cast<uint32_t>(crc));
  f.write(reinterpret_cast<const char*>(crcb.data()), 4);
}
}  // namespace detail

// Minimal 8-bit grayscale PNG encoder (filter 0 scanlines + zlib).
inline void save_png_gray(const std::filesystem::path& path, const ImageU8& img) {
  require(img.width > 0 && img.height > 0, "save_png_gray: empty image");
  std::ofstream f(path, std::ios::binary);
  require(f.good(), "save_png_gray: cannot open " + path.string());
  static const uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  f.write(reinterpret_cast<const char*>(sig), 8);

  std::vector<uint8_t> ihdr(13, 0);
  auto put32 = [&](size_t off, uint32_t v) {
    ihdr[off] = static_cast<uint8_t>(v >> 24);
    ihdr[off + 1] = static_cast<uint8_t>(v >> 16);
    ihdr[off + 2] = static_cast<uint8_t>(v >> 8);
    ihdr[off + 3] = static_cast<uint8_t>(v);
  };
  put32(0, static_cast<uint32_t>(img.width));
  put32(4, static_cast<uint32_t>(img.height));
  ihdr[8] = 8;   // bit depth
  ihdr[9] = 0;   // grayscale
  detail::png_chunk(f, "IHDR", ihdr);

  std::vector<uint8_t> raw;
  raw.reserve(static_cast<size_t>(img.height) * (img.width + 1));
  for (int y = 0; y < img.height; ++y) {
    raw.push_back(0);  // filter: none
    raw.insert(raw.end(), img.pixels.begin() + static_cast<size_t>(y) * img.width,
               img.pixels.begin() + static_cast<size_t>(y + 1) * img.width);
  }
  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::vector<uint8_t> compressed(bound);
  const int rc = compress2(compressed.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 6);
  require(rc == Z_OK, "save_png_gray: deflate failed");
  compressed.resize(bound);
  detail::png_chunk(f, "IDAT", compressed);
  detail::png_chunk(f, "IEND", {});
  require(f.good(), "save_png_gray: write failed for " + path.string());
}

inline ImageU8 load_image(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  require(ext == ".pgm" || ext == ".PGM",
          "load_image: only binary PGM input is supported, got " + path.string());
  return load_pgm(path);
}

}  // namespace blindcount
