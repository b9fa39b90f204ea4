#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "blindcount/common.hpp"

namespace blindcount {

// Nonnegative per-pixel density raster. The integral over the raster is the
// count it represents. Values are kept in double precision; the on-disk
// format is float32 (see save_dmap).
struct DensityMap {
  int height = 0;
  int width = 0;
  std::vector<double> values;

  DensityMap() = default;
  DensityMap(int h, int w, double fill = 0.0)
      : height(h), width(w), values(static_cast<size_t>(h) * w, fill) {
    require(h > 0 && w > 0, "DensityMap: dimensions must be positive");
  }

  double& at(int y, int x) { return values[static_cast<size_t>(y) * width + x]; }
  double at(int y, int x) const { return values[static_cast<size_t>(y) * width + x]; }
  size_t size() const { return values.size(); }

  bool same_shape(const DensityMap& other) const {
    return height == other.height && width == other.width;
  }
};

struct InstanceCenter {
  double x = 0.0;
  double y = 0.0;
};

inline double integrate(const DensityMap& map) {
  double sum = 0.0;
  for (double v : map.values) sum += v;
  return sum;
}

// Unit-mass Gaussian kernel per center, evaluated at pixel centers. Each
// kernel is renormalized after truncation so the raster integrates to the
// number of centers exactly, even for centers near an edge.
inline DensityMap pseudo_density(const std::vector<InstanceCenter>& centers, int h, int w,
                                 double sigma) {
  require(h > 0 && w > 0, "pseudo_density: dimensions must be positive");
  require(sigma > 0.0, "pseudo_density: sigma must be positive");
  DensityMap map(h, w);
  const int radius = std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
  const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
  std::vector<double> kernel;
  for (const auto& c : centers) {
    require(c.x >= 0.0 && c.x < static_cast<double>(w) && c.y >= 0.0 && c.y < static_cast<double>(h),
            "pseudo_density: center outside the raster");
    const int cx = static_cast<int>(std::floor(c.x));
    const int cy = static_cast<int>(std::floor(c.y));
    const int x0 = std::max(0, cx - radius);
    const int x1 = std::min(w - 1, cx + radius);
    const int y0 = std::max(0, cy - radius);
    const int y1 = std::min(h - 1, cy + radius);
    kernel.assign(static_cast<size_t>(y1 - y0 + 1) * (x1 - x0 + 1), 0.0);
    double mass = 0.0;
    size_t k = 0;
    for (int y = y0; y <= y1; ++y) {
      const double dy = (y + 0.5) - c.y;
      for (int x = x0; x <= x1; ++x, ++k) {
        const double dx = (x + 0.5) - c.x;
        const double v = std::exp(-(dx * dx + dy * dy) * inv2s2);
        kernel[k] = v;
        mass += v;
      }
    }
    const double scale = 1.0 / mass;
    k = 0;
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x, ++k) map.at(y, x) += kernel[k] * scale;
  }
  return map;
}

inline double l2_norm(const DensityMap& map) {
  double sum = 0.0;
  for (double v : map.values) sum += v * v;
  return std::sqrt(sum);
}

// || gt/||gt||2 - pred/||pred||2 ||2. A map with zero norm normalizes to the
// zero map, so the cost against it equals the unit norm of the other side.
inline double normalized_cost(const DensityMap& gt, const DensityMap& pred) {
  require(gt.same_shape(pred), "normalized_cost: dimension mismatch");
  const double ng = l2_norm(gt);
  const double np = l2_norm(pred);
  const double sg = ng > 0.0 ? 1.0 / ng : 0.0;
  const double sp = np > 0.0 ? 1.0 / np : 0.0;
  double sum = 0.0;
  for (size_t i = 0; i < gt.values.size(); ++i) {
    const double d = gt.values[i] * sg - pred.values[i] * sp;
    sum += d * d;
  }
  return std::sqrt(sum);
}

inline double l1_distance(const DensityMap& a, const DensityMap& b) {
  require(a.same_shape(b), "l1_distance: dimension mismatch");
  double sum = 0.0;
  for (size_t i = 0; i < a.values.size(); ++i) sum += std::abs(a.values[i] - b.values[i]);
  return sum;
}

inline DensityMap combine_sum(const std::vector<DensityMap>& maps) {
  require(!maps.empty(), "combine_sum: empty list");
  DensityMap out = maps.front();
  for (size_t m = 1; m < maps.size(); ++m) {
    require(out.same_shape(maps[m]), "combine_sum: dimension mismatch");
    for (size_t i = 0; i < out.values.size(); ++i) out.values[i] += maps[m].values[i];
  }
  return out;
}

inline DensityMap combine_max(const std::vector<DensityMap>& maps) {
  require(!maps.empty(), "combine_max: empty list");
  DensityMap out = maps.front();
  for (size_t m = 1; m < maps.size(); ++m) {
    require(out.same_shape(maps[m]), "combine_max: dimension mismatch");
    for (size_t i = 0; i < out.values.size(); ++i)
      out.values[i] = std::max(out.values[i], maps[m].values[i]);
  }
  return out;
}

// On-disk raster: 16-byte header (magic "DMAP", u32 height, u32 width,
// u32 reserved), then float32 little-endian values, row-major.
inline void save_dmap(const std::filesystem::path& path, const DensityMap& map) {
  std::ofstream f(path, std::ios::binary);
  require(f.good(), "save_dmap: cannot open " + path.string());
  const char magic[4] = {'D', 'M', 'A', 'P'};
  f.write(magic, 4);
  const uint32_t h = static_cast<uint32_t>(map.height);
  const uint32_t w = static_cast<uint32_t>(map.width);
  const uint32_t reserved = 0;
  f.write(reinterpret_cast<const char*>(&h), 4);
  f.write(reinterpret_cast<const char*>(&w), 4);
  f.write(reinterpret_cast<const char*>(&reserved), 4);
  std::vector<float> buf(map.values.size());
  for (size_t i = 0; i < buf.size(); ++i) buf[i] = static_cast<float>(map.values[i]);
  f.write(reinterpret_cast<const char*>(buf.data()),
          static_cast<std::streamsize>(buf.size() * sizeof(float)));
  require(f.good(), "save_dmap: write failed for " + path.string());
}

inline DensityMap load_dmap(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  require(f.good(), "load_dmap: cannot open " + path.string());
  char magic[4];
  f.read(magic, 4);
  require(f.gcount() == 4 && std::memcmp(magic, "DMAP", 4) == 0,
          "load_dmap: bad magic in " + path.string());
  uint32_t h = 0, w = 0, reserved = 0;
  f.read(reinterpret_cast<char*>(&h), 4);
  f.read(reinterpret_cast<char*>(&w), 4);
  f.read(reinterpret_cast<char*>(&reserved), 4);
  require(f.good() && h > 0 && w > 0, "load_dmap: bad header in " + path.string());
  DensityMap map(static_cast<int>(h), static_cast<int>(w));
  std::vector<float> buf(map.values.size());
  f.read(reinterpret_cast<char*>(buf.data()),
         static_cast<std::streamsize>(buf.size() * sizeof(float)));
  require(f.gcount() == static_cast<std::streamsize>(buf.size() * sizeof(float)),
          "load_dmap: truncated data in " + path.string());
  for (size_t i = 0; i < buf.size(); ++i) map.values[i] = buf[i];
  return map;
}

// Provenance sidecar next to a .dmap file. `kind` is "class_index" for
// dataset ground truth or "head_index" for model output.
inline void save_dmap_sidecar(const std::filesystem::path& dmap_path, const std::string& image_id,
                              const std::string& kind, int index) {
  nlohmann::json j;
  j["image_id"] = image_id;
  j[kind] = index;
  std::filesystem::path p = dmap_path;
  p.replace_extension(".json");
  std::ofstream f(p);
  require(f.good(), "save_dmap_sidecar: cannot open " + p.string());
  f << j.dump(2) << "\n";
}

}  // namespace blindcount
