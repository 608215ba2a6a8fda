// Rasterized depth field with a validity mask, plus the two export formats
// (ESRI ASCII grid and 8-bit PGM heat map).
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "bathykit/geodesy.hpp"

namespace bathykit {

class GridError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DepthGrid {
  PlanarPoint origin;  ///< centre of cell (0, 0); y grows north, row-major
  double cell_m = 1.0;
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> depths;      ///< NaN sentinel where masked
  std::vector<std::uint8_t> mask;  ///< 1 = valid

  std::size_t idx(std::size_t ix, std::size_t iy) const {
    return iy * width + ix;
  }
  bool valid(std::size_t ix, std::size_t iy) const {
    return mask[idx(ix, iy)] != 0;
  }
  double at(std::size_t ix, std::size_t iy) const { return depths[idx(ix, iy)]; }
  PlanarPoint cell_center(std::size_t ix, std::size_t iy) const {
    return {origin.x_m + static_cast<double>(ix) * cell_m,
            origin.y_m + static_cast<double>(iy) * cell_m};
  }
  std::size_t valid_count() const {
    std::size_t n = 0;
    for (auto m : mask) n += m != 0;
    return n;
  }
};

inline constexpr double kGridNoData = -9999.0;

inline void write_esri_ascii(const DepthGrid& g, std::ostream& out) {
  char buf[64];
  out << "ncols " << g.width << "\n";
  out << "nrows " << g.height << "\n";
  std::snprintf(buf, sizeof buf, "%.6f", g.origin.x_m - g.cell_m / 2.0);
  out << "xllcorner " << buf << "\n";
  std::snprintf(buf, sizeof buf, "%.6f", g.origin.y_m - g.cell_m / 2.0);
  out << "yllcorner " << buf << "\n";
  std::snprintf(buf, sizeof buf, "%.6f", g.cell_m);
  out << "cellsize " << buf << "\n";
  out << "NODATA_value -9999\n";
  // rows north to south per the format
  for (std::size_t row = 0; row < g.height; ++row) {
    const std::size_t iy = g.height - 1 - row;
    for (std::size_t ix = 0; ix < g.width; ++ix) {
      if (ix) out << ' ';
      if (g.valid(ix, iy)) {
        std::snprintf(buf, sizeof buf, "%.3f", g.at(ix, iy));
        out << buf;
      } else {
        out << "-9999";
      }
    }
    out << "\n";
  }
}

inline void write_esri_ascii(const DepthGrid& g,
                             const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw GridError("cannot open " + path.string());
  write_esri_ascii(g, out);
  if (!out) throw GridError("write failed: " + path.string());
}

/// 8-bit binary PGM: depth scaled linearly onto 1..255 over the valid
/// range, masked cells 0. Intended for eyeballing, not analysis.
inline void write_pgm(const DepthGrid& g, std::ostream& out) {
  double dmin = std::numeric_limits<double>::infinity();
  double dmax = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < g.depths.size(); ++i)
    if (g.mask[i]) {
      dmin = std::min(dmin, g.depths[i]);
      dmax = std::max(dmax, g.depths[i]);
    }
  const double range = dmax - dmin;
  out << "P5\n" << g.width << " " << g.height << "\n255\n";
  for (std::size_t row = 0; row < g.height; ++row) {
    const std::size_t iy = g.height - 1 - row;
    for (std::size_t ix = 0; ix < g.width; ++ix) {
      std::uint8_t v = 0;
      if (g.valid(ix, iy)) {
        v = range > 0.0
                ? static_cast<std::uint8_t>(
                      1 + std::lround(254.0 * (g.at(ix, iy) - dmin) / range))
                : 255;
      }
      out.put(static_cast<char>(v));
    }
  }
}

inline void write_pgm(const DepthGrid& g, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw GridError("cannot open " + path.string());
  write_pgm(g, out);
  if (!out) throw GridError("write failed: " + path.string());
}

}  // namespace bathykit
