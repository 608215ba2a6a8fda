// Depth-band volume/area table and survey summary from a depth grid.
// Band semantics are the horizontal-layer integral: the band [lower, upper)
// collects, from every wet cell, the water column slice between those two
// depth planes, and its area is the bottom area deeper than `lower`. With
// these semantics band volumes sum exactly to the total volume and band 0's
// area equals the mapped area.
#pragma once

#include <cmath>
#include <cstdio>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bathykit/grid.hpp"

namespace bathykit::hypso {

class HypsometryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct BandRow {
  double lower_m = 0.0;
  double upper_m = 0.0;
  double volume_m3 = 0.0;
  double area_m2 = 0.0;
};

struct SurveySummary {
  double total_volume_m3 = 0.0;
  double mapped_area_m2 = 0.0;
  double mean_depth_m = 0.0;
  double max_depth_m = 0.0;
};

namespace detail {

/// Neumaier compensated accumulator; keeps the band/total conservation
/// identity tight on large grids.
struct Kahan {
  double sum = 0.0;
  double c = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::fabs(sum) >= std::fabs(v))
      c += (sum - t) + v;
    else
      c += (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + c; }
};

}  // namespace detail

inline SurveySummary summary(const DepthGrid& g) {
  detail::Kahan volume;
  std::size_t cells = 0;
  double max_depth = 0.0;
  const double cell_area = g.cell_m * g.cell_m;
  for (std::size_t i = 0; i < g.depths.size(); ++i) {
    if (!g.mask[i]) continue;
    ++cells;
    volume.add(g.depths[i] * cell_area);
    max_depth = std::max(max_depth, g.depths[i]);
  }
  if (cells == 0) throw HypsometryError("grid has no valid cells");
  SurveySummary s;
  s.total_volume_m3 = volume.value();
  s.mapped_area_m2 = static_cast<double>(cells) * cell_area;
  s.mean_depth_m = s.total_volume_m3 / s.mapped_area_m2;
  s.max_depth_m = max_depth;
  return s;
}

inline std::vector<BandRow> band_table(const DepthGrid& g, double interval_m) {
  if (interval_m <= 0.0) throw HypsometryError("band interval must be positive");
  double max_depth = 0.0;
  std::size_t cells = 0;
  for (std::size_t i = 0; i < g.depths.size(); ++i)
    if (g.mask[i]) {
      ++cells;
      max_depth = std::max(max_depth, g.depths[i]);
    }
  if (cells == 0) throw HypsometryError("grid has no valid cells");

  const auto n_bands = static_cast<std::size_t>(
      std::max(1.0, std::ceil(max_depth / interval_m)));
  std::vector<detail::Kahan> vol(n_bands), area(n_bands);
  const double cell_area = g.cell_m * g.cell_m;
  for (std::size_t i = 0; i < g.depths.size(); ++i) {
    if (!g.mask[i]) continue;
    const double d = g.depths[i];
    for (std::size_t k = 0; k < n_bands; ++k) {
      const double lower = static_cast<double>(k) * interval_m;
      if (d <= lower) break;
      area[k].add(cell_area);
      vol[k].add(cell_area * std::min(d - lower, interval_m));
    }
  }
  std::vector<BandRow> rows(n_bands);
  for (std::size_t k = 0; k < n_bands; ++k) {
    rows[k].lower_m = static_cast<double>(k) * interval_m;
    rows[k].upper_m = static_cast<double>(k + 1) * interval_m;
    rows[k].volume_m3 = vol[k].value();
    rows[k].area_m2 = area[k].value();
  }
  return rows;
}

enum class ReportFormat { csv, text, json };

namespace detail {

inline std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

}  // namespace detail

/// Deterministic serialization of the band table and summary. CSV and text
/// round to 2 decimals; JSON keeps full precision and round-trips.
inline std::string report(std::span<const BandRow> rows, const SurveySummary& s,
                          ReportFormat format) {
  using detail::fixed;
  if (format == ReportFormat::csv) {
    std::string out = "lower,upper,volume,area\n";
    for (const BandRow& r : rows) {
      out += fixed(r.lower_m, 2) + "," + fixed(r.upper_m, 2) + "," +
             fixed(r.volume_m3, 2) + "," + fixed(r.area_m2, 2) + "\n";
    }
    return out;
  }
  if (format == ReportFormat::json) {
    nlohmann::json j;
    j["bands"] = nlohmann::json::array();
    for (const BandRow& r : rows)
      j["bands"].push_back({{"lower_m", r.lower_m},
                            {"upper_m", r.upper_m},
                            {"volume_m3", r.volume_m3},
                            {"area_m2", r.area_m2}});
    j["summary"] = {{"total_volume_m3", s.total_volume_m3},
                    {"mapped_area_m2", s.mapped_area_m2},
                    {"mean_depth_m", s.mean_depth_m},
                    {"max_depth_m", s.max_depth_m}};
    return j.dump(2) + "\n";
  }
  // text: band table plus the survey findings block
  std::string out;
  out += "Lower (m)  Upper (m)  Volume (m3)      Area (m2)\n";
  for (const BandRow& r : rows) {
    char line[128];
    std::snprintf(line, sizeof line, "%-10.2f %-10.2f %-16.2f %-14.2f\n",
                  r.lower_m, r.upper_m, r.volume_m3, r.area_m2);
    out += line;
  }
  out += "\n";
  out += "Total Volume: " + fixed(s.total_volume_m3, 0) + " m3\n";
  out += "Total Mapped Area: " + fixed(s.mapped_area_m2, 0) + " m2\n";
  out += "Average Depth: " + fixed(s.mean_depth_m, 1) + " m\n";
  out += "Maximum Depth: " + fixed(s.max_depth_m, 2) + " m\n";
  return out;
}

}  // namespace bathykit::hypso
