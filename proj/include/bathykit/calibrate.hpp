// Depth calibration: constant sonar bias estimated from known-depth pairs
// (error = depth_sonar - depth_known) and conversion of raw pings into
// calibrated soundings in the local frame.
#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bathykit/geodesy.hpp"
#include "bathykit/sonarlog.hpp"

namespace bathykit::calibrate {

class CalibrationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct DepthOffset {
  double error_m = 0.0;  ///< mean(sonar - known); subtract from raw readings
  std::size_t n_samples = 0;
};

/// One calibrated sounding in the local planar frame.
struct SurveyPoint {
  double x_m = 0.0;
  double y_m = 0.0;
  double depth_m = 0.0;
  std::uint32_t t_ms = 0;
};

/// Mean of (sonar - known) over all calibration pairs; the least-squares
/// estimate of a constant bias.
inline DepthOffset compute_offset(
    std::span<const std::pair<double, double>> pairs) {
  if (pairs.empty())
    throw CalibrationError("calibration needs at least one depth pair");
  double sum = 0.0;
  for (const auto& [sonar_m, known_m] : pairs) {
    if (sonar_m < 0.0 || known_m < 0.0)
      throw CalibrationError("calibration depths must be >= 0");
    sum += sonar_m - known_m;
  }
  DepthOffset off;
  off.error_m = sum / static_cast<double>(pairs.size());
  off.n_samples = pairs.size();
  if (std::fabs(off.error_m) >= 5.0)
    throw CalibrationError(
        "calibration offset exceeds 5 m; readings are not plausibly paired");
  return off;
}

struct CalibratedDepth {
  double depth_m = 0.0;
  bool clamped = false;  ///< true when the offset drove the depth below zero
};

inline CalibratedDepth apply_calibration(double raw_depth_m, DepthOffset off) {
  if (raw_depth_m < 0.0)
    throw CalibrationError("raw depth must be >= 0");
  const double d = raw_depth_m - off.error_m;
  if (d < 0.0) return {0.0, true};
  return {d, false};
}

struct QualityFilter {
  double min_depth_m = 0.0;
  double max_depth_m = sonarlog::SonarSpec::max_depth_m;
  double dedup_radius_m = 0.5;  ///< drop points this close to the last kept one
};

struct ExtractResult {
  std::vector<SurveyPoint> points;
  std::size_t dropped_beam = 0;      ///< not a down beam
  std::size_t dropped_position = 0;  ///< no fix (zero lat and lon)
  std::size_t dropped_depth = 0;     ///< outside [min_depth, max_depth]
  std::size_t dropped_duplicate = 0; ///< within dedup radius of last kept
  std::size_t clamped = 0;           ///< calibration clamped depth at zero
};

/// Turns down-beam pings into calibrated soundings: depth_cm -> m, offset
/// applied, position projected into `frame`. Side and imaging beams are
/// imagery, not soundings, and are dropped.
inline ExtractResult extract_soundings(std::span<const sonarlog::PingRecord> pings,
                                       DepthOffset off, const LocalFrame& frame,
                                       const QualityFilter& filter = {}) {
  ExtractResult r;
  r.points.reserve(pings.size());
  bool have_last = false;
  double last_x = 0.0, last_y = 0.0;
  const double dedup2 = filter.dedup_radius_m * filter.dedup_radius_m;
  for (const sonarlog::PingRecord& p : pings) {
    if (p.beam_id != 0 && p.beam_id != 1) {
      ++r.dropped_beam;
      continue;
    }
    if (p.lat_e7 == 0 && p.lon_e7 == 0) {
      ++r.dropped_position;
      continue;
    }
    const CalibratedDepth cd = apply_calibration(p.depth_m(), off);
    if (cd.clamped) ++r.clamped;
    if (cd.depth_m < filter.min_depth_m || cd.depth_m > filter.max_depth_m) {
      ++r.dropped_depth;
      continue;
    }
    const PlanarPoint q = to_local({p.lat_deg(), p.lon_deg()}, frame);
    if (have_last) {
      const double dx = q.x_m - last_x, dy = q.y_m - last_y;
      if (dx * dx + dy * dy < dedup2) {
        ++r.dropped_duplicate;
        continue;
      }
    }
    have_last = true;
    last_x = q.x_m;
    last_y = q.y_m;
    r.points.push_back({q.x_m, q.y_m, cd.depth_m, p.time_offset_ms});
  }
  return r;
}

}  // namespace bathykit::calibrate
