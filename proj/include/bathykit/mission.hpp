// Lawnmower (boustrophedon) coverage planning inside a shoreline polygon,
// with transect spacing derived from side-scan swath geometry, and the
// plain-text waypoint file the simulator consumes.
//
// heading_deg is the compass bearing of the sweep advance (the direction in
// which the survey progresses from transect to transect); transects run
// perpendicular to it. heading 0 therefore sweeps north over east-west
// transect lines.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bathykit/detail/polygon.hpp"
#include "bathykit/geodesy.hpp"

namespace bathykit::mission {

class PlanError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class MissionIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Waypoint {
  PlanarPoint position;
  double acceptance_radius_m = 3.0;
};

struct MissionPlan {
  std::vector<PlanarPoint> boundary;  ///< simple polygon, CCW
  std::vector<PlanarPoint> waypoints;
  double spacing_m = 0.0;
  double heading_deg = 0.0;
  double cruise_speed_mps = 1.5;
  double acceptance_radius_m = 3.0;
};

/// Transect spacing for a side-scan swath: each side covers side_range_m,
/// so full coverage with the given overlap fraction needs
/// 2 * side_range * (1 - overlap).
inline double swath_spacing(double side_range_m, double overlap_frac) {
  if (side_range_m <= 0.0) throw PlanError("side range must be positive");
  if (overlap_frac < 0.0 || overlap_frac >= 1.0)
    throw PlanError("overlap fraction must lie in [0, 1)");
  return 2.0 * side_range_m * (1.0 - overlap_frac);
}

namespace detail {

/// Transect line offsets across the eroded polygon's extent, centred so a
/// lone transect runs through the interior rather than along an edge.
inline std::vector<double> transect_offsets(double smin, double smax,
                                            double spacing) {
  const double extent = smax - smin;
  const double ratio = extent / spacing;
  auto steps = static_cast<std::size_t>(std::floor(ratio));
  if (ratio - static_cast<double>(steps) > 1.0 - 1e-9) ++steps;  // snap ~integer
  const double anchor =
      smin + (extent - static_cast<double>(steps) * spacing) / 2.0;
  std::vector<double> offsets(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k)
    offsets[k] = anchor + static_cast<double>(k) * spacing;
  return offsets;
}

}  // namespace detail

inline MissionPlan lawnmower(std::span<const PlanarPoint> boundary,
                             double spacing_m, double heading_deg,
                             double margin_m = 0.0,
                             double cruise_speed_mps = 1.5,
                             double acceptance_radius_m = 3.0) {
  if (boundary.size() < 3) throw PlanError("boundary needs at least 3 vertices");
  if (spacing_m <= 0.0) throw PlanError("spacing must be positive");
  if (margin_m < 0.0) throw PlanError("margin must be >= 0");

  MissionPlan plan;
  plan.boundary.assign(boundary.begin(), boundary.end());
  if (bathykit::detail::signed_area(plan.boundary) < 0.0)
    std::reverse(plan.boundary.begin(), plan.boundary.end());
  if (std::fabs(bathykit::detail::signed_area(plan.boundary)) < 1e-9)
    throw PlanError("boundary polygon is degenerate");
  if (!bathykit::detail::polygon_is_simple(plan.boundary))
    throw PlanError("boundary polygon is self-intersecting");
  plan.spacing_m = spacing_m;
  plan.heading_deg = heading_deg;
  plan.cruise_speed_mps = cruise_speed_mps;
  plan.acceptance_radius_m = acceptance_radius_m;

  const std::vector<PlanarPoint> region =
      bathykit::detail::erode_polygon(plan.boundary, margin_m);
  if (region.size() < 3 ||
      std::fabs(bathykit::detail::signed_area(region)) < 1e-9)
    throw PlanError("polygon eroded by the margin is empty");

  const double h = deg_to_rad(heading_deg);
  const double sx = std::sin(h), sy = std::cos(h);   // sweep advance
  const double tx = sy, ty = -sx;                    // transect direction

  double smin = std::numeric_limits<double>::infinity();
  double smax = -smin;
  for (const auto& p : region) {
    const double s = p.x_m * sx + p.y_m * sy;
    smin = std::min(smin, s);
    smax = std::max(smax, s);
  }

  const auto offsets = detail::transect_offsets(smin, smax, spacing_m);
  bool reverse = false;
  for (const double off : offsets) {
    const PlanarPoint line_origin{off * sx, off * sy};
    auto segments =
        bathykit::detail::clip_line_to_polygon(line_origin, tx, ty, region);
    // drop tangent slivers
    std::erase_if(segments, [](const auto& seg) {
      return seg.second - seg.first < 1e-9;
    });
    if (segments.empty()) {
      reverse = !reverse;
      continue;
    }
    if (reverse) std::reverse(segments.begin(), segments.end());
    for (const auto& [ta, tb] : segments) {
      const double t0 = reverse ? tb : ta;
      const double t1 = reverse ? ta : tb;
      plan.waypoints.push_back(
          {line_origin.x_m + t0 * tx, line_origin.y_m + t0 * ty});
      plan.waypoints.push_back(
          {line_origin.x_m + t1 * tx, line_origin.y_m + t1 * ty});
    }
    reverse = !reverse;
  }
  if (plan.waypoints.size() < 2)
    throw PlanError("no transects fit inside the eroded polygon");
  return plan;
}

// ---------------------------------------------------------------------------
// Waypoint file: georeferenced plain text the simulator and ground tools read.

inline void export_mission(const MissionPlan& plan, const LocalFrame& frame,
                           std::ostream& out) {
  char buf[160];
  out << "# bathykit mission v1\n";
  std::snprintf(buf, sizeof buf, "# origin %.9f %.9f\n", frame.origin.lat_deg,
                frame.origin.lon_deg);
  out << buf;
  std::snprintf(buf, sizeof buf,
                "# spacing_m %.3f heading_deg %.3f cruise_mps %.3f\n",
                plan.spacing_m, plan.heading_deg, plan.cruise_speed_mps);
  out << buf;
  out << "# index lat_deg lon_deg accept_radius_m\n";
  for (std::size_t i = 0; i < plan.waypoints.size(); ++i) {
    const LatLon ll = from_local(plan.waypoints[i], frame);
    std::snprintf(buf, sizeof buf, "%zu %.8f %.8f %.2f\n", i, ll.lat_deg,
                  ll.lon_deg, plan.acceptance_radius_m);
    out << buf;
  }
}

inline void export_mission(const MissionPlan& plan, const LocalFrame& frame,
                           const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw MissionIoError("cannot open " + path.string());
  export_mission(plan, frame, out);
  if (!out) throw MissionIoError("write failed: " + path.string());
}

struct MissionFile {
  LocalFrame frame;
  MissionPlan plan;  ///< waypoints in the file's local frame; boundary empty
};

inline MissionFile parse_mission(std::istream& in) {
  MissionFile mf;
  bool have_origin = false;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    if (line[0] == '#') {
      std::string hash, key;
      ls >> hash >> key;
      if (key == "origin") {
        double lat = 0.0, lon = 0.0;
        if (!(ls >> lat >> lon))
          throw MissionIoError("malformed origin line in mission file");
        mf.frame = LocalFrame::at({lat, lon});
        have_origin = true;
      } else if (key == "spacing_m") {
        std::string k2, k3;
        double spacing = 0.0, heading = 0.0, cruise = 0.0;
        if (ls >> spacing >> k2 >> heading >> k3 >> cruise) {
          mf.plan.spacing_m = spacing;
          mf.plan.heading_deg = heading;
          mf.plan.cruise_speed_mps = cruise;
        }
      }
      continue;
    }
    if (!have_origin)
      throw MissionIoError("mission file lacks an origin header line");
    std::size_t index = 0;
    double lat = 0.0, lon = 0.0, radius = 0.0;
    if (!(ls >> index >> lat >> lon >> radius))
      throw MissionIoError("malformed waypoint line: " + line);
    if (index != mf.plan.waypoints.size())
      throw MissionIoError("waypoint indices out of order");
    mf.plan.waypoints.push_back(to_local({lat, lon}, mf.frame));
    mf.plan.acceptance_radius_m = radius;
  }
  if (!have_origin || mf.plan.waypoints.empty())
    throw MissionIoError("mission file has no waypoints");
  return mf;
}

inline MissionFile parse_mission(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissionIoError("cannot open " + path.string());
  return parse_mission(in);
}

/// Boundary file: one vertex per line, either DDM pairs ("N019.08.140
/// E072.53.740") or decimal degrees ("19.1357, 72.8957"). '#' comments.
inline std::vector<LatLon> load_boundary(std::istream& in) {
  std::vector<LatLon> verts;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    verts.push_back(parse_latlon(line.substr(first)));
  }
  if (verts.size() < 3)
    throw MissionIoError("boundary file needs at least 3 vertices");
  return verts;
}

inline std::vector<LatLon> load_boundary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissionIoError("cannot open " + path.string());
  return load_boundary(in);
}

}  // namespace bathykit::mission
