// Planar polygon helpers shared by the planner and the rasterizer.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "bathykit/geodesy.hpp"

namespace bathykit::detail {

inline double cross(double ax, double ay, double bx, double by) {
  return ax * by - ay * bx;
}

inline double signed_area(std::span<const PlanarPoint> poly) {
  double a = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % n];
    a += p.x_m * q.y_m - q.x_m * p.y_m;
  }
  return a / 2.0;
}

inline double dist_point_segment(PlanarPoint p, PlanarPoint a, PlanarPoint b) {
  const double vx = b.x_m - a.x_m, vy = b.y_m - a.y_m;
  const double wx = p.x_m - a.x_m, wy = p.y_m - a.y_m;
  const double vv = vx * vx + vy * vy;
  double t = vv > 0.0 ? (wx * vx + wy * vy) / vv : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dx = wx - t * vx, dy = wy - t * vy;
  return std::sqrt(dx * dx + dy * dy);
}

/// Boundary-inclusive point-in-polygon (ray cast; points within edge_tol of
/// an edge count as inside).
inline bool point_in_polygon(PlanarPoint q, std::span<const PlanarPoint> poly,
                             double edge_tol = 1e-9) {
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i)
    if (dist_point_segment(q, poly[i], poly[(i + 1) % n]) <= edge_tol)
      return true;
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const auto& a = poly[i];
    const auto& b = poly[j];
    if ((a.y_m > q.y_m) != (b.y_m > q.y_m) &&
        q.x_m < (b.x_m - a.x_m) * (q.y_m - a.y_m) / (b.y_m - a.y_m) + a.x_m)
      inside = !inside;
  }
  return inside;
}

inline bool segments_intersect(PlanarPoint a, PlanarPoint b, PlanarPoint c,
                               PlanarPoint d) {
  const auto orient = [](PlanarPoint p, PlanarPoint q, PlanarPoint r) {
    const double v = cross(q.x_m - p.x_m, q.y_m - p.y_m, r.x_m - p.x_m,
                           r.y_m - p.y_m);
    return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
  };
  const auto on_segment = [](PlanarPoint p, PlanarPoint q, PlanarPoint r) {
    return std::min(p.x_m, q.x_m) <= r.x_m && r.x_m <= std::max(p.x_m, q.x_m) &&
           std::min(p.y_m, q.y_m) <= r.y_m && r.y_m <= std::max(p.y_m, q.y_m);
  };
  const int o1 = orient(a, b, c), o2 = orient(a, b, d);
  const int o3 = orient(c, d, a), o4 = orient(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

inline bool polygon_is_simple(std::span<const PlanarPoint> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      // skip adjacent edges (they share an endpoint by construction)
      if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
      if (segments_intersect(poly[i], poly[(i + 1) % n], poly[j],
                             poly[(j + 1) % n]))
        return false;
    }
  }
  return true;
}

inline bool polygon_is_convex(std::span<const PlanarPoint> poly) {
  const std::size_t n = poly.size();
  int sign = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = poly[i];
    const auto& b = poly[(i + 1) % n];
    const auto& c = poly[(i + 2) % n];
    const double v =
        cross(b.x_m - a.x_m, b.y_m - a.y_m, c.x_m - b.x_m, c.y_m - b.y_m);
    if (v > 0.0) {
      if (sign < 0) return false;
      sign = 1;
    } else if (v < 0.0) {
      if (sign > 0) return false;
      sign = -1;
    }
  }
  return true;
}

/// Clips a CCW polygon by the half-plane at signed distance >= margin on the
/// inward side of each edge. Exact inward offset for convex polygons; for
/// non-convex input it over-erodes near reflex vertices, which is the safe
/// direction for keeping waypoints in water.
inline std::vector<PlanarPoint> erode_polygon(std::span<const PlanarPoint> poly,
                                              double margin) {
  std::vector<PlanarPoint> subject(poly.begin(), poly.end());
  if (margin <= 0.0) return subject;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n && subject.size() >= 3; ++i) {
    const auto& a = poly[i];
    const auto& b = poly[(i + 1) % n];
    double nx = -(b.y_m - a.y_m), ny = b.x_m - a.x_m;  // inward for CCW
    const double len = std::hypot(nx, ny);
    if (len == 0.0) continue;
    nx /= len;
    ny /= len;
    std::vector<PlanarPoint> out;
    out.reserve(subject.size() + 1);
    const auto dist = [&](const PlanarPoint& p) {
      return (p.x_m - a.x_m) * nx + (p.y_m - a.y_m) * ny - margin;
    };
    for (std::size_t k = 0; k < subject.size(); ++k) {
      const PlanarPoint& p = subject[k];
      const PlanarPoint& q = subject[(k + 1) % subject.size()];
      const double dp = dist(p), dq = dist(q);
      if (dp >= 0.0) out.push_back(p);
      if ((dp >= 0.0) != (dq >= 0.0)) {
        const double t = dp / (dp - dq);
        out.push_back({p.x_m + t * (q.x_m - p.x_m), p.y_m + t * (q.y_m - p.y_m)});
      }
    }
    subject = std::move(out);
  }
  return subject;
}

/// Intersection of the line {origin + tau * dir} with a polygon, returned as
/// sorted tau intervals. Convex polygons go through a Cyrus-Beck clip (exact
/// for edges collinear with the line); other simple polygons use even-odd
/// crossing parity with on-line vertices resolved to one side.
inline std::vector<std::pair<double, double>> clip_line_to_polygon(
    PlanarPoint origin, double dir_x, double dir_y,
    std::span<const PlanarPoint> poly) {
  const std::size_t n = poly.size();
  std::vector<std::pair<double, double>> intervals;
  if (polygon_is_convex(poly)) {
    double tmin = -std::numeric_limits<double>::infinity();
    double tmax = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const auto& a = poly[i];
      const auto& b = poly[(i + 1) % n];
      const double nx = -(b.y_m - a.y_m), ny = b.x_m - a.x_m;  // inward
      const double denom = dir_x * nx + dir_y * ny;
      const double s0 = (origin.x_m - a.x_m) * nx + (origin.y_m - a.y_m) * ny;
      if (denom == 0.0) {
        if (s0 < 0.0) return {};  // line parallel and outside this edge
        continue;
      }
      const double tau = -s0 / denom;
      if (denom > 0.0)
        tmin = std::max(tmin, tau);
      else
        tmax = std::min(tmax, tau);
    }
    if (tmin <= tmax) intervals.emplace_back(tmin, tmax);
    return intervals;
  }

  std::vector<double> taus;
  const auto side = [&](const PlanarPoint& p) {
    return cross(dir_x, dir_y, p.x_m - origin.x_m, p.y_m - origin.y_m);
  };
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = poly[i];
    const auto& b = poly[(i + 1) % n];
    const double sa = side(a), sb = side(b);
    const bool pa = sa >= 0.0, pb = sb >= 0.0;  // on-line counts positive
    if (pa == pb) continue;
    const double u = sa / (sa - sb);
    const double ix = a.x_m + u * (b.x_m - a.x_m);
    const double iy = a.y_m + u * (b.y_m - a.y_m);
    taus.push_back((ix - origin.x_m) * dir_x + (iy - origin.y_m) * dir_y);
  }
  std::sort(taus.begin(), taus.end());
  for (std::size_t i = 0; i + 1 < taus.size(); i += 2)
    intervals.emplace_back(taus[i], taus[i + 1]);
  return intervals;
}

}  // namespace bathykit::detail
