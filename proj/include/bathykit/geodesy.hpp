// Coordinate parsing (degrees/decimal-minutes and decimal degrees) and an
// equirectangular local planar frame for kilometre-scale survey areas.
#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

namespace bathykit {

/// Scale of one degree of latitude, metres. Good to <0.1 m over a 2 km
/// lake; we do not attempt datum-grade geodesy.
inline constexpr double kMetersPerDegLat = 111320.0;

inline double deg_to_rad(double d) { return d * (std::numbers::pi / 180.0); }
inline double rad_to_deg(double r) { return r * (180.0 / std::numbers::pi); }

struct LatLon {
  double lat_deg = 0.0;
  double lon_deg = 0.0;
};

struct PlanarPoint {
  double x_m = 0.0;  ///< metres east of the frame origin
  double y_m = 0.0;  ///< metres north of the frame origin
};

class CoordinateError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class FrameBoundsError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

enum class Axis { latitude, longitude };

/// One parsed coordinate component plus the axis its hemisphere letter
/// pinned it to.
struct DdmValue {
  double value_deg = 0.0;
  Axis axis = Axis::latitude;
};

namespace detail {
inline bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

inline int to_int(std::string_view s) {
  int v = 0;
  for (char c : s) v = v * 10 + (c - '0');
  return v;
}
}  // namespace detail

/// Parses the strict chartplotter notation `[NSEW]DDD.MM.mmm`
/// (degrees, minutes, thousandths of a minute), e.g. "N019.08.140"
/// = 19 deg 8.140 min N = 19.135667 deg.
inline DdmValue parse_ddm(std::string_view text) {
  auto fail = [&](const char* why) {
    throw CoordinateError(std::string("bad DDM coordinate \"") +
                          std::string(text) + "\": " + why);
  };
  if (text.size() != 11) fail("expected [NSEW]DDD.MM.mmm");
  const char hemi = text[0];
  if (hemi != 'N' && hemi != 'S' && hemi != 'E' && hemi != 'W')
    fail("expected hemisphere letter N, S, E or W");
  if (text[4] != '.' || text[7] != '.') fail("expected [NSEW]DDD.MM.mmm");
  const std::string_view deg_s = text.substr(1, 3);
  const std::string_view min_s = text.substr(5, 2);
  const std::string_view thou_s = text.substr(8, 3);
  if (!detail::all_digits(deg_s) || !detail::all_digits(min_s) ||
      !detail::all_digits(thou_s))
    fail("expected digits in all numeric fields");

  const int deg = detail::to_int(deg_s);
  const int min_whole = detail::to_int(min_s);
  const int min_thou = detail::to_int(thou_s);
  if (min_whole >= 60) fail("minutes must be < 60");

  const bool is_lat = (hemi == 'N' || hemi == 'S');
  const int max_deg = is_lat ? 90 : 180;
  const double value = deg + (min_whole * 1000 + min_thou) / 60000.0;
  if (value > max_deg) fail(is_lat ? "latitude exceeds 90 degrees"
                                   : "longitude exceeds 180 degrees");
  const bool negative = (hemi == 'S' || hemi == 'W');
  return {negative ? -value : value,
          is_lat ? Axis::latitude : Axis::longitude};
}

/// Inverse of parse_ddm, canonical form (3-digit degrees, thousandths of a
/// minute, round half away from zero).
inline std::string format_ddm(double value_deg, Axis axis) {
  const bool negative = value_deg < 0.0;
  const char hemi = (axis == Axis::latitude) ? (negative ? 'S' : 'N')
                                             : (negative ? 'W' : 'E');
  double a = std::fabs(value_deg);
  int deg = static_cast<int>(a);
  long long thou = std::llround((a - deg) * 60000.0);
  if (thou >= 60000) {  // rounding carried into the next degree
    thou -= 60000;
    ++deg;
  }
  const int max_deg = (axis == Axis::latitude) ? 90 : 180;
  if (deg > max_deg || (deg == max_deg && thou != 0))
    throw CoordinateError("coordinate out of range for axis");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%03d.%02d.%03d", hemi, deg,
                static_cast<int>(thou / 1000), static_cast<int>(thou % 1000));
  return buf;
}

/// Accepts either DDM (`N019.08.140`) or plain decimal degrees
/// (`19.135667`). Decimal input takes its axis from `fallback_axis`.
inline DdmValue parse_coordinate(std::string_view text,
                                 Axis fallback_axis = Axis::latitude) {
  if (!text.empty() && (text[0] == 'N' || text[0] == 'S' || text[0] == 'E' ||
                        text[0] == 'W'))
    return parse_ddm(text);
  std::string buf(text);
  char* end = nullptr;
  const double v = std::strtod(buf.c_str(), &end);
  if (end == buf.c_str() || *end != '\0' || !std::isfinite(v))
    throw CoordinateError("not a DDM or decimal-degree coordinate: \"" +
                          buf + "\"");
  const double max_deg = (fallback_axis == Axis::latitude) ? 90.0 : 180.0;
  if (std::fabs(v) > max_deg)
    throw CoordinateError("decimal coordinate out of range: \"" + buf + "\"");
  return {v, fallback_axis};
}

/// Parses a "lat, lon" pair. Hemisphere letters fix each component's axis
/// (so "E072... N019..." also works); bare decimals read as lat then lon.
inline LatLon parse_latlon(std::string_view text) {
  // split on the first comma or run of whitespace
  size_t sep = text.find_first_of(", \t");
  if (sep == std::string_view::npos)
    throw CoordinateError("expected two coordinates: \"" + std::string(text) +
                          "\"");
  std::string_view first = text.substr(0, sep);
  size_t rest = text.find_first_not_of(", \t", sep);
  if (rest == std::string_view::npos)
    throw CoordinateError("expected two coordinates: \"" + std::string(text) +
                          "\"");
  std::string_view second = text.substr(rest);

  const DdmValue a = parse_coordinate(first, Axis::latitude);
  const DdmValue b = parse_coordinate(second, Axis::longitude);
  if (a.axis == b.axis)
    throw CoordinateError("need one latitude and one longitude: \"" +
                          std::string(text) + "\"");
  LatLon out;
  out.lat_deg = (a.axis == Axis::latitude) ? a.value_deg : b.value_deg;
  out.lon_deg = (a.axis == Axis::longitude) ? a.value_deg : b.value_deg;
  return out;
}

/// Local tangent frame: equirectangular projection about a survey origin.
struct LocalFrame {
  LatLon origin;
  double meters_per_deg_lat = kMetersPerDegLat;
  double meters_per_deg_lon =
      kMetersPerDegLat;  // = meters_per_deg_lat * cos(origin.lat)

  static LocalFrame at(LatLon origin,
                       double m_per_deg_lat = kMetersPerDegLat) {
    if (std::fabs(origin.lat_deg) > 90.0 || std::fabs(origin.lon_deg) > 180.0)
      throw CoordinateError("frame origin out of range");
    LocalFrame f;
    f.origin = origin;
    f.meters_per_deg_lat = m_per_deg_lat;
    f.meters_per_deg_lon = m_per_deg_lat * std::cos(deg_to_rad(origin.lat_deg));
    return f;
  }
};

/// Small-area bound: the frame is only trusted within +-1 degree of origin.
inline constexpr double kFrameBoundDeg = 1.0;

inline PlanarPoint to_local(LatLon p, const LocalFrame& f) {
  const double dlat = p.lat_deg - f.origin.lat_deg;
  const double dlon = p.lon_deg - f.origin.lon_deg;
  if (std::fabs(dlat) >= kFrameBoundDeg || std::fabs(dlon) >= kFrameBoundDeg)
    throw FrameBoundsError("point outside the local frame's 1-degree bound");
  return {dlon * f.meters_per_deg_lon, dlat * f.meters_per_deg_lat};
}

inline LatLon from_local(PlanarPoint p, const LocalFrame& f) {
  return {f.origin.lat_deg + p.y_m / f.meters_per_deg_lat,
          f.origin.lon_deg + p.x_m / f.meters_per_deg_lon};
}

}  // namespace bathykit
