#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "bathykit/geodesy.hpp"

using namespace bathykit;

TEST_CASE("parse_ddm reads the chartplotter notation") {
  const DdmValue nw_lat = parse_ddm("N019.08.140");
  CHECK(nw_lat.axis == Axis::latitude);
  CHECK_THAT(nw_lat.value_deg,
             Catch::Matchers::WithinAbs(19.0 + 8.140 / 60.0, 1e-12));

  const DdmValue se_lon = parse_ddm("E072.54.829");
  CHECK(se_lon.axis == Axis::longitude);
  CHECK_THAT(se_lon.value_deg,
             Catch::Matchers::WithinAbs(72.0 + 54.829 / 60.0, 1e-12));

  CHECK(parse_ddm("N000.00.000").value_deg == 0.0);
  CHECK(parse_ddm("S019.08.140").value_deg ==
        -parse_ddm("N019.08.140").value_deg);
  CHECK(parse_ddm("W072.54.829").value_deg ==
        -parse_ddm("E072.54.829").value_deg);
}

TEST_CASE("parse_ddm rejects malformed coordinates") {
  CHECK_THROWS_AS(parse_ddm("X019.08.140"), CoordinateError);
  CHECK_THROWS_AS(parse_ddm("N19.08.140"), CoordinateError);
  CHECK_THROWS_AS(parse_ddm("N019.60.000"), CoordinateError);  // minutes >= 60
  CHECK_THROWS_AS(parse_ddm("N091.00.000"), CoordinateError);
  CHECK_THROWS_AS(parse_ddm("N090.00.001"), CoordinateError);
  CHECK_THROWS_AS(parse_ddm("W181.00.000"), CoordinateError);
  CHECK_THROWS_AS(parse_ddm("N019-08-140"), CoordinateError);
  CHECK_THROWS_AS(parse_ddm(""), CoordinateError);
  CHECK_THROWS_AS(parse_ddm("N019.0a.140"), CoordinateError);
  // boundary values that are fine
  CHECK(parse_ddm("N090.00.000").value_deg == 90.0);
  CHECK(parse_ddm("W180.00.000").value_deg == -180.0);
}

TEST_CASE("format_ddm is the inverse of parse_ddm on canonical strings") {
  for (const char* text : {"N019.08.140", "E072.53.740", "N019.07.176",
                           "E072.54.829", "S000.30.500", "W180.00.000",
                           "N000.00.000", "N090.00.000", "E000.00.001"}) {
    const DdmValue v = parse_ddm(text);
    CHECK(format_ddm(v.value_deg, v.axis) == text);
  }
  // rounding carry at the degree boundary
  CHECK(format_ddm(19.9999999, Axis::latitude) == "N020.00.000");
}

TEST_CASE("parse_coordinate accepts decimal degrees without a hemisphere") {
  const DdmValue v = parse_coordinate("19.135667", Axis::latitude);
  CHECK_THAT(v.value_deg, Catch::Matchers::WithinAbs(19.135667, 1e-12));
  CHECK(parse_coordinate("-72.5", Axis::longitude).value_deg == -72.5);
  CHECK_THROWS_AS(parse_coordinate("91.0", Axis::latitude), CoordinateError);
  CHECK_THROWS_AS(parse_coordinate("12.3abc", Axis::latitude), CoordinateError);
}

TEST_CASE("parse_latlon pairs components by hemisphere letter") {
  const LatLon p = parse_latlon("N019.08.140, E072.53.740");
  CHECK_THAT(p.lat_deg, Catch::Matchers::WithinAbs(19.135667, 5e-7));
  CHECK_THAT(p.lon_deg, Catch::Matchers::WithinAbs(72.895667, 5e-7));

  // swapped order still lands on the right axes
  const LatLon q = parse_latlon("E072.53.740 N019.08.140");
  CHECK(q.lat_deg == p.lat_deg);
  CHECK(q.lon_deg == p.lon_deg);

  const LatLon d = parse_latlon("19.5, 72.25");
  CHECK(d.lat_deg == 19.5);
  CHECK(d.lon_deg == 72.25);

  CHECK_THROWS_AS(parse_latlon("N019.08.140, N019.08.140"), CoordinateError);
  CHECK_THROWS_AS(parse_latlon("19.5"), CoordinateError);
}

TEST_CASE("to_local matches the hand-computed Powai east offset") {
  const LocalFrame f = LocalFrame::at({19.135667, 72.895667});
  CHECK(f.meters_per_deg_lat == 111320.0);
  CHECK_THAT(f.meters_per_deg_lon,
             Catch::Matchers::WithinRel(
                 111320.0 * std::cos(deg_to_rad(19.135667)), 1e-15));

  // origin maps to (0, 0)
  const PlanarPoint o = to_local(f.origin, f);
  CHECK(o.x_m == 0.0);
  CHECK(o.y_m == 0.0);

  // same latitude, 0.018150 deg east: x = dlon * 111320 * cos(lat), y = 0
  const PlanarPoint p = to_local({19.135667, 72.913817}, f);
  const double expect_x =
      (72.913817 - 72.895667) * 111320.0 * std::cos(deg_to_rad(19.135667));
  CHECK_THAT(p.x_m, Catch::Matchers::WithinAbs(expect_x, 1e-6));
  CHECK_THAT(p.x_m, Catch::Matchers::WithinAbs(1908.8, 0.5));
  CHECK(p.y_m == 0.0);
}

TEST_CASE("Powai corner coordinates span a couple of kilometres") {
  // NW and SE corners of the study area
  const LatLon nw = parse_latlon("N019.08.140, E072.53.740");
  const LatLon se = parse_latlon("N019.07.176, E072.54.829");
  const LocalFrame f = LocalFrame::at(nw);
  const PlanarPoint p = to_local(se, f);
  const double diagonal = std::hypot(p.x_m, p.y_m);
  // hand check: dlat 0.0160667 deg -> 1788.6 m south, dlon 0.0181500 deg
  // -> 1908.8 m east, diagonal 2615.9 m
  CHECK_THAT(p.y_m, Catch::Matchers::WithinAbs(-1788.6, 0.5));
  CHECK_THAT(p.x_m, Catch::Matchers::WithinAbs(1908.8, 0.5));
  CHECK_THAT(diagonal, Catch::Matchers::WithinAbs(2615.9, 1.0));
  // consistent with a lake of around 2 square kilometres
  CHECK(diagonal > 2000.0);
  CHECK(diagonal < 3000.0);
}

TEST_CASE("from_local inverts to_local within 1e-9 degrees") {
  const LocalFrame f = LocalFrame::at({19.135667, 72.895667});
  std::mt19937_64 rng(20240309);
  std::uniform_real_distribution<double> d(-0.9, 0.9);
  for (int i = 0; i < 200; ++i) {
    const LatLon p{19.135667 + d(rng) / 10.0, 72.895667 + d(rng) / 10.0};
    const LatLon back = from_local(to_local(p, f), f);
    CHECK_THAT(back.lat_deg, Catch::Matchers::WithinAbs(p.lat_deg, 1e-9));
    CHECK_THAT(back.lon_deg, Catch::Matchers::WithinAbs(p.lon_deg, 1e-9));
  }
  CHECK(from_local({0.0, 0.0}, f).lat_deg == f.origin.lat_deg);
  CHECK(from_local({0.0, 0.0}, f).lon_deg == f.origin.lon_deg);
}

TEST_CASE("to_local is affine: midpoints map to midpoints") {
  // An equator frame makes meters_per_deg_lon exactly 111320, so dyadic
  // coordinate steps stay exact and the identity holds bitwise.
  const LocalFrame f = LocalFrame::at({0.0, 0.0});
  REQUIRE(f.meters_per_deg_lon == 111320.0);
  for (int i = -8; i <= 8; ++i) {
    for (int j = -8; j <= 8; ++j) {
      const LatLon a{i / 1024.0, j / 1024.0};
      const LatLon b{j / 2048.0, i / 512.0};
      const LatLon mid{(a.lat_deg + b.lat_deg) / 2.0,
                       (a.lon_deg + b.lon_deg) / 2.0};
      const PlanarPoint pa = to_local(a, f);
      const PlanarPoint pb = to_local(b, f);
      const PlanarPoint pm = to_local(mid, f);
      CHECK(pm.x_m == (pa.x_m + pb.x_m) / 2.0);
      CHECK(pm.y_m == (pa.y_m + pb.y_m) / 2.0);
    }
  }
  // general frame: affine within floating-point tolerance
  const LocalFrame g = LocalFrame::at({19.135667, 72.895667});
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> d(-0.5, 0.5);
  for (int k = 0; k < 100; ++k) {
    const LatLon a{19.135667 + d(rng), 72.895667 + d(rng)};
    const LatLon b{19.135667 + d(rng), 72.895667 + d(rng)};
    const LatLon mid{(a.lat_deg + b.lat_deg) / 2.0,
                     (a.lon_deg + b.lon_deg) / 2.0};
    const PlanarPoint pa = to_local(a, g);
    const PlanarPoint pb = to_local(b, g);
    const PlanarPoint pm = to_local(mid, g);
    CHECK_THAT(pm.x_m, Catch::Matchers::WithinAbs((pa.x_m + pb.x_m) / 2.0, 1e-7));
    CHECK_THAT(pm.y_m, Catch::Matchers::WithinAbs((pa.y_m + pb.y_m) / 2.0, 1e-7));
  }
}

TEST_CASE("to_local enforces the small-area bound") {
  const LocalFrame f = LocalFrame::at({19.0, 72.0});
  CHECK_THROWS_AS(to_local({20.5, 72.0}, f), FrameBoundsError);
  CHECK_THROWS_AS(to_local({19.0, 70.5}, f), FrameBoundsError);
}
