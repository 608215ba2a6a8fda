#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <utility>
#include <vector>

#include "bathykit/calibrate.hpp"
#include "support/test_helpers.hpp"

using namespace bathykit;
using namespace bathykit::calibrate;

namespace {

std::vector<std::pair<double, double>> pairs(
    std::initializer_list<std::pair<double, double>> p) {
  return p;
}

}  // namespace

TEST_CASE("compute_offset applies error = sonar - known") {
  CHECK(compute_offset(pairs({{2.5, 2.3}})).error_m == Catch::Approx(0.2));
  CHECK(compute_offset(pairs({{2.0, 2.0}, {3.0, 3.0}})).error_m == 0.0);
  // mean of +0.1 and -0.1
  const DepthOffset off = compute_offset(pairs({{2.4, 2.3}, {2.2, 2.3}}));
  CHECK_THAT(off.error_m, Catch::Matchers::WithinAbs(0.0, 1e-15));
  CHECK(off.n_samples == 2);
}

TEST_CASE("compute_offset rejects bad input") {
  CHECK_THROWS_AS(compute_offset({}), CalibrationError);
  CHECK_THROWS_AS(compute_offset(pairs({{-1.0, 2.0}})), CalibrationError);
  CHECK_THROWS_AS(compute_offset(pairs({{2.0, -1.0}})), CalibrationError);
  // implausible offset (pool calibrations are decimetre-scale)
  CHECK_THROWS_AS(compute_offset(pairs({{9.0, 2.0}})), CalibrationError);
}

TEST_CASE("apply_calibration subtracts the offset and clamps at zero") {
  CHECK(apply_calibration(2.5, {0.2, 1}).depth_m == Catch::Approx(2.3));
  CHECK_FALSE(apply_calibration(2.5, {0.2, 1}).clamped);

  const CalibratedDepth clamped = apply_calibration(0.1, {0.3, 1});
  CHECK(clamped.depth_m == 0.0);
  CHECK(clamped.clamped);

  CHECK_THROWS_AS(apply_calibration(-0.1, {0.0, 1}), CalibrationError);
}

TEST_CASE("offset computed from a pair set zeroes that set's residual mean") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> depth(1.0, 10.0);
  std::uniform_real_distribution<double> bias(-2.0, 2.0);
  std::uniform_real_distribution<double> jitter(-0.2, 0.2);
  for (int iter = 0; iter < 100; ++iter) {
    const double b = bias(rng);
    std::vector<std::pair<double, double>> set;
    for (int i = 0; i < 20; ++i) {
      const double known = depth(rng);
      set.emplace_back(known + b + jitter(rng), known);
    }
    const DepthOffset off = compute_offset(set);
    double residual = 0.0;
    for (const auto& [sonar, known] : set)
      residual += apply_calibration(sonar, off).depth_m - known;
    CHECK_THAT(residual / static_cast<double>(set.size()),
               Catch::Matchers::WithinAbs(0.0, 1e-12));
  }
}

TEST_CASE("compute_offset is translation-equivariant") {
  // dyadic inputs and power-of-two set sizes keep each side's arithmetic
  // exact, so the identity holds bitwise
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> q(0, 4096);
  for (int iter = 0; iter < 100; ++iter) {
    const std::size_t n = std::size_t{1} << (iter % 5);
    std::vector<std::pair<double, double>> set(n), shifted(n);
    const double c = q(rng) / 1024.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double sonar = q(rng) / 1024.0;
      const double known = q(rng) / 1024.0;
      set[i] = {sonar, known};
      shifted[i] = {sonar + c, known};
    }
    const double base = compute_offset(set).error_m;
    if (std::fabs(base + c) >= 5.0) continue;  // would trip the sanity bound
    CHECK(compute_offset(shifted).error_m == base + c);
  }
}

TEST_CASE("extract_soundings keeps only down-beam pings") {
  const LocalFrame frame = LocalFrame::at({19.135667, 72.895667});
  sonarlog::PingRecord down;
  down.time_offset_ms = 100;
  down.lat_e7 = 191356670;
  down.lon_e7 = 728956670;
  down.depth_cm = 230;
  down.beam_id = 0;
  down.freq_khz = 200;

  SECTION("single down ping with 0.2 m offset gives one 2.1 m point") {
    const ExtractResult r =
        extract_soundings(std::vector{down}, {0.2, 1}, frame);
    REQUIRE(r.points.size() == 1);
    CHECK_THAT(r.points[0].depth_m, Catch::Matchers::WithinAbs(2.1, 1e-12));
    CHECK(r.points[0].t_ms == 100);
  }

  SECTION("side-beam-only input yields nothing") {
    auto side = down;
    side.beam_id = 3;
    side.freq_khz = 455;
    auto side2 = side;
    side2.beam_id = 4;
    const ExtractResult r =
        extract_soundings(std::vector{side, side2}, {0.0, 1}, frame);
    CHECK(r.points.empty());
    CHECK(r.dropped_beam == 2);
  }

  SECTION("83 kHz down beam also counts as a sounding") {
    auto wide = down;
    wide.beam_id = 1;
    wide.freq_khz = 83;
    const ExtractResult r =
        extract_soundings(std::vector{wide}, {0.0, 1}, frame);
    CHECK(r.points.size() == 1);
  }

  SECTION("pings without a fix are dropped") {
    auto nofix = down;
    nofix.lat_e7 = 0;
    nofix.lon_e7 = 0;
    const ExtractResult r =
        extract_soundings(std::vector{nofix}, {0.0, 1}, frame);
    CHECK(r.points.empty());
    CHECK(r.dropped_position == 1);
  }

  SECTION("depth filter and dedup radius drop out-of-band and resting pings") {
    auto a = down;                 // kept
    auto b = down;                 // same spot: dedup
    b.time_offset_ms = 200;
    auto c = down;                 // moved 1 m east: kept
    c.time_offset_ms = 300;
    c.lon_e7 += static_cast<std::int32_t>(1e7 / 111320.0 / 0.944747 + 1);
    auto d = down;                 // too shallow after filter
    d.time_offset_ms = 400;
    d.depth_cm = 20;
    d.lon_e7 += 300;
    QualityFilter f;
    f.min_depth_m = 0.5;
    f.dedup_radius_m = 0.5;
    const ExtractResult r =
        extract_soundings(std::vector{a, b, c, d}, {0.0, 1}, frame, f);
    CHECK(r.points.size() == 2);
    CHECK(r.dropped_duplicate == 1);
    CHECK(r.dropped_depth == 1);
  }
}

TEST_CASE("extract_soundings output satisfies the survey point invariants") {
  std::mt19937_64 rng(11);
  auto pings = testsupport::random_pings(rng, 500);
  // constrain fixes near the frame origin so projection stays in bounds
  const LocalFrame frame = LocalFrame::at({19.0, 72.0});
  std::uniform_int_distribution<std::int32_t> wiggle(-400000, 400000);
  for (auto& p : pings) {
    p.lat_e7 = 190000000 + wiggle(rng);
    p.lon_e7 = 720000000 + wiggle(rng);
  }
  const ExtractResult r = extract_soundings(pings, {0.1, 4}, frame);
  CHECK(r.points.size() <= pings.size());
  CHECK(r.points.size() + r.dropped_beam + r.dropped_position +
            r.dropped_depth + r.dropped_duplicate ==
        pings.size());
  for (const auto& pt : r.points) {
    CHECK(pt.depth_m >= 0.0);
    CHECK(pt.depth_m <= sonarlog::SonarSpec::max_depth_m);
  }
}
