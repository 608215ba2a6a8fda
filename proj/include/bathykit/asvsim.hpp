// Deterministic closed-loop simulator of the survey vehicle's flight stack:
// estimator -> navigator -> PID position controller -> mixer, driving a
// twin-thruster catamaran plant over an analytic true bathymetry and logging
// sonar pings in the survey file format.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bathykit/detail/kv.hpp"
#include "bathykit/geodesy.hpp"
#include "bathykit/mission.hpp"
#include "bathykit/sonarlog.hpp"

namespace bathykit::sim {

class SimError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double wrap360(double deg) {
  double d = std::fmod(deg, 360.0);
  if (d < 0.0) d += 360.0;
  return d;
}

/// Wraps to (-180, 180]; heading errors go through this so control output
/// never jumps at the 0/360 seam.
inline double wrap180(double deg) {
  double d = std::fmod(deg, 360.0);
  if (d > 180.0) d -= 360.0;
  if (d <= -180.0) d += 360.0;
  return d;
}

/// Compass bearing from `a` to `b`, degrees clockwise from north.
inline double bearing_deg(PlanarPoint a, PlanarPoint b) {
  return wrap360(rad_to_deg(std::atan2(b.x_m - a.x_m, b.y_m - a.y_m)));
}

// ---------------------------------------------------------------------------
// Tunables

struct ControllerGains {
  double heading_p = 0.02;   ///< steer per degree of heading error
  double heading_i = 0.002;
  double heading_d = 0.010;
  double speed_p = 0.8;      ///< throttle per m/s of speed error
  double speed_i = 0.4;
  double max_throttle = 1.0;
  double cruise_speed_mps = 1.5;
  double turn_radius_m = 5.0;
  double max_accel_mps2 = 1.0;
};

struct PlantConfig {
  double tau_v_s = 1.5;   ///< surge first-order lag
  double k_v_mps = 2.0;   ///< straight-line speed at full twin throttle
  double tau_w_s = 0.8;   ///< yaw-rate lag
  double k_w_dps = 60.0;  ///< yaw rate per unit differential thrust
};

struct NoiseConfig {
  double gnss_sigma_m = 2.0;
  double compass_sigma_deg = 1.0;
  double sonar_sigma_m = 0.02;
};

// ---------------------------------------------------------------------------
// State types

struct VehicleState {
  PlanarPoint position;
  double heading_deg = 0.0;  ///< compass, [0, 360)
  double surge_mps = 0.0;
  double yaw_rate_dps = 0.0;
  std::uint64_t t_ms = 0;
};

struct SensorReading {
  PlanarPoint gnss_pos;
  double compass_heading_deg = 0.0;
  std::uint64_t t_ms = 0;
};

struct StateEstimate {
  PlanarPoint position;
  double heading_deg = 0.0;
  double speed_mps = 0.0;
  std::uint64_t t_ms = 0;
};

struct Setpoint {
  double heading_deg = 0.0;
  double speed_mps = 0.0;
  bool done = false;
  std::size_t target_index = 0;
};

struct Command {
  double throttle = 0.0;  ///< [0, 1]
  double steer = 0.0;     ///< [-1, 1], positive turns to starboard
};

struct Thrusts {
  double left = 0.0;
  double right = 0.0;
};

// ---------------------------------------------------------------------------
// Seeded noise. Box-Muller over an explicit 53-bit uniform so the stream
// depends only on the seed, not on library internals.

class GaussianNoise {
 public:
  explicit GaussianNoise(std::uint64_t seed) : rng_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  double next(double sigma) { return sigma == 0.0 ? 0.0 : sigma * next(); }

 private:
  double uniform01() {
    return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  }
  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// ---------------------------------------------------------------------------
// Flight stack

/// Exponential smoothing of GNSS fixes and (circularly) of compass headings;
/// speed over ground from smoothed positions over a short window.
class Estimator {
 public:
  explicit Estimator(double alpha, double speed_window_s = 2.0)
      : alpha_(alpha), speed_window_s_(speed_window_s) {
    if (alpha <= 0.0 || alpha > 1.0)
      throw SimError("estimator smoothing factor must be in (0, 1]");
  }

  StateEstimate update(const SensorReading& r, double dt_s) {
    if (!init_) {
      est_.position = r.gnss_pos;
      est_.heading_deg = wrap360(r.compass_heading_deg);
      est_.speed_mps = 0.0;
      init_ = true;
    } else {
      est_.position.x_m += alpha_ * (r.gnss_pos.x_m - est_.position.x_m);
      est_.position.y_m += alpha_ * (r.gnss_pos.y_m - est_.position.y_m);
      est_.heading_deg = wrap360(
          est_.heading_deg +
          alpha_ * wrap180(r.compass_heading_deg - est_.heading_deg));
    }
    est_.t_ms = r.t_ms;

    history_.push_back(est_.position);
    const auto window = static_cast<std::size_t>(
        std::max(1.0, std::round(speed_window_s_ / dt_s)));
    while (history_.size() > window + 1) history_.pop_front();
    if (history_.size() >= 2) {
      const auto& a = history_.front();
      const auto& b = history_.back();
      const double span_s = static_cast<double>(history_.size() - 1) * dt_s;
      const double v = std::hypot(b.x_m - a.x_m, b.y_m - a.y_m) / span_s;
      est_.speed_mps += (alpha_ / 2.0) * (v - est_.speed_mps);
    }
    return est_;
  }

 private:
  double alpha_;
  double speed_window_s_;
  StateEstimate est_;
  std::deque<PlanarPoint> history_;
  bool init_ = false;
};

/// Serves position setpoints from the mission plan: heads for the first
/// unvisited waypoint, marks it visited inside its acceptance radius.
class Navigator {
 public:
  explicit Navigator(const mission::MissionPlan& plan) : plan_(plan) {
    if (plan_.waypoints.size() < 2)
      throw SimError("mission needs at least 2 waypoints");
  }

  Setpoint update(const StateEstimate& est) {
    while (next_ < plan_.waypoints.size()) {
      const auto& wp = plan_.waypoints[next_];
      const double d = std::hypot(wp.x_m - est.position.x_m,
                                  wp.y_m - est.position.y_m);
      if (d > plan_.acceptance_radius_m) break;
      ++next_;
    }
    Setpoint sp;
    if (next_ >= plan_.waypoints.size()) {
      sp.done = true;
      sp.heading_deg = est.heading_deg;
      sp.speed_mps = 0.0;
      sp.target_index = plan_.waypoints.size();
      return sp;
    }
    sp.heading_deg = bearing_deg(est.position, plan_.waypoints[next_]);
    sp.speed_mps = plan_.cruise_speed_mps;
    sp.target_index = next_;
    return sp;
  }

  bool done() const { return next_ >= plan_.waypoints.size(); }
  std::size_t target_index() const { return next_; }

 private:
  mission::MissionPlan plan_;
  std::size_t next_ = 0;
};

/// Heading PID plus speed PI. Integrals freeze while the corresponding
/// output is saturated and are hard-clamped to one full unit of authority.
class PidController {
 public:
  explicit PidController(const ControllerGains& g) : g_(g) {}

  Command update(const StateEstimate& est, const Setpoint& sp, double dt_s) {
    if (dt_s <= 0.0) throw SimError("controller needs dt > 0");
    Command cmd;

    const double he = wrap180(sp.heading_deg - est.heading_deg);
    const double hde = first_ ? 0.0 : (he - prev_heading_error_) / dt_s;
    prev_heading_error_ = he;
    const double hu = g_.heading_p * he + g_.heading_i * heading_int_ +
                      g_.heading_d * hde;
    cmd.steer = std::clamp(hu, -1.0, 1.0);
    if (hu == cmd.steer && g_.heading_i > 0.0) {
      heading_int_ += he * dt_s;
      const double lim = 1.0 / g_.heading_i;
      heading_int_ = std::clamp(heading_int_, -lim, lim);
    }

    const double se = sp.speed_mps - est.speed_mps;
    const double su = g_.speed_p * se + g_.speed_i * speed_int_;
    cmd.throttle = std::clamp(su, 0.0, g_.max_throttle);
    if (su == cmd.throttle && g_.speed_i > 0.0) {
      speed_int_ += se * dt_s;
      const double lim = g_.max_throttle / g_.speed_i;
      speed_int_ = std::clamp(speed_int_, -lim, lim);
    }

    first_ = false;
    return cmd;
  }

  double heading_integral() const { return heading_int_; }
  double speed_integral() const { return speed_int_; }

 private:
  ControllerGains g_;
  double heading_int_ = 0.0;
  double speed_int_ = 0.0;
  double prev_heading_error_ = 0.0;
  bool first_ = true;
};

/// Differential-thrust mixer. steer > 0 slows the starboard motor.
inline Thrusts mix(double throttle, double steer) {
  throttle = std::clamp(throttle, 0.0, 1.0);
  steer = std::clamp(steer, -1.0, 1.0);
  return {std::clamp(throttle + steer / 2.0, 0.0, 1.0),
          std::clamp(throttle - steer / 2.0, 0.0, 1.0)};
}

inline Thrusts mix(const Command& c) { return mix(c.throttle, c.steer); }

/// Plant coefficients resolved against the tuned vehicle limits.
struct PlantModel {
  PlantConfig cfg;
  double max_accel_mps2 = 1.0;
  double yaw_cap_dps = 17.0;

  static PlantModel from(const PlantConfig& p, const ControllerGains& g) {
    PlantModel m;
    m.cfg = p;
    m.max_accel_mps2 = g.max_accel_mps2;
    // turning circle at cruise speed respects the tuned turn radius
    m.yaw_cap_dps = rad_to_deg(g.cruise_speed_mps / g.turn_radius_m);
    return m;
  }
};

/// 3-DOF planar first-order-lag plant, explicit Euler.
inline VehicleState step_dynamics(const VehicleState& s, Thrusts th,
                                  PlanarPoint current_mps,
                                  const PlantModel& plant, double dt_s) {
  if (!(dt_s > 0.0 && dt_s <= 1.0)) throw SimError("dt must be in (0, 1]");
  VehicleState n = s;

  const double surge_cmd = plant.cfg.k_v_mps * (th.left + th.right) / 2.0;
  double acc = (surge_cmd - s.surge_mps) / plant.cfg.tau_v_s;
  acc = std::clamp(acc, -plant.max_accel_mps2, plant.max_accel_mps2);
  n.surge_mps = s.surge_mps + acc * dt_s;

  double yaw_cmd = plant.cfg.k_w_dps * (th.left - th.right);
  yaw_cmd = std::clamp(yaw_cmd, -plant.yaw_cap_dps, plant.yaw_cap_dps);
  n.yaw_rate_dps =
      s.yaw_rate_dps + (yaw_cmd - s.yaw_rate_dps) * dt_s / plant.cfg.tau_w_s;
  n.yaw_rate_dps =
      std::clamp(n.yaw_rate_dps, -plant.yaw_cap_dps, plant.yaw_cap_dps);

  n.heading_deg = wrap360(s.heading_deg + n.yaw_rate_dps * dt_s);
  const double h = deg_to_rad(s.heading_deg);
  n.position.x_m =
      s.position.x_m + (s.surge_mps * std::sin(h) + current_mps.x_m) * dt_s;
  n.position.y_m =
      s.position.y_m + (s.surge_mps * std::cos(h) + current_mps.y_m) * dt_s;
  n.t_ms = s.t_ms + static_cast<std::uint64_t>(std::llround(dt_s * 1000.0));
  return n;
}

// ---------------------------------------------------------------------------
// True bathymetry

struct TruthField {
  enum class Kind { flat, plane, paraboloid, gaussian_hole };
  Kind kind = Kind::flat;
  double p0 = 2.0, p1 = 0.0, p2 = 0.0, p3 = 0.0;

  double depth(PlanarPoint q) const {
    switch (kind) {
      case Kind::flat:
        return std::max(0.0, p0);
      case Kind::plane:  // p0 + p1*x + p2*y
        return std::max(0.0, p0 + p1 * q.x_m + p2 * q.y_m);
      case Kind::paraboloid: {  // centre (p0,p1), radius p2, max depth p3
        const double r2 = (q.x_m - p0) * (q.x_m - p0) +
                          (q.y_m - p1) * (q.y_m - p1);
        return std::max(0.0, p3 * (1.0 - r2 / (p2 * p2)));
      }
      case Kind::gaussian_hole: {  // centre (p0,p1), sigma p2, max depth p3
        const double r2 = (q.x_m - p0) * (q.x_m - p0) +
                          (q.y_m - p1) * (q.y_m - p1);
        return p3 * std::exp(-r2 / (2.0 * p2 * p2));
      }
    }
    return 0.0;
  }

  /// Descriptor text, e.g. "flat 2.0", "plane 1 0.01 0",
  /// "paraboloid 200 130 130 5", "gaussian 100 100 40 5".
  static TruthField parse(std::string_view descr) {
    std::istringstream in{std::string(descr)};
    std::string kind;
    in >> kind;
    TruthField t;
    const auto need = [&](int n) {
      double* slots[4] = {&t.p0, &t.p1, &t.p2, &t.p3};
      for (int i = 0; i < n; ++i)
        if (!(in >> *slots[i]))
          throw SimError("truth field needs " + std::to_string(n) +
                         " parameters: " + std::string(descr));
    };
    if (kind == "flat") {
      t.kind = Kind::flat;
      need(1);
    } else if (kind == "plane") {
      t.kind = Kind::plane;
      need(3);
    } else if (kind == "paraboloid") {
      t.kind = Kind::paraboloid;
      need(4);
      if (t.p2 <= 0.0) throw SimError("paraboloid radius must be positive");
    } else if (kind == "gaussian") {
      t.kind = Kind::gaussian_hole;
      need(4);
      if (t.p2 <= 0.0) throw SimError("gaussian sigma must be positive");
    } else {
      throw SimError("unknown truth field kind: " + kind);
    }
    return t;
  }
};

// ---------------------------------------------------------------------------
// Sonar sampling

struct SonarSample {
  sonarlog::PingRecord ping;
  bool depth_clamped = false;
};

/// One down-beam ping at the vehicle's position: true depth plus gaussian
/// noise, quantized to cm and clamped to the unit's 457 m ceiling. Echo
/// sample content is cosmetic (decay plus a bottom-return bump).
inline SonarSample sample_sonar(const TruthField& truth,
                                const VehicleState& state,
                                const LocalFrame& frame, double sigma_m,
                                int sample_count, GaussianNoise& rng) {
  SonarSample out;
  const double true_depth = truth.depth(state.position);
  double meas = true_depth + rng.next(sigma_m);
  if (meas < 0.0) meas = 0.0;
  long long cm = std::llround(meas * 100.0);
  if (cm > static_cast<long long>(sonarlog::kMaxDepthCm)) {
    cm = sonarlog::kMaxDepthCm;
    out.depth_clamped = true;
  }

  sonarlog::PingRecord& p = out.ping;
  p.time_offset_ms = static_cast<std::uint32_t>(state.t_ms);
  const LatLon ll = from_local(state.position, frame);
  p.lat_e7 = static_cast<std::int32_t>(std::llround(ll.lat_deg * 1e7));
  p.lon_e7 = static_cast<std::int32_t>(std::llround(ll.lon_deg * 1e7));
  p.heading_cdeg = static_cast<std::uint16_t>(
      std::llround(wrap360(state.heading_deg) * 100.0) % 36000);
  p.speed_cmps = static_cast<std::uint16_t>(
      std::min<long long>(0xFFFF, std::llround(std::fabs(state.surge_mps) * 100.0)));
  p.depth_cm = static_cast<std::uint32_t>(cm);
  p.beam_id = 0;
  p.freq_khz = 200;
  p.samples.resize(static_cast<std::size_t>(std::max(0, sample_count)));
  const double n = static_cast<double>(p.samples.size());
  const std::size_t bottom =
      n > 0 ? static_cast<std::size_t>(
                  std::min(n - 1.0, n * meas / sonarlog::SonarSpec::max_depth_m *
                                        50.0))
            : 0;
  for (std::size_t i = 0; i < p.samples.size(); ++i) {
    double v = 40.0 * std::exp(-3.0 * static_cast<double>(i) / std::max(1.0, n));
    if (i == bottom || i + 1 == bottom) v += 180.0;
    p.samples[i] = static_cast<std::uint8_t>(std::min(255.0, v));
  }
  return out;
}

/// Synthetic side-imaging ping (port or starboard); imagery only.
inline sonarlog::PingRecord make_side_ping(const sonarlog::PingRecord& down,
                                           bool starboard) {
  sonarlog::PingRecord p = down;
  p.beam_id = starboard ? 4 : 3;
  p.freq_khz = 455;
  for (std::size_t i = 0; i < p.samples.size(); ++i)
    p.samples[i] = static_cast<std::uint8_t>(
        200.0 * std::exp(-2.0 * static_cast<double>(i) /
                         std::max<std::size_t>(1, p.samples.size())));
  return p;
}

// ---------------------------------------------------------------------------
// Simulation configuration

struct SimConfig {
  ControllerGains gains;
  PlantConfig plant;
  NoiseConfig noise;
  double dt_s = 0.1;
  double ping_hz = 5.0;
  double est_alpha = 0.35;
  double speed_window_s = 2.0;
  double timeout_s = 7200.0;
  std::uint64_t seed = 1;
  std::uint64_t epoch_start_ms = 1710000000000;  // fixed, for reproducibility
  std::string device_name = "BATHYKIT-SIM";
  double sound_speed_mps = 1482.0;
  int sample_count = 64;
  bool side_channels = false;
  PlanarPoint current_mps{0.0, 0.0};
  TruthField truth{};
  std::optional<PlanarPoint> start_position;

  void validate() const {
    if (!(dt_s > 0.0 && dt_s <= 1.0)) throw SimError("dt_s must be in (0, 1]");
    if (dt_s > plant.tau_v_s / 5.0)
      throw SimError("dt_s must be <= tau_v_s / 5 for a stable explicit step");
    if (ping_hz <= 0.0) throw SimError("ping_hz must be positive");
    if (timeout_s <= 0.0) throw SimError("timeout_s must be positive");
    if (sample_count < 0 || sample_count > 0xFFFF)
      throw SimError("sample_count out of range");
  }

  static SimConfig parse(std::istream& in) {
    SimConfig c;
    const auto kv = bathykit::detail::parse_kv(in);
    for (const auto& [key, value] : kv) {
      const auto num = [&]() {
        try {
          return std::stod(value);
        } catch (const std::exception&) {
          throw SimError("config value for " + key + " is not numeric: " + value);
        }
      };
      if (key == "seed") c.seed = static_cast<std::uint64_t>(std::stoull(value));
      else if (key == "dt_s") c.dt_s = num();
      else if (key == "ping_hz") c.ping_hz = num();
      else if (key == "est_alpha") c.est_alpha = num();
      else if (key == "speed_window_s") c.speed_window_s = num();
      else if (key == "timeout_s") c.timeout_s = num();
      else if (key == "epoch_start_ms")
        c.epoch_start_ms = static_cast<std::uint64_t>(std::stoull(value));
      else if (key == "device_name") c.device_name = value;
      else if (key == "sound_speed_mps") c.sound_speed_mps = num();
      else if (key == "sample_count") c.sample_count = static_cast<int>(num());
      else if (key == "side_channels") c.side_channels = num() != 0.0;
      else if (key == "current_x_mps") c.current_mps.x_m = num();
      else if (key == "current_y_mps") c.current_mps.y_m = num();
      else if (key == "truth") c.truth = TruthField::parse(value);
      else if (key == "gnss_sigma_m") c.noise.gnss_sigma_m = num();
      else if (key == "compass_sigma_deg") c.noise.compass_sigma_deg = num();
      else if (key == "sonar_sigma_m") c.noise.sonar_sigma_m = num();
      else if (key == "heading_p") c.gains.heading_p = num();
      else if (key == "heading_i") c.gains.heading_i = num();
      else if (key == "heading_d") c.gains.heading_d = num();
      else if (key == "speed_p") c.gains.speed_p = num();
      else if (key == "speed_i") c.gains.speed_i = num();
      else if (key == "max_throttle") c.gains.max_throttle = num();
      else if (key == "cruise_speed_mps") c.gains.cruise_speed_mps = num();
      else if (key == "turn_radius_m") c.gains.turn_radius_m = num();
      else if (key == "max_accel_mps2") c.gains.max_accel_mps2 = num();
      else if (key == "tau_v_s") c.plant.tau_v_s = num();
      else if (key == "k_v_mps") c.plant.k_v_mps = num();
      else if (key == "tau_w_s") c.plant.tau_w_s = num();
      else if (key == "k_w_dps") c.plant.k_w_dps = num();
      else if (key == "start_x_m") {
        if (!c.start_position) c.start_position = PlanarPoint{};
        c.start_position->x_m = num();
      } else if (key == "start_y_m") {
        if (!c.start_position) c.start_position = PlanarPoint{};
        c.start_position->y_m = num();
      } else {
        throw SimError("unknown config key: " + key);
      }
    }
    c.validate();
    return c;
  }
};

// ---------------------------------------------------------------------------
// Closed-loop survey run

struct RunReport {
  bool completed = false;
  double sim_time_s = 0.0;
  std::size_t waypoints_reached = 0;
  std::size_t ping_count = 0;
  std::size_t depth_clamps = 0;
};

inline constexpr const char* kTrackHeader =
    "t_ms,x,y,heading,surge,left,right,target_index";

/// Steps the full loop at dt, pings at ping_hz, and writes the survey file
/// set plus a CSV track log into `out_dir`. Identical config and seed give
/// byte-identical outputs.
inline RunReport run_survey(const mission::MissionPlan& plan,
                            const LocalFrame& frame, const SimConfig& cfg,
                            const std::filesystem::path& out_dir) {
  cfg.validate();
  GaussianNoise rng(cfg.seed);
  Estimator estimator(cfg.est_alpha, cfg.speed_window_s);
  Navigator navigator(plan);
  PidController controller(cfg.gains);
  const PlantModel plant = PlantModel::from(cfg.plant, cfg.gains);

  VehicleState state;
  state.position = cfg.start_position.value_or(plan.waypoints.front());
  state.heading_deg = plan.waypoints.size() >= 2
                          ? bearing_deg(plan.waypoints[0], plan.waypoints[1])
                          : 0.0;

  const auto ping_every = static_cast<std::size_t>(
      std::max(1.0, std::round(1.0 / (cfg.ping_hz * cfg.dt_s))));
  const auto max_steps =
      static_cast<std::size_t>(std::ceil(cfg.timeout_s / cfg.dt_s));

  std::vector<std::vector<sonarlog::PingRecord>> channels(
      cfg.side_channels ? 3 : 1);
  std::ostringstream track;
  track << kTrackHeader << "\n";

  RunReport report;
  Setpoint sp;
  for (std::size_t step = 0; step < max_steps; ++step) {
    SensorReading reading;
    reading.gnss_pos = {
        state.position.x_m + rng.next(cfg.noise.gnss_sigma_m),
        state.position.y_m + rng.next(cfg.noise.gnss_sigma_m)};
    reading.compass_heading_deg =
        wrap360(state.heading_deg + rng.next(cfg.noise.compass_sigma_deg));
    reading.t_ms = state.t_ms;

    const StateEstimate est = estimator.update(reading, cfg.dt_s);
    sp = navigator.update(est);
    if (sp.done) break;
    const Command cmd = controller.update(est, sp, cfg.dt_s);
    const Thrusts th = mix(cmd);

    if (step % ping_every == 0) {
      SonarSample s = sample_sonar(cfg.truth, state, frame,
                                   cfg.noise.sonar_sigma_m, cfg.sample_count,
                                   rng);
      if (s.depth_clamped) ++report.depth_clamps;
      channels[0].push_back(s.ping);
      if (cfg.side_channels) {
        channels[1].push_back(make_side_ping(s.ping, false));
        channels[2].push_back(make_side_ping(s.ping, true));
      }
      ++report.ping_count;
    }

    char row[192];
    std::snprintf(row, sizeof row, "%llu,%.3f,%.3f,%.2f,%.3f,%.3f,%.3f,%zu\n",
                  static_cast<unsigned long long>(state.t_ms),
                  state.position.x_m, state.position.y_m, state.heading_deg,
                  state.surge_mps, th.left, th.right, sp.target_index);
    track << row;

    state = step_dynamics(state, th, cfg.current_mps, plant, cfg.dt_s);
  }

  report.completed = navigator.done();
  report.sim_time_s = static_cast<double>(state.t_ms) / 1000.0;
  report.waypoints_reached = navigator.target_index();

  sonarlog::SurveyHeader header;
  header.channel_count = static_cast<std::uint16_t>(channels.size());
  header.epoch_start_ms = cfg.epoch_start_ms;
  header.water_type = sonarlog::WaterType::fresh;
  header.sound_speed_mps = static_cast<float>(cfg.sound_speed_mps);
  header.device_name = cfg.device_name;
  sonarlog::write_survey(header, channels, out_dir);

  std::ofstream tout(out_dir / "track.csv", std::ios::trunc);
  if (!tout) throw SimError("cannot write track.csv");
  tout << track.str();

  if (!report.completed)
    throw SimError("survey timed out after reaching waypoint " +
                   std::to_string(report.waypoints_reached) + " of " +
                   std::to_string(plan.waypoints.size()));
  return report;
}

}  // namespace bathykit::sim
