// bathykit: plan, simulate, decode and process lake bathymetry surveys.
//
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bathykit/bathykit.hpp"

namespace fs = std::filesystem;
using namespace bathykit;

namespace {

LocalFrame frame_from_option(const std::string& origin_text,
                             const std::vector<LatLon>& fallback_points) {
  if (!origin_text.empty()) return LocalFrame::at(parse_latlon(origin_text));
  if (fallback_points.empty())
    throw CoordinateError("no points available to derive a frame origin");
  double lat = 0.0, lon = 0.0;
  for (const LatLon& p : fallback_points) {
    lat += p.lat_deg;
    lon += p.lon_deg;
  }
  const double n = static_cast<double>(fallback_points.size());
  return LocalFrame::at({lat / n, lon / n});
}

struct PlanArgs {
  std::string boundary_file;
  std::string out_file;
  std::string origin;
  double spacing = 0.0;
  double side_range = sonarlog::SonarSpec::side_range_m;
  double overlap = 0.3;
  double heading = 0.0;
  double margin = 0.0;
  double cruise = 1.5;
  double accept_radius = 3.0;
  bool spacing_given = false;
};

int cmd_plan(const PlanArgs& a) {
  const std::vector<LatLon> boundary_ll = mission::load_boundary(a.boundary_file);
  const LocalFrame frame = frame_from_option(a.origin, boundary_ll);
  std::vector<PlanarPoint> boundary;
  boundary.reserve(boundary_ll.size());
  for (const LatLon& p : boundary_ll) boundary.push_back(to_local(p, frame));

  const double spacing =
      a.spacing_given ? a.spacing : mission::swath_spacing(a.side_range, a.overlap);
  const mission::MissionPlan plan = mission::lawnmower(
      boundary, spacing, a.heading, a.margin, a.cruise, a.accept_radius);
  mission::export_mission(plan, frame, fs::path(a.out_file));
  std::printf("wrote %s: %zu waypoints, spacing %.2f m, heading %.1f deg\n",
              a.out_file.c_str(), plan.waypoints.size(), plan.spacing_m,
              plan.heading_deg);
  return 0;
}

struct SimulateArgs {
  std::string mission_file;
  std::string config_file;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

int cmd_simulate(const SimulateArgs& a) {
  sim::SimConfig cfg;
  if (!a.config_file.empty()) {
    std::ifstream in(a.config_file);
    if (!in) throw sim::SimError("cannot open config " + a.config_file);
    cfg = sim::SimConfig::parse(in);
  }
  if (const char* env = std::getenv("BATHYKIT_SEED"))
    cfg.seed = std::strtoull(env, nullptr, 10);
  if (a.seed_given) cfg.seed = a.seed;

  const mission::MissionFile mf = mission::parse_mission(a.mission_file);
  mission::MissionPlan plan = mf.plan;
  plan.cruise_speed_mps = cfg.gains.cruise_speed_mps;

  fs::create_directories(a.out_dir);
  const sim::RunReport r = sim::run_survey(plan, mf.frame, cfg, a.out_dir);
  std::printf(
      "survey complete: %.1f s simulated, %zu waypoints, %zu pings%s\n",
      r.sim_time_s, r.waypoints_reached, r.ping_count,
      r.depth_clamps ? " (depth clamped at unit limit)" : "");
  return 0;
}

struct DecodeArgs {
  std::string in_dir;
  std::string out_file = "-";
};

int cmd_decode(const DecodeArgs& a) {
  const sonarlog::Survey s = sonarlog::read_survey(a.in_dir);
  std::ostringstream csv;
  csv << "channel,time_offset_ms,lat_deg,lon_deg,heading_deg,speed_mps,"
         "depth_m,freq_khz,beam_id,sample_count\n";
  char row[256];
  for (std::size_t k = 0; k < s.channels.size(); ++k) {
    for (const sonarlog::PingRecord& p : s.channels[k]) {
      std::snprintf(row, sizeof row,
                    "%zu,%u,%.7f,%.7f,%.2f,%.2f,%.2f,%u,%u,%zu\n", k,
                    p.time_offset_ms, p.lat_deg(), p.lon_deg(),
                    p.heading_deg(), p.speed_mps(), p.depth_m(),
                    static_cast<unsigned>(p.freq_khz),
                    static_cast<unsigned>(p.beam_id), p.samples.size());
      csv << row;
    }
  }
  if (a.out_file == "-") {
    std::cout << csv.str();
  } else {
    std::ofstream out(a.out_file, std::ios::trunc);
    if (!out) throw sonarlog::IoError("cannot open " + a.out_file);
    out << csv.str();
  }
  return 0;
}

struct ProcessArgs {
  std::string in_dir;
  std::string out_dir;
  std::string config_file;
  std::string origin;
  std::string boundary_file;
  std::string calib_file;
  double cell = 5.0;
  double interval = 1.0;
  double min_depth = 0.0;
  double max_depth = sonarlog::SonarSpec::max_depth_m;
  double dedup_radius = 0.5;
  double offset = 0.0;
  bool cell_given = false, interval_given = false, min_given = false,
       max_given = false, dedup_given = false, offset_given = false;
};

calibrate::DepthOffset load_calibration(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw calibrate::CalibrationError("cannot open " + path);
  std::vector<std::pair<double, double>> pairs;
  std::string line;
  while (std::getline(in, line)) {
    for (char& c : line)
      if (c == ',') c = ' ';
    std::istringstream ls(line);
    double sonar = 0.0, known = 0.0;
    if (ls >> sonar >> known) pairs.emplace_back(sonar, known);
  }
  return calibrate::compute_offset(pairs);
}

int cmd_process(const ProcessArgs& args_in) {
  ProcessArgs a = args_in;
  if (!a.config_file.empty()) {
    std::ifstream in(a.config_file);
    if (!in) throw GridError("cannot open config " + a.config_file);
    const auto kv = detail::parse_kv(in);
    for (const auto& [key, value] : kv) {
      const double num = std::stod(value);
      if (key == "cell" && !a.cell_given) a.cell = num;
      else if (key == "interval" && !a.interval_given) a.interval = num;
      else if (key == "min_depth" && !a.min_given) a.min_depth = num;
      else if (key == "max_depth" && !a.max_given) a.max_depth = num;
      else if (key == "dedup_radius" && !a.dedup_given) a.dedup_radius = num;
      else if (key == "offset" && !a.offset_given) a.offset = num;
      else if (key != "cell" && key != "interval" && key != "min_depth" &&
               key != "max_depth" && key != "dedup_radius" && key != "offset")
        throw GridError("unknown process config key: " + key);
    }
  }

  const sonarlog::Survey survey = sonarlog::read_survey(a.in_dir);
  std::vector<sonarlog::PingRecord> pings;
  for (const auto& chan : survey.channels)
    pings.insert(pings.end(), chan.begin(), chan.end());

  std::vector<LatLon> fixes;
  for (const auto& p : pings)
    if (p.lat_e7 != 0 || p.lon_e7 != 0) fixes.push_back({p.lat_deg(), p.lon_deg()});
  const LocalFrame frame = frame_from_option(a.origin, fixes);

  calibrate::DepthOffset off{a.offset, 1};
  if (!a.calib_file.empty()) off = load_calibration(a.calib_file);

  calibrate::QualityFilter filter;
  filter.min_depth_m = a.min_depth;
  filter.max_depth_m = a.max_depth;
  filter.dedup_radius_m = a.dedup_radius;
  const calibrate::ExtractResult ex =
      calibrate::extract_soundings(pings, off, frame, filter);
  std::printf("soundings: %zu kept (%zu beam, %zu fix, %zu depth, %zu dup "
              "dropped)\n",
              ex.points.size(), ex.dropped_beam, ex.dropped_position,
              ex.dropped_depth, ex.dropped_duplicate);

  const tin::Triangulation t = tin::delaunay(ex.points);
  if (t.duplicates_merged)
    std::printf("merged %zu coincident soundings\n", t.duplicates_merged);

  std::vector<PlanarPoint> clip;
  if (!a.boundary_file.empty()) {
    for (const LatLon& p : mission::load_boundary(a.boundary_file))
      clip.push_back(to_local(p, frame));
  }
  const DepthGrid grid = tin::rasterize(t, clip, a.cell);

  const auto rows = hypso::band_table(grid, a.interval);
  const auto sum = hypso::summary(grid);

  fs::create_directories(a.out_dir);
  const fs::path out(a.out_dir);
  write_esri_ascii(grid, out / "depth.asc");
  write_pgm(grid, out / "depth.pgm");
  {
    std::ofstream f(out / "bands.csv", std::ios::trunc);
    f << hypso::report(rows, sum, hypso::ReportFormat::csv);
  }
  {
    std::ofstream f(out / "summary.txt", std::ios::trunc);
    f << hypso::report(rows, sum, hypso::ReportFormat::text);
  }
  {
    std::ofstream f(out / "summary.json", std::ios::trunc);
    f << hypso::report(rows, sum, hypso::ReportFormat::json);
  }
  std::cout << hypso::report(rows, sum, hypso::ReportFormat::text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bathymetry survey toolkit: plan -> simulate -> decode -> "
               "process"};
  app.set_version_flag("--version", std::string("bathykit ") + kVersion);
  app.require_subcommand(0, 1);

  PlanArgs plan;
  CLI::App* plan_cmd =
      app.add_subcommand("plan", "plan a lawnmower survey inside a boundary");
  plan_cmd->add_option("--boundary", plan.boundary_file,
                       "boundary polygon file (lat/lon or DDM lines)")
      ->required();
  auto* spacing_opt =
      plan_cmd->add_option("--spacing", plan.spacing, "transect spacing, m");
  plan_cmd->add_option("--side-range", plan.side_range,
                       "side-scan range per side, m (default 73)");
  plan_cmd->add_option("--overlap", plan.overlap,
                       "swath overlap fraction in [0,1) (default 0.3)");
  plan_cmd->add_option("--heading", plan.heading,
                       "sweep advance bearing, deg (transects run "
                       "perpendicular)");
  plan_cmd->add_option("--margin", plan.margin, "shore stand-off margin, m");
  plan_cmd->add_option("--cruise", plan.cruise, "cruise speed, m/s");
  plan_cmd->add_option("--accept-radius", plan.accept_radius,
                       "waypoint acceptance radius, m");
  plan_cmd->add_option("--origin", plan.origin,
                       "frame origin \"lat, lon\" (default: boundary centroid)");
  plan_cmd->add_option("--out", plan.out_file, "mission file to write")
      ->required();

  SimulateArgs simu;
  CLI::App* sim_cmd =
      app.add_subcommand("simulate", "run the vehicle simulator over a mission");
  sim_cmd->add_option("--mission", simu.mission_file, "mission file")->required();
  sim_cmd->add_option("--config", simu.config_file, "sim config (key=value)");
  sim_cmd->add_option("--out", simu.out_dir, "output survey directory")
      ->required();
  auto* seed_opt = sim_cmd->add_option("--seed", simu.seed, "RNG seed override");

  DecodeArgs dec;
  CLI::App* dec_cmd =
      app.add_subcommand("decode", "dump survey pings as CSV");
  dec_cmd->add_option("--in", dec.in_dir, "survey directory")->required();
  dec_cmd->add_option("--out", dec.out_file, "CSV path (default stdout)");

  ProcessArgs proc;
  CLI::App* proc_cmd = app.add_subcommand(
      "process", "survey files -> calibrated TIN -> depth grid -> volume report");
  proc_cmd->add_option("--in", proc.in_dir, "survey directory")->required();
  proc_cmd->add_option("--out", proc.out_dir, "output directory")->required();
  proc_cmd->add_option("--config", proc.config_file,
                       "key=value defaults for the options below");
  auto* cell_opt = proc_cmd->add_option("--cell", proc.cell, "grid cell size, m");
  auto* interval_opt =
      proc_cmd->add_option("--interval", proc.interval, "depth band interval, m");
  auto* min_opt =
      proc_cmd->add_option("--min-depth", proc.min_depth, "minimum kept depth, m");
  auto* max_opt =
      proc_cmd->add_option("--max-depth", proc.max_depth, "maximum kept depth, m");
  auto* dedup_opt = proc_cmd->add_option("--dedup-radius", proc.dedup_radius,
                                         "duplicate position radius, m");
  auto* offset_opt = proc_cmd->add_option(
      "--offset", proc.offset, "depth offset to subtract (error term), m");
  proc_cmd->add_option("--calib", proc.calib_file,
                       "calibration pairs file: sonar_m known_m per line");
  proc_cmd->add_option("--origin", proc.origin,
                       "frame origin \"lat, lon\" (default: ping centroid)");
  proc_cmd->add_option("--boundary", proc.boundary_file,
                       "clip polygon file (lat/lon or DDM lines)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  plan.spacing_given = spacing_opt->count() > 0;
  simu.seed_given = seed_opt->count() > 0;
  proc.cell_given = cell_opt->count() > 0;
  proc.interval_given = interval_opt->count() > 0;
  proc.min_given = min_opt->count() > 0;
  proc.max_given = max_opt->count() > 0;
  proc.dedup_given = dedup_opt->count() > 0;
  proc.offset_given = offset_opt->count() > 0;

  try {
    if (plan_cmd->parsed()) return cmd_plan(plan);
    if (sim_cmd->parsed()) return cmd_simulate(simu);
    if (dec_cmd->parsed()) return cmd_decode(dec);
    if (proc_cmd->parsed()) return cmd_process(proc);
    std::cout << app.help();
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
