#pragma once

#include "autoaim/config.hpp"
#include "autoaim/eval.hpp"
#include "autoaim/geometry.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace autoaim {

enum class PathKind { ConstantVelocity, SinusoidalStrafe, Waypoints };

/// Target motion in arena coordinates: x right, y up, z forward (depth from
/// the turret), meters.
struct PathSpec {
  PathKind kind = PathKind::ConstantVelocity;
  Point3 start_m{0, 0, 3};
  Point3 velocity_m_s{0, 0, 0};
  Point3 center_m{0, 0, 3};
  double amplitude_m = 0.8;
  double freq_hz = 0.4;
  int axis = 0;  // 0=x, 1=y, 2=z
  std::vector<std::pair<double, Point3>> waypoints;  // (t, position), t ascending

  Point3 position_at(double t) const;
};

struct TargetSpec {
  int class_id = kRedArmor;
  PathSpec path;
  double spawn_s = 0;
  double despawn_s = -1;  // -1: lives to scenario end
  std::vector<std::pair<double, double>> occlusions;  // [t0, t1] windows

  bool occluded_at(double t) const;
  bool alive_at(double t, double duration) const;
};

struct NoiseSpec {
  double center_sigma_px = 1.0;
  double size_sigma_px = 0.5;
  double miss_prob = 0.05;
  double fp_rate = 0.1;  // Poisson mean of false positives per tick
};

/// A fully deterministic closed-loop scene: same (scenario, seed, config)
/// always produces the identical tick log.
struct Scenario {
  double duration_s = 10.0;
  double tick_s = 1.0 / 120.0;
  uint64_t seed = 1;
  std::vector<TargetSpec> targets;
  NoiseSpec noise;
};

Scenario load_scenario(const std::string& path);
Scenario parse_scenario_json(const std::string& json_text);
std::string scenario_to_json(const Scenario& s);
void save_scenario(const std::string& path, const Scenario& s);

/// First-order lag toward the integrated command, slew-limited so the angular
/// velocity never exceeds max_slew.
struct GimbalPlant {
  double yaw = 0, pitch = 0;
  double desired_yaw = 0, desired_pitch = 0;

  void step(const GimbalCommand& cmd, double dt, const PlantConfig& cfg);
};

struct TickLog {
  double t = 0;
  int target_id = -1;  // engaged ground-truth target index, -1 when none
  double gt_x = 0, gt_y = 0;
  int det_count = 0;
  int64_t sel_track = -1;
  double x_pred = 0, y_pred = 0;
  double d_yaw = 0, d_pitch = 0;
  double plant_yaw = 0, plant_pitch = 0;
  double aim_err_px = 0;
};

struct SimSummary {
  int ticks = 0;
  double mean_abs_aim_err_px = 0;
  double final_aim_err_px = 0;
  int unique_selected_tracks = 0;
  int tracks_created = 0;
  int tracks_removed = 0;
  std::optional<double> detector_precision;
  std::optional<double> detector_recall;
  std::optional<double> detector_map;
};

struct SimResult {
  std::vector<TickLog> log;
  SimSummary summary;
};

SimResult run_simulation(const Scenario& scenario, const PipelineConfig& config);

inline constexpr const char* kTickLogHeader =
    "t,target_id,gt_x,gt_y,det_count,sel_track,x_pred,y_pred,d_yaw,d_pitch,"
    "plant_yaw,plant_pitch,aim_err_px";

std::string ticklog_csv(const std::vector<TickLog>& log);
void write_ticklog_csv(const std::string& path, const std::vector<TickLog>& log);

std::string summary_to_json(const SimSummary& s);

}  // namespace autoaim
