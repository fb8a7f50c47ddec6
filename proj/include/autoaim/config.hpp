#pragma once

#include "autoaim/ballistics.hpp"
#include "autoaim/control.hpp"
#include "autoaim/geometry.hpp"
#include "autoaim/selection.hpp"
#include "autoaim/tracker.hpp"

#include <array>
#include <string>

namespace autoaim {

struct EstimationConfig {
  std::size_t history_capacity = 30;
  double detector_period_s = 1.0 / 120.0;
  double tracker_period_s = 0.0;
  double eps_acc = 1e-3;   // floor for the self-tuned std_acc
  double eps_meas = 1e-3;  // floor for the self-tuned std_meas

  /// Prediction horizon for the self-tuning filter: total pipeline latency.
  double dt() const { return detector_period_s + tracker_period_s; }
};

struct BallisticsConfig {
  std::string model = "knn";  // poly4 | poly5 | knn | svr
  int knn_k = 3;
  SvrConfig svr;
  std::string data_csv;  // empty disables drop compensation
};

struct PlantConfig {
  double time_constant_s = 0.1;
  double max_slew_rad_s = 8.0;
};

struct ControlConfig {
  PidConfig pid;
  int fir_order = 8;
  double fir_cutoff = 0.15;  // cycles per control tick
  bool use_fir = true;
  bool use_prediction = true;  // aim at Kalman-predicted offsets vs raw ones
};

/// Every tunable named in the module documentation, with its default value.
struct PipelineConfig {
  CameraModel camera = CameraModel::make(640, 480, 90.0, 10.0, 6.0);
  std::array<double, kNumClasses> real_heights_cm = default_real_heights_cm();
  std::array<double, kNumClasses> real_widths_cm = default_real_widths_cm();
  TrackerConfig tracker;
  EstimationConfig estimation;
  SelectionConfig selection{.k_dis = 0.7, .k_area = 0.3, .middle_x = 320,
                            .middle_y = 240, .hit_bonus = 0.2, .hit_window_s = 2.0};
  BallisticsConfig ballistics;
  ControlConfig control;
  PlantConfig plant;
};

/// Fits the regressor named by cfg.model (poly4|poly5|knn|svr).
DropModel fit_drop_model(const BallisticsConfig& cfg, const std::vector<DropSample>& samples);

/// Parses a config file; missing keys keep their defaults, unknown keys are
/// rejected. Throws std::invalid_argument on any validation failure.
PipelineConfig load_config(const std::string& path);
PipelineConfig parse_config_json(const std::string& json_text);
std::string config_to_json(const PipelineConfig& cfg);
void save_config(const std::string& path, const PipelineConfig& cfg);

}  // namespace autoaim
