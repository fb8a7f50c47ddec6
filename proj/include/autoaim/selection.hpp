#pragma once

#include "autoaim/kalman.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace autoaim {

struct SelectionConfig {
  double k_dis = 0.7;
  double k_area = 0.3;
  double middle_x = 320;
  double middle_y = 240;
  double hit_bonus = 0.2;    // weight reduction for recently struck armor
  double hit_window_s = 2.0; // how recent a strike must be to grant the bonus
};

/// One targetable candidate: a confirmed track's current image-space box
/// center plus the timestamp of its most recent recorded strike, if any.
struct AimCandidate {
  int64_t track_id = -1;
  double cx = 0, cy = 0;  // pixels, image frame
  double w = 0, h = 0;    // pixels
  std::optional<double> last_hit_t;
};

struct SelectedTarget {
  int64_t track_id = -1;
  double x_ret = 0, y_ret = 0;  // normalized center offsets, y up
  double w_ret = 0, h_ret = 0;  // pixels
  double weight = 0;
  double x_pred = 0, y_pred = 0;  // filled by predict_aim
};

/// Two-pass minimum-weight pick: pass 1 finds max distance and max area over
/// the candidates, pass 2 scores
///   weight = k_dis * (dis/max_dis) + k_area * (1 - area/max_area)
/// minus hit_bonus for armor struck within hit_window_s, and keeps the strict
/// minimum (first encountered wins ties). Empty input -> nullopt.
/// When every candidate sits exactly at the center (max_dis == 0) the
/// distance term is dropped instead of deselecting everything.
std::optional<SelectedTarget> select(const std::vector<AimCandidate>& candidates,
                                     const SelectionConfig& cfg, double now);

/// Appends the selected offsets to the per-track histories (padding to the
/// 3-sample minimum on a cold start), runs kalman_at_filter over them and
/// records the result in sel.x_pred / sel.y_pred.
AimPrediction predict_aim(SelectedTarget& sel, MeasurementHistory& hx, MeasurementHistory& hy,
                          double dt, double std_acc_floor = kStdAccFloor,
                          double std_meas_floor = kStdMeasFloor);

}  // namespace autoaim
