#include "autoaim/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace autoaim {

std::optional<SelectedTarget> select(const std::vector<AimCandidate>& candidates,
                                     const SelectionConfig& cfg, double now) {
  if (candidates.empty()) return std::nullopt;

  double max_area = 0;
  double max_dis = 0;
  for (const auto& c : candidates) {
    const double x1 = c.cx - cfg.middle_x;
    const double y1 = cfg.middle_y - c.cy;
    max_area = std::max(max_area, c.w * c.h);
    max_dis = std::max(max_dis, std::hypot(x1, y1));
  }

  std::optional<SelectedTarget> best;
  double min_weight = std::numeric_limits<double>::infinity();
  for (const auto& c : candidates) {
    const double x1 = c.cx - cfg.middle_x;
    const double y1 = cfg.middle_y - c.cy;
    const double dis = std::hypot(x1, y1);
    const double area = c.w * c.h;
    const double normalized_dis = max_dis > 0 ? dis / max_dis : 0.0;
    const double normalized_area = max_area > 0 ? 1.0 - area / max_area : 0.0;
    double weight = cfg.k_dis * normalized_dis + cfg.k_area * normalized_area;
    if (c.last_hit_t && now - *c.last_hit_t <= cfg.hit_window_s) weight -= cfg.hit_bonus;
    if (weight < min_weight) {
      min_weight = weight;
      SelectedTarget sel;
      sel.track_id = c.track_id;
      sel.x_ret = x1 / cfg.middle_x;
      sel.y_ret = y1 / cfg.middle_y;
      sel.w_ret = c.w;
      sel.h_ret = c.h;
      sel.weight = weight;
      best = sel;
    }
  }
  return best;
}

AimPrediction predict_aim(SelectedTarget& sel, MeasurementHistory& hx, MeasurementHistory& hy,
                          double dt, double std_acc_floor, double std_meas_floor) {
  hx.push(sel.x_ret);
  hy.push(sel.y_ret);
  while (hx.size() < 3) hx.push(sel.x_ret);
  while (hy.size() < 3) hy.push(sel.y_ret);
  const AimPrediction pred = kalman_at_filter(hx, hy, dt, std_acc_floor, std_meas_floor);
  sel.x_pred = pred.x_pred;
  sel.y_pred = pred.y_pred;
  return pred;
}

}  // namespace autoaim
