#pragma once

#include "autoaim/geometry.hpp"
#include "autoaim/hungarian.hpp"
#include "autoaim/kalman.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

namespace autoaim {

enum class TrackStatus { Active, Missing, Removed };

/// A persistent identity: one Kalman filter per center axis plus lifecycle
/// bookkeeping. Ids are unique for the tracker's lifetime and never reused.
struct Track {
  int64_t track_id = -1;
  int class_id = 0;
  KalmanFilter1D kx, ky;  // center coordinates
  double w = 0, h = 0;    // last observed size, pixels
  TrackStatus status = TrackStatus::Active;
  int age = 0;                // frames since creation
  int time_since_update = 0;  // frames since last matched detection
  int hits = 0;
  int consecutive_hits = 0;
  bool confirmed = false;
  double last_seen_t = 0;
  std::vector<double> hit_history;  // timestamps of recorded strikes

  Track(int64_t id, const Detection& det, const KalmanParams& params);

  BBox predicted_bbox() const {
    return BBox::from_center(kx.position(), ky.position(), w, h);
  }
};

/// Distance in [0,1] between a track and a detection; 0 for identical
/// class/color. The deep re-ID embedding is replaced by this plug.
using AppearanceMetric = std::function<double(const Track&, const Detection&)>;

/// Default metric: exact class match -> 0, anything else -> 1.
AppearanceMetric class_appearance_metric();

struct TrackerConfig {
  double dt = 1.0 / 120.0;
  double lambda = 0.5;      // appearance weight in the association cost
  double iou_gate = 0.1;    // pairs below this IoU are forbidden
  int max_age = 30;         // TooLong: misses before a track is removed
  int confirm_hits = 3;     // consecutive hits before a track is reported
  double std_acc = 1000.0;  // track filter process noise, px/s^2
  double std_meas = 2.0;    // track filter measurement noise, px
  double focal_px = 320.0;  // converts gimbal rotation to pixel shifts
};

/// Gimbal rotation since the previous frame. Known from the IMU (or the
/// simulated plant); applied to track states so the filters see target
/// motion, not the camera's own.
struct EgoMotion {
  double d_yaw = 0;    // radians, positive pans the camera right
  double d_pitch = 0;  // radians, positive tilts up
};

struct TrackerReport {
  std::vector<std::pair<int64_t, int>> matched;  // (track_id, detection index)
  std::vector<int64_t> new_tracks;
  std::vector<int64_t> missing;
  std::vector<int64_t> removed;
};

/// entry(i,j) = (1 - iou(pred_i, det_j)) + lambda * appearance(i,j); pairs
/// with IoU below the gate are forbidden.
CostMatrix build_cost(const std::vector<const Track*>& tracks,
                      const std::vector<Detection>& detections, double lambda,
                      double iou_gate, const AppearanceMetric& appearance);

/// Per-frame data association: predict, match with the Hungarian solver,
/// spawn tracks for unmatched detections, age out unmatched tracks.
class Tracker {
 public:
  explicit Tracker(const TrackerConfig& config = {},
                   AppearanceMetric appearance = class_appearance_metric());

  TrackerReport step(const std::vector<Detection>& detections, double t,
                     const EgoMotion& ego = {});

  const std::vector<std::unique_ptr<Track>>& tracks() const { return tracks_; }
  Track* find(int64_t track_id);
  const Track* find(int64_t track_id) const;

  /// Confirmed ACTIVE tracks, the set reported to downstream consumers.
  std::vector<const Track*> confirmed_active() const;

  /// Confirmed tracks including MISSING ones, whose filter state still
  /// carries a usable predicted position (lost-target engagement).
  std::vector<const Track*> confirmed_tracks() const;

  /// Records a strike on the armor held by this track (selection priority).
  void record_hit(int64_t track_id, double t);

  const TrackerConfig& config() const { return config_; }

 private:
  TrackerConfig config_;
  AppearanceMetric appearance_;
  std::vector<std::unique_ptr<Track>> tracks_;
  int64_t next_id_ = 1;
};

/// Deterministic candidate search regions for a MISSING track: the bound,
/// then repeated halvings biased along the predicted velocity (symmetric when
/// stationary), stopping once a further halving would be smaller than the
/// track's box.
std::vector<BBox> reacquire(const Track& track, const BBox& bound);

}  // namespace autoaim
