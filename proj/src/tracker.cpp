#include "autoaim/tracker.hpp"

#include <algorithm>
#include <cmath>

namespace autoaim {

Track::Track(int64_t id, const Detection& det, const KalmanParams& params)
    : track_id(id),
      class_id(det.class_id),
      kx(params),
      ky(params),
      w(det.bbox.width()),
      h(det.bbox.height()),
      last_seen_t(det.t) {
  kx.set_state(det.bbox.cx(), 0.0);
  ky.set_state(det.bbox.cy(), 0.0);
  hits = 1;
  consecutive_hits = 1;
}

AppearanceMetric class_appearance_metric() {
  return [](const Track& trk, const Detection& det) {
    return trk.class_id == det.class_id ? 0.0 : 1.0;
  };
}

CostMatrix build_cost(const std::vector<const Track*>& tracks,
                      const std::vector<Detection>& detections, double lambda,
                      double iou_gate, const AppearanceMetric& appearance) {
  CostMatrix c(static_cast<int>(tracks.size()), static_cast<int>(detections.size()));
  for (int i = 0; i < c.rows(); ++i) {
    const BBox pred = tracks[i]->predicted_bbox();
    for (int j = 0; j < c.cols(); ++j) {
      const double overlap = iou(pred, detections[j].bbox);
      if (overlap < iou_gate) {
        c.forbid(i, j);
      } else {
        c.costs(i, j) = (1.0 - overlap) + lambda * appearance(*tracks[i], detections[j]);
      }
    }
  }
  return c;
}

Tracker::Tracker(const TrackerConfig& config, AppearanceMetric appearance)
    : config_(config), appearance_(std::move(appearance)) {}

Track* Tracker::find(int64_t track_id) {
  for (auto& t : tracks_)
    if (t->track_id == track_id) return t.get();
  return nullptr;
}

const Track* Tracker::find(int64_t track_id) const {
  return const_cast<Tracker*>(this)->find(track_id);
}

std::vector<const Track*> Tracker::confirmed_active() const {
  std::vector<const Track*> out;
  for (const auto& t : tracks_)
    if (t->confirmed && t->status == TrackStatus::Active) out.push_back(t.get());
  return out;
}

std::vector<const Track*> Tracker::confirmed_tracks() const {
  std::vector<const Track*> out;
  for (const auto& t : tracks_)
    if (t->confirmed && t->status != TrackStatus::Removed) out.push_back(t.get());
  return out;
}

void Tracker::record_hit(int64_t track_id, double t) {
  if (Track* trk = find(track_id)) trk->hit_history.push_back(t);
}

TrackerReport Tracker::step(const std::vector<Detection>& detections,
                            [[maybe_unused]] double t, const EgoMotion& ego) {
  TrackerReport report;

  // A yaw to the right shifts image content left; a tilt up shifts it down
  // (pixel y grows downward). Small-angle per-frame deltas.
  const double shift_x = -ego.d_yaw * config_.focal_px;
  const double shift_y = ego.d_pitch * config_.focal_px;
  for (auto& trk : tracks_) {
    ++trk->age;
    trk->kx.set_state(trk->kx.position() + shift_x, trk->kx.velocity());
    trk->ky.set_state(trk->ky.position() + shift_y, trk->ky.velocity());
    trk->kx.predict(0.0);  // association uses the no-input motion model
    trk->ky.predict(0.0);
  }

  // Single Hungarian pass with rows ordered by time_since_update, so fresher
  // tracks win deterministic tie-breaks (cascade matching simplified).
  std::vector<Track*> live;
  for (auto& trk : tracks_) live.push_back(trk.get());
  std::stable_sort(live.begin(), live.end(), [](const Track* a, const Track* b) {
    return a->time_since_update < b->time_since_update;
  });

  std::vector<const Track*> rows(live.begin(), live.end());
  const CostMatrix cost = build_cost(rows, detections, config_.lambda, config_.iou_gate, appearance_);
  const Assignment assignment = hungarian(cost);

  std::vector<char> det_matched(detections.size(), 0);
  for (const auto& [row, col] : assignment.pairs) {
    Track* trk = live[row];
    const Detection& det = detections[col];
    trk->kx.update(det.bbox.cx());
    trk->ky.update(det.bbox.cy());
    trk->w = det.bbox.width();
    trk->h = det.bbox.height();
    trk->time_since_update = 0;
    trk->status = TrackStatus::Active;
    trk->last_seen_t = det.t;
    ++trk->hits;
    ++trk->consecutive_hits;
    if (trk->consecutive_hits >= config_.confirm_hits) trk->confirmed = true;
    det_matched[col] = 1;
    report.matched.emplace_back(trk->track_id, col);
  }

  for (int row : assignment.unmatched_rows) {
    Track* trk = live[row];
    ++trk->time_since_update;
    trk->consecutive_hits = 0;
    if (!trk->confirmed || trk->time_since_update > config_.max_age) {
      trk->status = TrackStatus::Removed;
      report.removed.push_back(trk->track_id);
    } else {
      trk->status = TrackStatus::Missing;
      report.missing.push_back(trk->track_id);
    }
  }

  const KalmanParams params =
      KalmanParams::make(config_.dt, 0.0, config_.std_acc, config_.std_meas);
  for (std::size_t j = 0; j < detections.size(); ++j) {
    if (det_matched[j]) continue;
    if (!detections[j].valid()) continue;
    auto trk = std::make_unique<Track>(next_id_++, detections[j], params);
    report.new_tracks.push_back(trk->track_id);
    tracks_.push_back(std::move(trk));
  }

  std::erase_if(tracks_, [](const std::unique_ptr<Track>& trk) {
    return trk->status == TrackStatus::Removed;
  });
  return report;
}

std::vector<BBox> reacquire(const Track& track, const BBox& bound) {
  std::vector<BBox> regions;
  regions.push_back(bound);

  const double box_w = std::max(track.w, 1.0);
  const double box_h = std::max(track.h, 1.0);
  const double vx = track.kx.velocity();
  const double vy = track.ky.velocity();
  constexpr double kVelEps = 1e-9;

  double w = bound.width();
  double h = bound.height();
  double cx = std::clamp(track.kx.position(), bound.x1, bound.x2);
  double cy = std::clamp(track.ky.position(), bound.y1, bound.y2);

  while (w / 2 >= box_w && h / 2 >= box_h) {
    w /= 2;
    h /= 2;
    if (std::abs(vx) > kVelEps) cx += std::copysign(w / 2, vx);
    if (std::abs(vy) > kVelEps) cy += std::copysign(h / 2, vy);
    cx = std::clamp(cx, bound.x1 + w / 2, bound.x2 - w / 2);
    cy = std::clamp(cy, bound.y1 + h / 2, bound.y2 - h / 2);
    regions.push_back(BBox::from_center(cx, cy, w, h));
  }
  return regions;
}

}  // namespace autoaim
