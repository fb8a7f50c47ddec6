#include "autoaim/sim.hpp"

#include "autoaim/io.hpp"
#include "autoaim/selection.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace autoaim {

using nlohmann::json;

Point3 PathSpec::position_at(double t) const {
  switch (kind) {
    case PathKind::ConstantVelocity:
      return {start_m.x + velocity_m_s.x * t, start_m.y + velocity_m_s.y * t,
              start_m.z + velocity_m_s.z * t};
    case PathKind::SinusoidalStrafe: {
      Point3 p = center_m;
      const double offset = amplitude_m * std::sin(2 * M_PI * freq_hz * t);
      if (axis == 0) p.x += offset;
      else if (axis == 1) p.y += offset;
      else p.z += offset;
      return p;
    }
    case PathKind::Waypoints: {
      if (t <= waypoints.front().first) return waypoints.front().second;
      if (t >= waypoints.back().first) return waypoints.back().second;
      for (std::size_t i = 1; i < waypoints.size(); ++i) {
        if (t <= waypoints[i].first) {
          const auto& [t0, p0] = waypoints[i - 1];
          const auto& [t1, p1] = waypoints[i];
          const double a = t1 > t0 ? (t - t0) / (t1 - t0) : 1.0;
          return {p0.x + a * (p1.x - p0.x), p0.y + a * (p1.y - p0.y),
                  p0.z + a * (p1.z - p0.z)};
        }
      }
      return waypoints.back().second;
    }
  }
  return {};
}

bool TargetSpec::occluded_at(double t) const {
  for (const auto& [t0, t1] : occlusions)
    if (t >= t0 && t < t1) return true;
  return false;
}

bool TargetSpec::alive_at(double t, double duration) const {
  const double end = despawn_s < 0 ? duration : despawn_s;
  return t >= spawn_s && t < end;
}

namespace {

Point3 parse_point(const json& j, const char* ctx) {
  if (!j.is_array() || j.size() != 3)
    throw std::invalid_argument(std::string(ctx) + " must be [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

void validate_scenario(const Scenario& s) {
  if (!(s.tick_s > 0)) throw std::invalid_argument("scenario tick_s must be > 0");
  if (s.duration_s < 0) throw std::invalid_argument("scenario duration_s must be >= 0");
  const auto& n = s.noise;
  if (n.miss_prob < 0 || n.miss_prob > 1)
    throw std::invalid_argument("noise.miss_prob must lie in [0,1]");
  if (n.center_sigma_px < 0 || n.size_sigma_px < 0 || n.fp_rate < 0)
    throw std::invalid_argument("noise sigmas and fp_rate must be >= 0");
  for (const auto& tgt : s.targets) {
    if (!valid_class(tgt.class_id)) throw std::invalid_argument("target class_id out of range");
    if (tgt.despawn_s >= 0 && tgt.despawn_s < tgt.spawn_s)
      throw std::invalid_argument("target despawn_s must be >= spawn_s");
    for (const auto& [t0, t1] : tgt.occlusions)
      if (t1 < t0) throw std::invalid_argument("occlusion window must have t0 <= t1");
    if (tgt.path.kind == PathKind::Waypoints) {
      if (tgt.path.waypoints.empty())
        throw std::invalid_argument("waypoint path needs at least one point");
      for (std::size_t i = 1; i < tgt.path.waypoints.size(); ++i)
        if (tgt.path.waypoints[i].first < tgt.path.waypoints[i - 1].first)
          throw std::invalid_argument("waypoint times must be non-decreasing");
    }
    if (tgt.path.kind == PathKind::SinusoidalStrafe) {
      if (tgt.path.amplitude_m < 0 || tgt.path.freq_hz < 0)
        throw std::invalid_argument("strafe amplitude and frequency must be >= 0");
      if (tgt.path.axis < 0 || tgt.path.axis > 2)
        throw std::invalid_argument("strafe axis must be x, y or z");
    }
  }
}

PathSpec parse_path(const json& j) {
  if (!j.is_object() || !j.contains("kind"))
    throw std::invalid_argument("target path must be an object with a 'kind'");
  PathSpec p;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant_velocity") {
    p.kind = PathKind::ConstantVelocity;
    if (j.contains("start_m")) p.start_m = parse_point(j.at("start_m"), "start_m");
    if (j.contains("velocity_m_s"))
      p.velocity_m_s = parse_point(j.at("velocity_m_s"), "velocity_m_s");
  } else if (kind == "sinusoidal_strafe") {
    p.kind = PathKind::SinusoidalStrafe;
    if (j.contains("center_m")) p.center_m = parse_point(j.at("center_m"), "center_m");
    if (j.contains("amplitude_m")) p.amplitude_m = j.at("amplitude_m").get<double>();
    if (j.contains("freq_hz")) p.freq_hz = j.at("freq_hz").get<double>();
    if (j.contains("axis")) {
      const std::string axis = j.at("axis").get<std::string>();
      if (axis == "x") p.axis = 0;
      else if (axis == "y") p.axis = 1;
      else if (axis == "z") p.axis = 2;
      else throw std::invalid_argument("strafe axis must be 'x', 'y' or 'z'");
    }
  } else if (kind == "waypoints") {
    p.kind = PathKind::Waypoints;
    if (!j.contains("points_tm") || !j.at("points_tm").is_array())
      throw std::invalid_argument("waypoint path needs a points_tm array");
    for (const auto& row : j.at("points_tm")) {
      if (!row.is_array() || row.size() != 4)
        throw std::invalid_argument("waypoint rows must be [t, x, y, z]");
      p.waypoints.emplace_back(row[0].get<double>(),
                               Point3{row[1].get<double>(), row[2].get<double>(),
                                      row[3].get<double>()});
    }
  } else {
    throw std::invalid_argument("unknown path kind: " + kind);
  }
  return p;
}

}  // namespace

Scenario parse_scenario_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("scenario parse error: ") + e.what());
  }
  Scenario s;
  if (j.contains("duration_s")) s.duration_s = j.at("duration_s").get<double>();
  if (j.contains("tick_s")) s.tick_s = j.at("tick_s").get<double>();
  if (j.contains("seed")) s.seed = j.at("seed").get<uint64_t>();
  if (j.contains("noise")) {
    const auto& jn = j.at("noise");
    if (jn.contains("center_sigma_px")) s.noise.center_sigma_px = jn.at("center_sigma_px").get<double>();
    if (jn.contains("size_sigma_px")) s.noise.size_sigma_px = jn.at("size_sigma_px").get<double>();
    if (jn.contains("miss_prob")) s.noise.miss_prob = jn.at("miss_prob").get<double>();
    if (jn.contains("fp_rate")) s.noise.fp_rate = jn.at("fp_rate").get<double>();
  }
  if (j.contains("targets")) {
    for (const auto& jt : j.at("targets")) {
      TargetSpec tgt;
      if (jt.contains("class_id")) tgt.class_id = jt.at("class_id").get<int>();
      if (jt.contains("spawn_s")) tgt.spawn_s = jt.at("spawn_s").get<double>();
      if (jt.contains("despawn_s")) tgt.despawn_s = jt.at("despawn_s").get<double>();
      if (jt.contains("occlusions"))
        for (const auto& w : jt.at("occlusions")) {
          if (!w.is_array() || w.size() != 2)
            throw std::invalid_argument("occlusions must be [t0, t1] pairs");
          tgt.occlusions.emplace_back(w[0].get<double>(), w[1].get<double>());
        }
      if (jt.contains("path")) tgt.path = parse_path(jt.at("path"));
      s.targets.push_back(std::move(tgt));
    }
  }
  validate_scenario(s);
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open scenario file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario_json(ss.str());
}

std::string scenario_to_json(const Scenario& s) {
  json j;
  j["duration_s"] = s.duration_s;
  j["tick_s"] = s.tick_s;
  j["seed"] = s.seed;
  j["noise"] = {{"center_sigma_px", s.noise.center_sigma_px},
                {"size_sigma_px", s.noise.size_sigma_px},
                {"miss_prob", s.noise.miss_prob},
                {"fp_rate", s.noise.fp_rate}};
  j["targets"] = json::array();
  for (const auto& tgt : s.targets) {
    json jt;
    jt["class_id"] = tgt.class_id;
    jt["spawn_s"] = tgt.spawn_s;
    jt["despawn_s"] = tgt.despawn_s;
    jt["occlusions"] = json::array();
    for (const auto& [t0, t1] : tgt.occlusions) jt["occlusions"].push_back({t0, t1});
    json jp;
    switch (tgt.path.kind) {
      case PathKind::ConstantVelocity:
        jp["kind"] = "constant_velocity";
        jp["start_m"] = {tgt.path.start_m.x, tgt.path.start_m.y, tgt.path.start_m.z};
        jp["velocity_m_s"] = {tgt.path.velocity_m_s.x, tgt.path.velocity_m_s.y,
                              tgt.path.velocity_m_s.z};
        break;
      case PathKind::SinusoidalStrafe:
        jp["kind"] = "sinusoidal_strafe";
        jp["center_m"] = {tgt.path.center_m.x, tgt.path.center_m.y, tgt.path.center_m.z};
        jp["amplitude_m"] = tgt.path.amplitude_m;
        jp["freq_hz"] = tgt.path.freq_hz;
        jp["axis"] = tgt.path.axis == 0 ? "x" : (tgt.path.axis == 1 ? "y" : "z");
        break;
      case PathKind::Waypoints: {
        jp["kind"] = "waypoints";
        json rows = json::array();
        for (const auto& [t, p] : tgt.path.waypoints) rows.push_back({t, p.x, p.y, p.z});
        jp["points_tm"] = rows;
        break;
      }
    }
    jt["path"] = jp;
    j["targets"].push_back(jt);
  }
  return j.dump(2) + "\n";
}

void save_scenario(const std::string& path, const Scenario& s) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write scenario file: " + path);
  out << scenario_to_json(s);
}

void GimbalPlant::step(const GimbalCommand& cmd, double dt, const PlantConfig& cfg) {
  desired_yaw += cmd.d_yaw;
  desired_pitch += cmd.d_pitch;
  const double alpha = 1.0 - std::exp(-dt / cfg.time_constant_s);
  const double limit = cfg.max_slew_rad_s * dt;
  yaw += std::clamp(alpha * (desired_yaw - yaw), -limit, limit);
  pitch += std::clamp(alpha * (desired_pitch - pitch), -limit, limit);
}

namespace {

struct GtBox {
  int target_index;
  int class_id;
  double px, py;  // pixel center
  double w, h;    // pixel size
};

struct Projector {
  const CameraModel& cam;
  const std::array<double, kNumClasses>& heights;
  const std::array<double, kNumClasses>& widths;

  std::optional<GtBox> project(int index, int class_id, const Point3& world_m,
                               double yaw, double pitch) const {
    // Gimbal view: yaw about the vertical axis, then pitch raising the
    // optical axis; the camera sits mount-offset from the launcher origin.
    const Eigen::Matrix3d view = rot_y(yaw) * rot_x(-pitch);
    const Eigen::Vector3d p_world(world_m.x * 100, world_m.y * 100, world_m.z * 100);
    const Eigen::Vector3d offset(0, cam.mount_offset_up_cm, cam.mount_offset_forward_cm);
    const Eigen::Vector3d p_cam = view.transpose() * (p_world - offset);
    if (p_cam.z() < 20.0) return std::nullopt;  // behind or inside the turret
    const double x_off = p_cam.x() * cam.focal_px / p_cam.z();
    const double y_off = p_cam.y() * cam.focal_px / p_cam.z();
    GtBox g;
    g.target_index = index;
    g.class_id = class_id;
    g.px = cam.middle_x() + x_off;
    g.py = cam.middle_y() - y_off;
    if (g.px < 0 || g.px > cam.width || g.py < 0 || g.py > cam.height) return std::nullopt;
    g.h = cam.focal_px * heights[class_id] / p_cam.z();
    g.w = cam.focal_px * widths[class_id] / p_cam.z();
    return g;
  }
};

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

SimResult run_simulation(const Scenario& scenario, const PipelineConfig& config) {
  validate_scenario(scenario);

  const CameraModel& cam = config.camera;
  // The detector runs at its own cadence; tracking advances per detector
  // frame while the control loop runs every tick on the latest aim signal.
  const int detect_every = std::max(
      1, static_cast<int>(std::llround(config.estimation.detector_period_s / scenario.tick_s)));
  TrackerConfig tracker_cfg = config.tracker;
  tracker_cfg.dt = detect_every * scenario.tick_s;
  tracker_cfg.focal_px = config.camera.focal_px;
  Tracker tracker(tracker_cfg);
  std::mt19937_64 rng(scenario.seed);
  std::normal_distribution<double> unit_normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::optional<DropModel> drop;
  if (!config.ballistics.data_csv.empty())
    drop = fit_drop_model(config.ballistics, load_drop_csv(config.ballistics.data_csv));

  PidFfController yaw_ctl(config.control.pid);
  PidFfController pitch_ctl(config.control.pid);
  FirFilter fir_x = config.control.use_fir
                        ? design_lowpass(config.control.fir_order, config.control.fir_cutoff)
                        : FirFilter::identity();
  FirFilter fir_y = fir_x;
  GimbalPlant plant;
  Projector projector{cam, config.real_heights_cm, config.real_widths_cm};

  std::map<int64_t, std::pair<MeasurementHistory, MeasurementHistory>> histories;
  auto history_for = [&](int64_t id) -> std::pair<MeasurementHistory, MeasurementHistory>& {
    auto it = histories.find(id);
    if (it == histories.end())
      it = histories
               .emplace(id, std::make_pair(MeasurementHistory(config.estimation.history_capacity),
                                           MeasurementHistory(config.estimation.history_capacity)))
               .first;
    return it->second;
  };

  std::vector<LabeledBox> truth_boxes, pred_boxes;
  SimResult result;
  std::set<int64_t> selected_ids;
  double abs_err_sum = 0;
  int err_ticks = 0;

  // Aim signal held between detector frames.
  bool have_aim = false;
  int64_t held_track = -1;
  double held_x = 0, held_y = 0, held_comp = 0;
  double last_frame_yaw = 0, last_frame_pitch = 0;  // plant pose at the previous detector frame

  const int n_ticks = static_cast<int>(std::floor(scenario.duration_s / scenario.tick_s + 1e-9));
  for (int k = 0; k < n_ticks; ++k) {
    const double t = k * scenario.tick_s;

    std::vector<GtBox> gts;
    for (std::size_t i = 0; i < scenario.targets.size(); ++i) {
      const TargetSpec& tgt = scenario.targets[i];
      if (!tgt.alive_at(t, scenario.duration_s) || tgt.occluded_at(t)) continue;
      if (auto g = projector.project(static_cast<int>(i), tgt.class_id,
                                     tgt.path.position_at(t), plant.yaw, plant.pitch))
        gts.push_back(*g);
    }

    TickLog row;
    row.t = t;

    if (k % detect_every == 0) {
      std::vector<Detection> dets;
      for (const GtBox& g : gts) {
        if (scenario.noise.miss_prob > 0 && unit(rng) < scenario.noise.miss_prob) continue;
        const double cs = scenario.noise.center_sigma_px;
        const double ss = scenario.noise.size_sigma_px;
        const double nx = cs > 0 ? unit_normal(rng) * cs : 0.0;
        const double ny = cs > 0 ? unit_normal(rng) * cs : 0.0;
        const double nw = ss > 0 ? unit_normal(rng) * ss : 0.0;
        const double nh = ss > 0 ? unit_normal(rng) * ss : 0.0;
        const double conf = std::clamp(0.9 + 0.05 * unit_normal(rng), 0.5, 1.0);
        Detection d;
        d.t = t;
        d.class_id = g.class_id;
        d.bbox = BBox::from_center(g.px + nx, g.py + ny, std::max(2.0, g.w + nw),
                                   std::max(2.0, g.h + nh));
        d.confidence = conf;
        dets.push_back(d);
      }
      if (scenario.noise.fp_rate > 0) {
        std::poisson_distribution<int> poisson(scenario.noise.fp_rate);
        const int n_fp = poisson(rng);
        for (int f = 0; f < n_fp; ++f) {
          Detection d;
          d.t = t;
          d.class_id = static_cast<int>(unit(rng) * kNumClasses) % kNumClasses;
          const double fx = unit(rng) * cam.width;
          const double fy = unit(rng) * cam.height;
          const double fw = 10 + unit(rng) * 50;
          const double fh = 10 + unit(rng) * 50;
          d.bbox = BBox::from_center(fx, fy, fw, fh);
          d.confidence = 0.5 + unit(rng) * 0.4;
          dets.push_back(d);
        }
      }

      for (const GtBox& g : gts)
        truth_boxes.push_back({t, g.class_id, BBox::from_center(g.px, g.py, g.w, g.h), 1.0});
      for (const Detection& d : dets)
        pred_boxes.push_back({d.t, d.class_id, d.bbox, d.confidence});
      row.det_count = static_cast<int>(dets.size());

      const EgoMotion ego{plant.yaw - last_frame_yaw, plant.pitch - last_frame_pitch};
      last_frame_yaw = plant.yaw;
      last_frame_pitch = plant.pitch;
      const TrackerReport report = tracker.step(dets, t, ego);
      result.summary.tracks_created += static_cast<int>(report.new_tracks.size());
      result.summary.tracks_removed += static_cast<int>(report.removed.size());
      for (int64_t id : report.removed) histories.erase(id);

      // Aim at live targets; fall back to MISSING tracks (predicted
      // positions) only when nothing is currently visible, so a stale
      // centered ghost can never outrank a real off-center target.
      auto to_candidates = [](const std::vector<const Track*>& tracks) {
        std::vector<AimCandidate> out;
        for (const Track* trk : tracks) {
          if (!is_targetable(trk->class_id)) continue;
          AimCandidate c;
          c.track_id = trk->track_id;
          c.cx = trk->kx.position();
          c.cy = trk->ky.position();
          c.w = trk->w;
          c.h = trk->h;
          if (!trk->hit_history.empty()) c.last_hit_t = trk->hit_history.back();
          out.push_back(c);
        }
        return out;
      };
      std::vector<AimCandidate> candidates = to_candidates(tracker.confirmed_active());
      if (candidates.empty()) candidates = to_candidates(tracker.confirmed_tracks());

      auto sel = select(candidates, config.selection, t);
      if (sel) {
        held_track = sel->track_id;
        selected_ids.insert(sel->track_id);
        held_x = sel->x_ret;
        held_y = sel->y_ret;
        if (config.control.use_prediction) {
          auto& [hx, hy] = history_for(sel->track_id);
          const AimPrediction pred =
              predict_aim(*sel, hx, hy, config.estimation.dt(), config.estimation.eps_acc,
                          config.estimation.eps_meas);
          held_x = pred.x_pred;
          held_y = pred.y_pred;
        }
        held_comp = 0;
        if (drop && sel->h_ret > 0) {
          const Track* trk = tracker.find(sel->track_id);
          const double h_real = config.real_heights_cm[trk ? trk->class_id : kRedArmor];
          const double dist = estimate_distance(cam, sel->h_ret, h_real);
          // outside the guard band the regressor is untrustworthy; hold fire
          // on compensation rather than apply an extrapolated correction
          if (!drop->is_extrapolating(dist))
            held_comp = drop_to_pitch(cam, drop->predict(dist));
        }
        have_aim = true;
      } else {
        have_aim = false;
        held_track = -1;
      }
    }

    GimbalCommand cmd;
    if (have_aim) {
      row.sel_track = held_track;
      row.x_pred = held_x;
      row.y_pred = held_y;
      cmd = aim_to_command(held_x, held_y, held_comp, cam, yaw_ctl, pitch_ctl, fir_x, fir_y,
                           held_x, held_y, scenario.tick_s);
    }
    row.d_yaw = cmd.d_yaw;
    row.d_pitch = cmd.d_pitch;

    // Engaged ground truth: the box nearest the aimed-at track, or the first
    // visible target when nothing is selected yet.
    const GtBox* engaged = nullptr;
    if (!gts.empty()) {
      const Track* trk = have_aim ? tracker.find(held_track) : nullptr;
      if (trk) {
        double best = std::numeric_limits<double>::infinity();
        for (const GtBox& g : gts) {
          const double d = std::hypot(g.px - trk->kx.position(), g.py - trk->ky.position());
          if (d < best) {
            best = d;
            engaged = &g;
          }
        }
      } else {
        engaged = &gts.front();
      }
    }
    if (engaged) {
      row.target_id = engaged->target_index;
      row.gt_x = engaged->px;
      row.gt_y = engaged->py;
      row.aim_err_px = std::hypot(engaged->px - cam.middle_x(), engaged->py - cam.middle_y());
      abs_err_sum += std::abs(row.aim_err_px);
      ++err_ticks;
      result.summary.final_aim_err_px = row.aim_err_px;
    }

    plant.step(cmd, scenario.tick_s, config.plant);
    row.plant_yaw = plant.yaw;
    row.plant_pitch = plant.pitch;
    result.log.push_back(row);
  }

  result.summary.ticks = n_ticks;
  result.summary.mean_abs_aim_err_px = err_ticks > 0 ? abs_err_sum / err_ticks : 0.0;
  result.summary.unique_selected_tracks = static_cast<int>(selected_ids.size());

  if (!truth_boxes.empty()) {
    EvalCounts total;
    std::set<int> classes;
    for (const auto& b : truth_boxes) classes.insert(b.class_id);
    for (const auto& b : pred_boxes) classes.insert(b.class_id);
    for (int cls : classes) {
      const EvalCounts c = count_detections(pred_boxes, truth_boxes, cls, 0.5);
      total.tp += c.tp;
      total.fp += c.fp;
      total.fn += c.fn;
    }
    result.summary.detector_precision = precision(total);
    result.summary.detector_recall = recall(total);
    result.summary.detector_map = mean_ap(pred_boxes, truth_boxes, 0.5).map;
  }
  return result;
}

std::string ticklog_csv(const std::vector<TickLog>& log) {
  std::string out = kTickLogHeader;
  out += "\n";
  for (const TickLog& r : log) {
    out += format_double(r.t);
    out += "," + std::to_string(r.target_id);
    out += "," + format_double(r.gt_x);
    out += "," + format_double(r.gt_y);
    out += "," + std::to_string(r.det_count);
    out += "," + std::to_string(r.sel_track);
    out += "," + format_double(r.x_pred);
    out += "," + format_double(r.y_pred);
    out += "," + format_double(r.d_yaw);
    out += "," + format_double(r.d_pitch);
    out += "," + format_double(r.plant_yaw);
    out += "," + format_double(r.plant_pitch);
    out += "," + format_double(r.aim_err_px);
    out += "\n";
  }
  return out;
}

void write_ticklog_csv(const std::string& path, const std::vector<TickLog>& log) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write tick log: " + path);
  out << ticklog_csv(log);
}

std::string summary_to_json(const SimSummary& s) {
  json j;
  j["ticks"] = s.ticks;
  j["mean_abs_aim_err_px"] = s.mean_abs_aim_err_px;
  j["final_aim_err_px"] = s.final_aim_err_px;
  j["unique_selected_tracks"] = s.unique_selected_tracks;
  j["tracks_created"] = s.tracks_created;
  j["tracks_removed"] = s.tracks_removed;
  if (s.detector_precision) j["detector_precision"] = *s.detector_precision;
  if (s.detector_recall) j["detector_recall"] = *s.detector_recall;
  if (s.detector_map) j["detector_map"] = *s.detector_map;
  return j.dump(2) + "\n";
}

}  // namespace autoaim
