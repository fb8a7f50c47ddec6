#include "autoaim/config.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace autoaim {

using nlohmann::json;

namespace {

void expect_keys(const json& j, std::initializer_list<const char*> allowed, const char* ctx) {
  if (!j.is_object()) throw std::invalid_argument(std::string(ctx) + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        known = true;
        break;
      }
    if (!known)
      throw std::invalid_argument("unknown key '" + it.key() + "' in " + ctx);
  }
}

template <typename T>
void get_to(const json& j, const char* key, T& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}

void parse_class_array(const json& j, const char* key, std::array<double, kNumClasses>& out) {
  if (!j.contains(key)) return;
  const auto& arr = j.at(key);
  if (!arr.is_array() || arr.size() != kNumClasses)
    throw std::invalid_argument(std::string(key) + " must be an array of " +
                                std::to_string(kNumClasses) + " values");
  for (int i = 0; i < kNumClasses; ++i) {
    out[i] = arr[i].get<double>();
    if (!(out[i] > 0)) throw std::invalid_argument(std::string(key) + " entries must be > 0");
  }
}

void validate(const PipelineConfig& c) {
  if (!(c.tracker.dt > 0)) throw std::invalid_argument("tracker.dt must be > 0");
  if (c.tracker.lambda < 0) throw std::invalid_argument("tracker.lambda must be >= 0");
  if (c.tracker.iou_gate < 0 || c.tracker.iou_gate > 1)
    throw std::invalid_argument("tracker.iou_gate must lie in [0,1]");
  if (c.tracker.max_age < 1) throw std::invalid_argument("tracker.max_age must be >= 1");
  if (c.tracker.confirm_hits < 1) throw std::invalid_argument("tracker.confirm_hits must be >= 1");
  if (c.estimation.history_capacity < 3)
    throw std::invalid_argument("estimation.history_capacity must be >= 3");
  if (!(c.estimation.dt() > 0))
    throw std::invalid_argument("detector_period_s + tracker_period_s must be > 0");
  if (!(c.estimation.eps_acc > 0) || !(c.estimation.eps_meas > 0))
    throw std::invalid_argument("estimation noise floors must be > 0");
  if (!(c.selection.k_dis + c.selection.k_area > 0))
    throw std::invalid_argument("selection.k_dis + k_area must be > 0");
  if (c.ballistics.model != "poly4" && c.ballistics.model != "poly5" &&
      c.ballistics.model != "knn" && c.ballistics.model != "svr")
    throw std::invalid_argument("ballistics.model must be one of poly4|poly5|knn|svr");
  if (c.ballistics.knn_k < 1) throw std::invalid_argument("ballistics.knn_k must be >= 1");
  if (c.control.use_fir && (c.control.fir_order < 2 || c.control.fir_order % 2 != 0))
    throw std::invalid_argument("control.fir_order must be even and >= 2");
  if (c.control.use_fir && !(c.control.fir_cutoff > 0 && c.control.fir_cutoff < 0.5))
    throw std::invalid_argument("control.fir_cutoff must lie in (0, 0.5)");
  if (!(c.control.pid.rate_limit > 0))
    throw std::invalid_argument("control.rate_limit must be > 0");
  if (!(c.plant.time_constant_s > 0) || !(c.plant.max_slew_rad_s > 0))
    throw std::invalid_argument("plant parameters must be > 0");
}

}  // namespace

PipelineConfig parse_config_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config parse error: ") + e.what());
  }
  expect_keys(j,
              {"camera", "real_heights_cm", "real_widths_cm", "tracker", "estimation",
               "selection", "ballistics", "control", "plant"},
              "config");

  PipelineConfig c;
  if (j.contains("camera")) {
    const auto& jc = j.at("camera");
    expect_keys(jc, {"width", "height", "fov_h_deg", "mount_offset_forward_cm",
                     "mount_offset_up_cm"},
                "camera");
    double width = 640, height = 480, fov = 90, fwd = 10, up = 6;
    get_to(jc, "width", width);
    get_to(jc, "height", height);
    get_to(jc, "fov_h_deg", fov);
    get_to(jc, "mount_offset_forward_cm", fwd);
    get_to(jc, "mount_offset_up_cm", up);
    c.camera = CameraModel::make(width, height, fov, fwd, up);
  }
  parse_class_array(j, "real_heights_cm", c.real_heights_cm);
  parse_class_array(j, "real_widths_cm", c.real_widths_cm);

  if (j.contains("tracker")) {
    const auto& jt = j.at("tracker");
    expect_keys(jt, {"dt", "lambda", "iou_gate", "max_age", "confirm_hits", "std_acc", "std_meas"},
                "tracker");
    get_to(jt, "dt", c.tracker.dt);
    get_to(jt, "lambda", c.tracker.lambda);
    get_to(jt, "iou_gate", c.tracker.iou_gate);
    get_to(jt, "max_age", c.tracker.max_age);
    get_to(jt, "confirm_hits", c.tracker.confirm_hits);
    get_to(jt, "std_acc", c.tracker.std_acc);
    get_to(jt, "std_meas", c.tracker.std_meas);
  }
  if (j.contains("estimation")) {
    const auto& je = j.at("estimation");
    expect_keys(je, {"history_capacity", "detector_period_s", "tracker_period_s", "eps_acc",
                     "eps_meas"},
                "estimation");
    get_to(je, "history_capacity", c.estimation.history_capacity);
    get_to(je, "detector_period_s", c.estimation.detector_period_s);
    get_to(je, "tracker_period_s", c.estimation.tracker_period_s);
    get_to(je, "eps_acc", c.estimation.eps_acc);
    get_to(je, "eps_meas", c.estimation.eps_meas);
  }
  if (j.contains("selection")) {
    const auto& js = j.at("selection");
    expect_keys(js, {"k_dis", "k_area", "hit_bonus", "hit_window_s"}, "selection");
    get_to(js, "k_dis", c.selection.k_dis);
    get_to(js, "k_area", c.selection.k_area);
    get_to(js, "hit_bonus", c.selection.hit_bonus);
    get_to(js, "hit_window_s", c.selection.hit_window_s);
  }
  if (j.contains("ballistics")) {
    const auto& jb = j.at("ballistics");
    expect_keys(jb, {"model", "knn_k", "svr", "data_csv"}, "ballistics");
    get_to(jb, "model", c.ballistics.model);
    get_to(jb, "knn_k", c.ballistics.knn_k);
    get_to(jb, "data_csv", c.ballistics.data_csv);
    if (jb.contains("svr")) {
      const auto& js = jb.at("svr");
      expect_keys(js, {"c", "epsilon", "gamma", "max_passes"}, "ballistics.svr");
      get_to(js, "c", c.ballistics.svr.c);
      get_to(js, "epsilon", c.ballistics.svr.epsilon);
      get_to(js, "gamma", c.ballistics.svr.gamma);
      get_to(js, "max_passes", c.ballistics.svr.max_passes);
    }
  }
  if (j.contains("control")) {
    const auto& jc = j.at("control");
    expect_keys(jc,
                {"kp", "ki", "kd", "kf", "rate_limit", "enhancement_threshold", "fir_order",
                 "fir_cutoff", "use_fir", "use_prediction"},
                "control");
    get_to(jc, "kp", c.control.pid.kp);
    get_to(jc, "ki", c.control.pid.ki);
    get_to(jc, "kd", c.control.pid.kd);
    get_to(jc, "kf", c.control.pid.kf);
    get_to(jc, "rate_limit", c.control.pid.rate_limit);
    get_to(jc, "enhancement_threshold", c.control.pid.enhancement_threshold);
    get_to(jc, "fir_order", c.control.fir_order);
    get_to(jc, "fir_cutoff", c.control.fir_cutoff);
    get_to(jc, "use_fir", c.control.use_fir);
    get_to(jc, "use_prediction", c.control.use_prediction);
  }
  if (j.contains("plant")) {
    const auto& jp = j.at("plant");
    expect_keys(jp, {"time_constant_s", "max_slew_rad_s"}, "plant");
    get_to(jp, "time_constant_s", c.plant.time_constant_s);
    get_to(jp, "max_slew_rad_s", c.plant.max_slew_rad_s);
  }

  // Image-center weights and the ego-motion pixel scale always follow the
  // camera geometry.
  c.selection.middle_x = c.camera.middle_x();
  c.selection.middle_y = c.camera.middle_y();
  c.tracker.focal_px = c.camera.focal_px;
  validate(c);
  return c;
}

DropModel fit_drop_model(const BallisticsConfig& cfg, const std::vector<DropSample>& samples) {
  if (cfg.model == "poly4") return DropModel::fit_poly(samples, 4);
  if (cfg.model == "poly5") return DropModel::fit_poly(samples, 5);
  if (cfg.model == "knn") return DropModel::fit_knn(samples, cfg.knn_k);
  if (cfg.model == "svr") return DropModel::fit_svr(samples, cfg.svr);
  throw std::invalid_argument("unknown ballistics model: " + cfg.model);
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_json(ss.str());
}

std::string config_to_json(const PipelineConfig& c) {
  json j;
  j["camera"] = {{"width", c.camera.width},
                 {"height", c.camera.height},
                 {"fov_h_deg", c.camera.fov_h_deg},
                 {"mount_offset_forward_cm", c.camera.mount_offset_forward_cm},
                 {"mount_offset_up_cm", c.camera.mount_offset_up_cm}};
  j["real_heights_cm"] = c.real_heights_cm;
  j["real_widths_cm"] = c.real_widths_cm;
  j["tracker"] = {{"dt", c.tracker.dt},           {"lambda", c.tracker.lambda},
                  {"iou_gate", c.tracker.iou_gate}, {"max_age", c.tracker.max_age},
                  {"confirm_hits", c.tracker.confirm_hits}, {"std_acc", c.tracker.std_acc},
                  {"std_meas", c.tracker.std_meas}};
  j["estimation"] = {{"history_capacity", c.estimation.history_capacity},
                     {"detector_period_s", c.estimation.detector_period_s},
                     {"tracker_period_s", c.estimation.tracker_period_s},
                     {"eps_acc", c.estimation.eps_acc},
                     {"eps_meas", c.estimation.eps_meas}};
  j["selection"] = {{"k_dis", c.selection.k_dis},
                    {"k_area", c.selection.k_area},
                    {"hit_bonus", c.selection.hit_bonus},
                    {"hit_window_s", c.selection.hit_window_s}};
  j["ballistics"] = {{"model", c.ballistics.model},
                     {"knn_k", c.ballistics.knn_k},
                     {"svr",
                      {{"c", c.ballistics.svr.c},
                       {"epsilon", c.ballistics.svr.epsilon},
                       {"gamma", c.ballistics.svr.gamma},
                       {"max_passes", c.ballistics.svr.max_passes}}},
                     {"data_csv", c.ballistics.data_csv}};
  j["control"] = {{"kp", c.control.pid.kp},
                  {"ki", c.control.pid.ki},
                  {"kd", c.control.pid.kd},
                  {"kf", c.control.pid.kf},
                  {"rate_limit", c.control.pid.rate_limit},
                  {"enhancement_threshold", c.control.pid.enhancement_threshold},
                  {"fir_order", c.control.fir_order},
                  {"fir_cutoff", c.control.fir_cutoff},
                  {"use_fir", c.control.use_fir},
                  {"use_prediction", c.control.use_prediction}};
  j["plant"] = {{"time_constant_s", c.plant.time_constant_s},
                {"max_slew_rad_s", c.plant.max_slew_rad_s}};
  return j.dump(2) + "\n";
}

void save_config(const std::string& path, const PipelineConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config file: " + path);
  out << config_to_json(cfg);
}

}  // namespace autoaim
