#include "autoaim/geometry.hpp"

#include <algorithm>
#include <stdexcept>

namespace autoaim {

namespace {
constexpr std::string_view kClassNames[kNumClasses] = {
    "CyanArmor", "RedArmor", "BlueArmor", "RedArmy",   "BlueArmy", "RedEar",
    "BlueEar",   "RedBase",  "BlueBase",  "DeadArmor", "DeadArmy"};
}

bool valid_class(int class_id) { return class_id >= 0 && class_id < kNumClasses; }

std::string_view class_name(int class_id) {
  if (!valid_class(class_id)) throw std::out_of_range("class_id out of range");
  return kClassNames[class_id];
}

LedColor class_color(int class_id) {
  switch (class_id) {
    case kCyanArmor:
      return LedColor::Cyan;
    case kRedArmor:
    case kRedArmy:
    case kRedEar:
    case kRedBase:
      return LedColor::Red;
    case kBlueArmor:
    case kBlueArmy:
    case kBlueEar:
    case kBlueBase:
      return LedColor::Blue;
    default:
      return LedColor::Off;
  }
}

CameraModel CameraModel::make(double width, double height, double fov_h_deg,
                              double mount_forward_cm, double mount_up_cm) {
  if (!(width > 0) || !(height > 0)) throw std::invalid_argument("camera size must be positive");
  if (!(fov_h_deg > 0) || !(fov_h_deg < 180)) throw std::invalid_argument("fov_h_deg out of (0,180)");
  CameraModel cam;
  cam.width = width;
  cam.height = height;
  cam.fov_h_deg = fov_h_deg;
  cam.focal_px = (width / 2.0) / std::tan(fov_h_deg * M_PI / 180.0 / 2.0);
  cam.mount_offset_forward_cm = mount_forward_cm;
  cam.mount_offset_up_cm = mount_up_cm;
  return cam;
}

double normalize_angle(double a) {
  a = std::fmod(a, 2 * M_PI);
  if (a <= -M_PI) a += 2 * M_PI;
  if (a > M_PI) a -= 2 * M_PI;
  return a;
}

Pose Pose::make(double roll, double pitch, double yaw) {
  if (!std::isfinite(roll) || !std::isfinite(pitch) || !std::isfinite(yaw))
    throw std::invalid_argument("pose angles must be finite");
  return Pose{normalize_angle(roll), normalize_angle(pitch), normalize_angle(yaw)};
}

double iou(const BBox& a, const BBox& b) {
  const double ix = std::max(0.0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
  const double iy = std::max(0.0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  return uni > 0 ? inter / uni : 0.0;
}

double estimate_distance(const CameraModel& cam, double h_cnn_px, double real_height_cm) {
  if (!(h_cnn_px > 0)) throw std::domain_error("estimate_distance: pixel height must be > 0");
  if (!(real_height_cm > 0)) throw std::domain_error("estimate_distance: real height must be > 0");
  return cam.focal_px * real_height_cm / h_cnn_px;
}

Eigen::Matrix3d rot_x(double a) {
  Eigen::Matrix3d m;
  m << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
  return m;
}

Eigen::Matrix3d rot_y(double a) {
  Eigen::Matrix3d m;
  m << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
  return m;
}

Eigen::Matrix3d rot_z(double a) {
  Eigen::Matrix3d m;
  m << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return m;
}

Eigen::Matrix3d rotation_matrix(const Pose& p) {
  return rot_z(p.yaw) * rot_y(p.pitch) * rot_x(p.roll);
}

Point3 to_world(const CameraModel& cam, const Eigen::Matrix3d& rotation,
                double x_cnn, double y_cnn, double distance_cm) {
  if (!(distance_cm > 0)) throw std::domain_error("to_world: distance must be > 0");
  const Eigen::Vector3d p_camera(x_cnn * distance_cm / cam.focal_px,
                                 y_cnn * distance_cm / cam.focal_px, distance_cm);
  const Eigen::Vector3d p_world = rotation * p_camera;
  return {p_world.x(), p_world.y() + cam.mount_offset_up_cm,
          p_world.z() + cam.mount_offset_forward_cm};
}

Point3 to_world(const CameraModel& cam, const Pose& p, double x_cnn, double y_cnn,
                double distance_cm) {
  return to_world(cam, rotation_matrix(p), x_cnn, y_cnn, distance_cm);
}

std::array<double, kNumClasses> default_real_heights_cm() {
  return {6.0, 6.0, 6.0, 30.0, 30.0, 5.0, 5.0, 25.0, 25.0, 6.0, 30.0};
}

std::array<double, kNumClasses> default_real_widths_cm() {
  return {12.0, 12.0, 12.0, 40.0, 40.0, 5.0, 5.0, 50.0, 50.0, 12.0, 40.0};
}

}  // namespace autoaim
