#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>

namespace autoaim {

// Class ids follow the 11-target layout used by the detector.
enum ClassId : int {
  kCyanArmor = 0,
  kRedArmor = 1,
  kBlueArmor = 2,
  kRedArmy = 3,
  kBlueArmy = 4,
  kRedEar = 5,
  kBlueEar = 6,
  kRedBase = 7,
  kBlueBase = 8,
  kDeadArmor = 9,
  kDeadArmy = 10,
};

inline constexpr int kNumClasses = 11;

bool valid_class(int class_id);
std::string_view class_name(int class_id);

// Armor plates are the only legal hit surface; ears and dead lights are not.
inline bool is_targetable(int class_id) {
  return class_id == kCyanArmor || class_id == kRedArmor || class_id == kBlueArmor;
}

enum class LedColor { Cyan, Red, Blue, Off };
LedColor class_color(int class_id);

// Axis-aligned box in image pixels, origin top-left, x1<x2 and y1<y2.
struct BBox {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
  double cx() const { return 0.5 * (x1 + x2); }
  double cy() const { return 0.5 * (y1 + y2); }
  bool valid() const {
    return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) &&
           std::isfinite(y2) && x1 < x2 && y1 < y2;
  }

  static BBox from_center(double cx, double cy, double w, double h) {
    return {cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2};
  }
};

// One detector output: timestamp, class, box, confidence in [0,1].
struct Detection {
  double t = 0;
  int class_id = 0;
  BBox bbox;
  double confidence = 1.0;

  bool valid() const {
    return std::isfinite(t) && valid_class(class_id) && bbox.valid() &&
           confidence >= 0.0 && confidence <= 1.0;
  }
};

// Pinhole model plus the camera-to-launcher mounting offset.
// focal_px is derived once from the horizontal FOV: (width/2)/tan(fov_h/2).
struct CameraModel {
  double width = 640;
  double height = 480;
  double fov_h_deg = 90.0;
  double focal_px = 320.0;
  double mount_offset_forward_cm = 10.0;
  double mount_offset_up_cm = 6.0;

  static CameraModel make(double width, double height, double fov_h_deg,
                          double mount_forward_cm = 10.0, double mount_up_cm = 6.0);

  double middle_x() const { return width / 2; }
  double middle_y() const { return height / 2; }
};

// Gimbal attitude in radians, each angle normalized to (-pi, pi].
struct Pose {
  double roll = 0, pitch = 0, yaw = 0;

  static Pose make(double roll, double pitch, double yaw);
};

struct Point3 {
  double x = 0, y = 0, z = 0;
};

double normalize_angle(double a);

/// Intersection over union of two valid boxes; symmetric, 0 when disjoint.
double iou(const BBox& a, const BBox& b);

/// Pinhole range estimate: focal_px * real_height_cm / pixel_height.
/// Throws std::domain_error for h_cnn <= 0 or real_height_cm <= 0.
double estimate_distance(const CameraModel& cam, double h_cnn_px, double real_height_cm);

// Elementary axis rotations; building blocks for both conventions below.
Eigen::Matrix3d rot_x(double a);
Eigen::Matrix3d rot_y(double a);
Eigen::Matrix3d rot_z(double a);

/// Intrinsic Z-Y-X composition: R = Rz(yaw) * Ry(pitch) * Rx(roll).
Eigen::Matrix3d rotation_matrix(const Pose& p);

/// Back-projects an image point (x_cnn, y_cnn measured from image center,
/// y up) at range D through the given rotation, then adds the mounting
/// offset in the world frame. Throws std::domain_error for D <= 0.
Point3 to_world(const CameraModel& cam, const Eigen::Matrix3d& rotation,
                double x_cnn, double y_cnn, double distance_cm);
Point3 to_world(const CameraModel& cam, const Pose& p,
                double x_cnn, double y_cnn, double distance_cm);

// Default physical target sizes per class, used for pinhole range math and
// for projecting simulated targets to pixel boxes. Calibration inputs.
std::array<double, kNumClasses> default_real_heights_cm();
std::array<double, kNumClasses> default_real_widths_cm();

}  // namespace autoaim
