#pragma once

#include "autoaim/geometry.hpp"

#include <vector>

namespace autoaim {

/// Finite impulse response filter: y[n] = sum_{k=0..N} h[k] * x[n-k].
/// Inherently stable; the delay line starts zero-filled.
class FirFilter {
 public:
  explicit FirFilter(std::vector<double> coefficients);

  /// Identity filter (h = [1]), for A/B comparisons.
  static FirFilter identity() { return FirFilter({1.0}); }

  double step(double x);
  void reset();

  const std::vector<double>& coefficients() const { return h_; }
  int order() const { return static_cast<int>(h_.size()) - 1; }

 private:
  std::vector<double> h_;
  std::vector<double> delay_;  // delay_[k] = x[n-k]
};

/// Hamming-windowed sinc low-pass with N+1 symmetric taps normalized to unit
/// DC gain. cutoff is in cycles/sample, (0, 0.5). N must be even and >= 2.
FirFilter design_lowpass(int order, double cutoff);

struct PidConfig {
  double kp = 2.0;
  double ki = 6.0;
  double kd = 0.05;
  double kf = 0.5;
  double rate_limit = 4.0;             // output units per second
  double enhancement_threshold = 0.05; // |second difference of F| gate
};

/// Incremental PID with feedforward enhancement:
///   du = Kp*(e-e1) + Ki*e*dt + Kd*(e-2*e1+e2)/dt + Kf*(F-2*F1+F2)/dt
/// where the feedforward term only fires when the second difference of F
/// exceeds the enhancement threshold. du is clamped to +-rate_limit*dt.
class PidFfController {
 public:
  explicit PidFfController(const PidConfig& cfg = {});

  /// Returns the output increment for this tick. Throws std::invalid_argument
  /// if dt <= 0.
  double step(double setpoint, double measured, double feedforward, double dt);

  void reset();

  double output() const { return output_; }          // accumulated command
  double integral() const { return integral_; }      // clamped error integral
  const PidConfig& config() const { return cfg_; }

 private:
  PidConfig cfg_;
  double prev_error_ = 0, prev_error2_ = 0;
  double prev_ff_ = 0, prev_ff2_ = 0;
  double integral_ = 0;
  double output_ = 0;
  bool primed_ = false;  // first step has no history; differences start at 0
};

/// Rate-limited yaw/pitch increments for one control tick, radians.
struct GimbalCommand {
  double d_yaw = 0;
  double d_pitch = 0;
};

/// One per-tick control step: FIR-filters each normalized axis error, adds
/// the ballistic pitch compensation (converted into normalized image units
/// through the camera model) to the pitch setpoint, and runs the incremental
/// PID per axis. Feedforward inputs are the predicted target offsets.
GimbalCommand aim_to_command(double x_err, double y_err, double pitch_comp_rad,
                             const CameraModel& cam, PidFfController& yaw_ctl,
                             PidFfController& pitch_ctl, FirFilter& fir_x,
                             FirFilter& fir_y, double ff_x, double ff_y, double dt);

}  // namespace autoaim
