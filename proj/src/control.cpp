#include "autoaim/control.hpp"

#include <cmath>
#include <stdexcept>

namespace autoaim {

FirFilter::FirFilter(std::vector<double> coefficients) : h_(std::move(coefficients)) {
  if (h_.empty()) throw std::invalid_argument("FirFilter: need at least one coefficient");
  for (double c : h_)
    if (!std::isfinite(c)) throw std::invalid_argument("FirFilter: non-finite coefficient");
  delay_.assign(h_.size(), 0.0);
}

double FirFilter::step(double x) {
  for (std::size_t k = delay_.size() - 1; k > 0; --k) delay_[k] = delay_[k - 1];
  delay_[0] = x;
  double y = 0;
  for (std::size_t k = 0; k < h_.size(); ++k) y += h_[k] * delay_[k];
  return y;
}

void FirFilter::reset() { delay_.assign(h_.size(), 0.0); }

namespace {
double sinc(double t) { return t == 0 ? 1.0 : std::sin(M_PI * t) / (M_PI * t); }
}  // namespace

FirFilter design_lowpass(int order, double cutoff) {
  if (order < 2 || order % 2 != 0)
    throw std::invalid_argument("design_lowpass: order must be even and >= 2");
  if (!(cutoff > 0) || !(cutoff < 0.5))
    throw std::invalid_argument("design_lowpass: cutoff must lie in (0, 0.5)");

  std::vector<double> h(order + 1, 0.0);
  // Compute one half and mirror so symmetry is exact.
  for (int k = 0; k <= order / 2; ++k) {
    const double window = 0.54 - 0.46 * std::cos(2.0 * M_PI * k / order);
    const double value = window * sinc(2.0 * cutoff * (k - order / 2.0));
    h[k] = value;
    h[order - k] = value;
  }
  double sum = 0;
  for (double c : h) sum += c;
  for (double& c : h) c /= sum;
  return FirFilter(std::move(h));
}

PidFfController::PidFfController(const PidConfig& cfg) : cfg_(cfg) {}

void PidFfController::reset() {
  prev_error_ = prev_error2_ = 0;
  prev_ff_ = prev_ff2_ = 0;
  integral_ = 0;
  output_ = 0;
  primed_ = false;
}

double PidFfController::step(double setpoint, double measured, double feedforward, double dt) {
  if (!(dt > 0)) throw std::invalid_argument("PidFfController::step: dt must be > 0");
  const double e = setpoint - measured;

  // Seed the feedforward history on the first step so a constant F never
  // produces a spurious startup kick.
  if (!primed_) {
    prev_ff_ = prev_ff2_ = feedforward;
    primed_ = true;
  }

  // Velocity-form integral through a clamped accumulator: the contribution is
  // Ki*(I_new - I_old), which equals Ki*e*dt away from the windup bound.
  const double bound = cfg_.rate_limit / std::max(cfg_.ki, 1e-9);
  const double new_integral = std::clamp(integral_ + e * dt, -bound, bound);
  const double ki_term = cfg_.ki * (new_integral - integral_);
  integral_ = new_integral;

  const double ff_diff2 = feedforward - 2 * prev_ff_ + prev_ff2_;
  const double ff_term =
      std::abs(ff_diff2) > cfg_.enhancement_threshold ? cfg_.kf * ff_diff2 / dt : 0.0;

  double du = cfg_.kp * (e - prev_error_) + ki_term +
              cfg_.kd * (e - 2 * prev_error_ + prev_error2_) / dt + ff_term;
  du = std::clamp(du, -cfg_.rate_limit * dt, cfg_.rate_limit * dt);

  prev_error2_ = prev_error_;
  prev_error_ = e;
  prev_ff2_ = prev_ff_;
  prev_ff_ = feedforward;
  output_ += du;
  return du;
}

GimbalCommand aim_to_command(double x_err, double y_err, double pitch_comp_rad,
                             const CameraModel& cam, PidFfController& yaw_ctl,
                             PidFfController& pitch_ctl, FirFilter& fir_x,
                             FirFilter& fir_y, double ff_x, double ff_y, double dt) {
  const double ex = fir_x.step(x_err);
  const double ey = fir_y.step(y_err);
  // Pixel drop at this range maps to tan(pitch)*focal pixels, normalized the
  // same way as y_ret.
  const double comp_norm = std::tan(pitch_comp_rad) * cam.focal_px / cam.middle_y();
  GimbalCommand cmd;
  cmd.d_yaw = yaw_ctl.step(ex, 0.0, ff_x, dt);
  cmd.d_pitch = pitch_ctl.step(ey + comp_norm, 0.0, ff_y, dt);
  return cmd;
}

}  // namespace autoaim
