#include "autoaim/kalman.hpp"

#include <cmath>
#include <stdexcept>

namespace autoaim {

KalmanParams KalmanParams::make(double dt, double u, double std_acc, double std_meas,
                                double std_acc_floor, double std_meas_floor) {
  if (!(dt > 0) || !std::isfinite(dt)) throw std::invalid_argument("KalmanParams: dt must be > 0");
  if (!std::isfinite(u)) throw std::invalid_argument("KalmanParams: u must be finite");
  KalmanParams p;
  p.dt = dt;
  p.u = u;
  p.std_acc = std::max(std_acc, std_acc_floor);
  p.std_meas = std::max(std_meas, std_meas_floor);
  return p;
}

KalmanFilter1D::KalmanFilter1D(const KalmanParams& params) : params_(params) {
  const double dt = params.dt;
  f_ << 1, dt, 0, 1;
  b_ << dt * dt / 2, dt;
  const double sa2 = params.std_acc * params.std_acc;
  q_ << std::pow(dt, 4) / 4 * sa2, std::pow(dt, 3) / 2 * sa2,
      std::pow(dt, 3) / 2 * sa2, dt * dt * sa2;
  r_ = params.std_meas * params.std_meas;
  x_.setZero();
  p_.setIdentity();
}

void KalmanFilter1D::predict(double u) {
  x_ = f_ * x_ + b_ * u;
  p_ = f_ * p_ * f_.transpose() + q_;
  p_ = ((p_ + p_.transpose()) / 2).eval();  // guard symmetry drift
}

void KalmanFilter1D::update(double z) {
  if (!std::isfinite(z)) throw std::invalid_argument("KalmanFilter1D::update: non-finite measurement");
  const double y = z - x_(0);                 // innovation, H = [1 0]
  const double s = r_ + p_(0, 0);             // innovation covariance
  const Eigen::Vector2d k = p_.col(0) / s;    // P*H'/S
  x_ += k * y;
  Eigen::Matrix2d ikh = Eigen::Matrix2d::Identity();
  ikh(0, 0) -= k(0);
  ikh(1, 0) -= k(1);
  p_ = ikh * p_;
  p_ = ((p_ + p_.transpose()) / 2).eval();
}

void KalmanFilter1D::set_state(double position, double velocity) {
  x_ << position, velocity;
}

MeasurementHistory::MeasurementHistory(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ < 3) throw std::invalid_argument("MeasurementHistory: capacity must be >= 3");
  values_.reserve(capacity_);
}

void MeasurementHistory::push(double value) {
  if (values_.size() < capacity_) {
    values_.push_back(value);
  } else {
    values_[head_] = value;
    head_ = (head_ + 1) % capacity_;
  }
}

void MeasurementHistory::clear() {
  values_.clear();
  head_ = 0;
}

std::vector<double> MeasurementHistory::values() const {
  std::vector<double> out;
  out.reserve(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i)
    out.push_back(values_[(head_ + i) % values_.size()]);
  return out;
}

double mean(const std::vector<double>& xs) {
  double s = 0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

double population_std(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  const double m = mean(xs);
  double s = 0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(xs.size()));
}

std::vector<double> first_differences(const std::vector<double>& xs) {
  std::vector<double> out;
  if (xs.size() < 2) return out;
  out.reserve(xs.size() - 1);
  for (std::size_t i = 1; i < xs.size(); ++i) out.push_back(xs[i] - xs[i - 1]);
  return out;
}

std::vector<double> second_differences(const std::vector<double>& xs) {
  return first_differences(first_differences(xs));
}

SelfTunedParams kalman_replay(const std::vector<double>& measurements, double dt,
                              double std_acc_floor, double std_meas_floor) {
  if (measurements.size() < 3)
    throw std::invalid_argument("kalman_replay: need at least 3 measurements");
  const double u = mean(first_differences(measurements)) / dt;
  const double std_acc = population_std(second_differences(measurements)) / (dt * dt);
  const double std_meas = population_std(measurements);

  SelfTunedParams out;
  out.params = KalmanParams::make(dt, u, std_acc, std_meas, std_acc_floor, std_meas_floor);
  KalmanFilter1D kf(out.params);
  for (double m : measurements) kf.process(m);
  out.prediction = kf.position();
  return out;
}

AimPrediction kalman_at_filter(const MeasurementHistory& hx, const MeasurementHistory& hy,
                               double dt, double std_acc_floor, double std_meas_floor) {
  return {kalman_replay(hx.values(), dt, std_acc_floor, std_meas_floor).prediction,
          kalman_replay(hy.values(), dt, std_acc_floor, std_meas_floor).prediction};
}

}  // namespace autoaim
