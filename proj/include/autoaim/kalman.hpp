#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace autoaim {

// Floors applied to the self-tuned noise parameters: an exactly linear or
// constant measurement history has zero empirical std, which would make Q or
// R singular.
inline constexpr double kStdAccFloor = 1e-3;
inline constexpr double kStdMeasFloor = 1e-3;

struct KalmanParams {
  double dt = 1.0 / 120.0;
  double u = 0.0;        // control acceleration proxy
  double std_acc = 1.0;  // acceleration standard deviation
  double std_meas = 1.0; // measurement standard deviation

  static KalmanParams make(double dt, double u, double std_acc, double std_meas,
                           double std_acc_floor = kStdAccFloor,
                           double std_meas_floor = kStdMeasFloor);
};

/// Two-state (position, velocity) recursive estimator.
///
/// Matrix set: F=[[1,dt],[0,1]], B=[dt^2/2, dt], H=[1,0],
/// Q=[[dt^4/4, dt^3/2],[dt^3/2, dt^2]]*std_acc^2, R=std_meas^2,
/// with X=(0,0) and P=I at construction.
class KalmanFilter1D {
 public:
  explicit KalmanFilter1D(const KalmanParams& params);

  /// X <- F*X + B*u; P <- F*P*F' + Q.
  void predict(double u);
  void predict() { predict(params_.u); }

  /// y = z - H*X; S = R + H*P*H'; K = P*H'/S; X <- X + K*y; P <- (I-K*H)*P.
  /// Throws std::invalid_argument on non-finite z.
  void update(double z);

  /// One predict+update cycle; returns the filtered position.
  double process(double z) {
    predict();
    update(z);
    return position();
  }

  double position() const { return x_(0); }
  double velocity() const { return x_(1); }
  const Eigen::Vector2d& state() const { return x_; }
  const Eigen::Matrix2d& covariance() const { return p_; }
  const KalmanParams& params() const { return params_; }

  // Seeds the state without touching P; a tracker initializes a new track at
  // its first detection rather than at the origin.
  void set_state(double position, double velocity);

 private:
  KalmanParams params_;
  Eigen::Matrix2d f_, q_;
  Eigen::Vector2d b_;
  double r_;
  Eigen::Vector2d x_;
  Eigen::Matrix2d p_;
};

/// Fixed-capacity ring buffer of recent scalar measurements, oldest first.
class MeasurementHistory {
 public:
  explicit MeasurementHistory(std::size_t capacity = 30);

  void push(double value);
  void clear();
  std::size_t size() const { return values_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return values_.empty(); }
  double back() const { return values_.back(); }

  /// Measurements in arrival order.
  std::vector<double> values() const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // index of the oldest element once full
  std::vector<double> values_;
};

double mean(const std::vector<double>& xs);
/// Population standard deviation (divides by n).
double population_std(const std::vector<double>& xs);
std::vector<double> first_differences(const std::vector<double>& xs);
std::vector<double> second_differences(const std::vector<double>& xs);

struct AimPrediction {
  double x_pred = 0;
  double y_pred = 0;
};

struct SelfTunedParams {
  KalmanParams params;
  double prediction = 0;  // final filtered position after replaying the history
};

/// Estimates (u, std_acc, std_meas) from one measurement history, rebuilds a
/// fresh filter with them and replays the whole buffer through
/// predict/update. Throws std::invalid_argument with fewer than 3 samples.
SelfTunedParams kalman_replay(const std::vector<double>& measurements, double dt,
                              double std_acc_floor = kStdAccFloor,
                              double std_meas_floor = kStdMeasFloor);

/// Per-axis kalman_replay over the two histories; returns the final filtered
/// positions as the aim prediction.
AimPrediction kalman_at_filter(const MeasurementHistory& hx, const MeasurementHistory& hy,
                               double dt, double std_acc_floor = kStdAccFloor,
                               double std_meas_floor = kStdMeasFloor);

}  // namespace autoaim
