#include "autoaim/kalman.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace autoaim;

TEST_CASE("predict hand step") {
  KalmanFilter1D kf(KalmanParams::make(0.1, 0, 0, 1));  // std_acc floored, Q ~ 1e-6 scale
  kf.set_state(1.0, 2.0);
  kf.predict(0.0);
  CHECK(std::abs(kf.position() - 1.2) < 1e-12);
  CHECK(std::abs(kf.velocity() - 2.0) < 1e-12);
  // P = F*F' + Q with P0 = I; the floored Q adds at most ~1e-8
  const Eigen::Matrix2d p = kf.covariance();
  CHECK(p(0, 0) == doctest::Approx(1.01).epsilon(1e-7));
  CHECK(p(0, 1) == doctest::Approx(0.1).epsilon(1e-7));
  CHECK(p(1, 0) == doctest::Approx(0.1).epsilon(1e-7));
  CHECK(p(1, 1) == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("predict with zero velocity and zero input keeps position") {
  KalmanFilter1D kf(KalmanParams::make(0.1, 0, 1, 1));
  kf.set_state(5.0, 0.0);
  kf.predict(0.0);
  CHECK(kf.position() == doctest::Approx(5.0));
}

TEST_CASE("update hand step") {
  KalmanFilter1D kf(KalmanParams::make(0.1, 0, 1, 1));  // R = 1, X = 0, P = I
  kf.update(1.0);
  CHECK(std::abs(kf.position() - 0.5) < 1e-12);
  CHECK(std::abs(kf.velocity() - 0.0) < 1e-12);
  const Eigen::Matrix2d p = kf.covariance();
  CHECK(std::abs(p(0, 0) - 0.5) < 1e-12);
  CHECK(std::abs(p(0, 1) - 0.0) < 1e-12);
  CHECK(std::abs(p(1, 0) - 0.0) < 1e-12);
  CHECK(std::abs(p(1, 1) - 1.0) < 1e-12);
}

TEST_CASE("zero innovation leaves the state exactly unchanged") {
  KalmanFilter1D kf(KalmanParams::make(0.05, 0, 2, 3));
  kf.set_state(4.25, -1.5);
  kf.predict(0.0);
  const double pos = kf.position();
  const double vel = kf.velocity();
  kf.update(pos);  // z == H*X
  CHECK(kf.position() == pos);
  CHECK(kf.velocity() == vel);
}

TEST_CASE("huge measurement noise means no trust in the measurement") {
  KalmanFilter1D kf(KalmanParams::make(0.1, 0, 1, 1e9));
  kf.set_state(2.0, 0.0);
  kf.predict(0.0);
  kf.update(1000.0);
  CHECK(kf.position() == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("update rejects non-finite measurements") {
  KalmanFilter1D kf(KalmanParams::make(0.1, 0, 1, 1));
  CHECK_THROWS_AS(kf.update(std::numeric_limits<double>::quiet_NaN()), std::invalid_argument);
  CHECK_THROWS_AS(kf.update(std::numeric_limits<double>::infinity()), std::invalid_argument);
}

TEST_CASE("covariance stays symmetric positive semidefinite under random cycling") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> z(-50, 50);
  std::uniform_real_distribution<double> u(-5, 5);
  KalmanFilter1D kf(KalmanParams::make(0.02, 0, 3, 1.5));
  for (int i = 0; i < 10000; ++i) {
    kf.predict(u(rng));
    kf.update(z(rng));
    const Eigen::Matrix2d p = kf.covariance();
    CHECK((p - p.transpose()).cwiseAbs().maxCoeff() < 1e-10);
    // 2x2 eigenvalues via trace/determinant
    const double tr = p.trace();
    const double det = p.determinant();
    const double disc = std::sqrt(std::max(0.0, tr * tr / 4 - det));
    CHECK(tr / 2 - disc >= -1e-10);
  }
}

TEST_CASE("position gain stays in [0,1] for scalar measurements") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> z(-100, 100);
  KalmanFilter1D kf(KalmanParams::make(0.05, 0, 2, 2));
  for (int i = 0; i < 2000; ++i) {
    kf.predict(0.0);
    const double before = kf.position();
    const double meas = z(rng);
    if (meas == before) continue;
    kf.update(meas);
    const double gain = (kf.position() - before) / (meas - before);
    CHECK(gain >= 0.0);
    CHECK(gain <= 1.0);
  }
}

TEST_CASE("noiseless constant velocity converges below 1e-6") {
  const double dt = 0.1;
  KalmanFilter1D kf(KalmanParams::make(dt, 0, 0, 0));  // both stds floored
  double err = 1;
  for (int k = 0; k <= 50; ++k) {
    const double truth = 1.0 + 2.0 * k * dt;
    kf.process(truth);
    err = std::abs(kf.position() - truth);
  }
  CHECK(err < 1e-6);
}

TEST_CASE("filtering reduces RMSE on a noisy constant-velocity track") {
  const double dt = 0.1, sigma = 3.0;
  std::mt19937_64 rng(31);
  std::normal_distribution<double> noise(0.0, sigma);
  KalmanFilter1D kf(KalmanParams::make(dt, 0, 1e-3, sigma));
  double se_raw = 0, se_filt = 0;
  for (int k = 0; k < 500; ++k) {
    const double truth = 1.5 * k * dt;
    const double z = truth + noise(rng);
    kf.process(z);
    se_raw += (z - truth) * (z - truth);
    se_filt += (kf.position() - truth) * (kf.position() - truth);
  }
  CHECK(se_filt < se_raw);
}

TEST_CASE("measurement history ring buffer") {
  MeasurementHistory h(4);
  CHECK_THROWS_AS(MeasurementHistory(2), std::invalid_argument);
  for (double v : {1.0, 2.0, 3.0}) h.push(v);
  CHECK(h.values() == std::vector<double>{1, 2, 3});
  h.push(4);
  h.push(5);  // evicts 1
  CHECK(h.values() == std::vector<double>{2, 3, 4, 5});
  CHECK(h.size() == 4);
  h.clear();
  CHECK(h.empty());
}

TEST_CASE("kalman_replay parameter estimation") {
  const SelfTunedParams tuned = kalman_replay({0, 1, 2, 3}, 0.1);
  CHECK(tuned.params.u == doctest::Approx(10.0).epsilon(1e-12));
  // exactly linear history: second differences vanish, floor kicks in
  CHECK(tuned.params.std_acc == kStdAccFloor);
  CHECK(tuned.params.std_meas == doctest::Approx(std::sqrt(1.25)));
  CHECK_THROWS_AS(kalman_replay({1, 2}, 0.1), std::invalid_argument);
}

TEST_CASE("kalman_at_filter tracks a stationary target") {
  for (double c : {0.0, 2.5, -1.0}) {
    MeasurementHistory hx(30), hy(30);
    for (int i = 0; i < 4; ++i) {
      hx.push(c);
      hy.push(-c);
    }
    const AimPrediction p = kalman_at_filter(hx, hy, 0.1);
    CHECK(std::abs(p.x_pred - c) < 5e-6);
    CHECK(std::abs(p.y_pred + c) < 5e-6);
  }
}

TEST_CASE("kalman_at_filter requires three samples per axis") {
  MeasurementHistory hx(8), hy(8);
  hx.push(1);
  hx.push(2);
  hy.push(1);
  hy.push(2);
  CHECK_THROWS_AS(kalman_at_filter(hx, hy, 0.1), std::invalid_argument);
}
