#pragma once

#include "autoaim/geometry.hpp"

#include <optional>
#include <string>
#include <vector>

namespace autoaim {

/// One calibration measurement: range from the camera CMOS to the armor
/// plate, and the observed pellet drop below the aim point in pixels.
struct DropSample {
  double distance_cm = 0;
  double drop_px = 0;
};

enum class DropModelKind { Poly, Knn, Svr };

struct SvrConfig {
  double c = 100.0;      // box constraint
  double epsilon = 0.01; // insensitive tube half-width, standardized y units
  double gamma = 2.0;    // RBF width, standardized x units
  int max_passes = 400;
};

struct FitReport {
  double mse = 0;
  double rmse = 0;
  double mae = 0;
  std::optional<double> r2;  // undefined when the holdout has zero variance
};

/// A fitted distance -> drop regressor. Immutable once fitted; predictions
/// are deterministic.
class DropModel {
 public:
  /// Least-squares polynomial of the given degree over standardized
  /// distances. Throws on fewer than degree+1 samples or a rank-deficient
  /// design (too few distinct distances).
  static DropModel fit_poly(const std::vector<DropSample>& samples, int degree);

  /// Stores the training set; prediction averages the k nearest targets,
  /// including any neighbors tied with the k-th distance.
  static DropModel fit_knn(const std::vector<DropSample>& samples, int k);

  /// Epsilon-insensitive RBF support vector regression on standardized data.
  static DropModel fit_svr(const std::vector<DropSample>& samples, const SvrConfig& cfg = {});

  DropModelKind kind() const { return kind_; }

  double predict(double distance_cm) const;

  /// True when the query lies outside [0.5*min_train, 1.5*max_train]; the
  /// prediction is still returned, callers decide whether to trust it.
  bool is_extrapolating(double distance_cm) const;

  FitReport score(const std::vector<DropSample>& holdout) const;

  // Poly coefficients in standardized space, beta_0..beta_n.
  const std::vector<double>& poly_coefficients() const { return coeffs_; }

 private:
  DropModel() = default;

  DropModelKind kind_ = DropModelKind::Knn;
  double min_train_ = 0, max_train_ = 0;
  // standardization of x (all kinds) and of y (SVR)
  double x_mean_ = 0, x_std_ = 1;
  double y_mean_ = 0, y_std_ = 1;
  // Poly
  std::vector<double> coeffs_;
  // KNN / SVR training set
  std::vector<DropSample> samples_;
  int k_ = 3;
  // SVR duals (alpha_i - alpha_i*) and bias, standardized space
  std::vector<double> beta_;
  double bias_ = 0;
  double gamma_ = 2.0;
};

/// MSE, RMSE, MAE and R^2 = 1 - SSE/SST of predictions against truth.
/// R^2 is the undefined marker (nullopt) when SST == 0.
FitReport score_predictions(const std::vector<double>& truth,
                            const std::vector<double>& predicted);

/// Converts a predicted pixel drop into the gimbal pitch correction,
/// atan(drop_px / focal_px).
double drop_to_pitch(const CameraModel& cam, double drop_px);

/// CSV with header `distance_cm,drop_px`, one sample per line.
std::vector<DropSample> load_drop_csv(const std::string& path);
void save_drop_csv(const std::string& path, const std::vector<DropSample>& samples);

/// Deterministic 80/20 split by seeded shuffle.
void split_samples(const std::vector<DropSample>& samples, uint64_t seed,
                   std::vector<DropSample>& train, std::vector<DropSample>& holdout);

}  // namespace autoaim
