#include "autoaim/ballistics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace autoaim {

namespace {

void validate_samples(const std::vector<DropSample>& samples) {
  for (const auto& s : samples) {
    if (!(s.distance_cm > 0) || !std::isfinite(s.distance_cm) || !std::isfinite(s.drop_px))
      throw std::invalid_argument("drop sample: distance must be > 0 and values finite");
  }
}

std::pair<double, double> mean_std(const std::vector<double>& xs) {
  double m = 0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  double v = 0;
  for (double x : xs) v += (x - m) * (x - m);
  const double sd = std::sqrt(v / static_cast<double>(xs.size()));
  return {m, sd > 0 ? sd : 1.0};
}

double rbf(double a, double b, double gamma) {
  const double d = a - b;
  return std::exp(-gamma * d * d);
}

}  // namespace

DropModel DropModel::fit_poly(const std::vector<DropSample>& samples, int degree) {
  if (degree < 1) throw std::invalid_argument("fit_poly: degree must be >= 1");
  if (samples.size() < static_cast<std::size_t>(degree) + 1)
    throw std::invalid_argument("fit_poly: need at least degree+1 samples");
  validate_samples(samples);

  DropModel m;
  m.kind_ = DropModelKind::Poly;
  std::vector<double> xs, ys;
  for (const auto& s : samples) {
    xs.push_back(s.distance_cm);
    ys.push_back(s.drop_px);
  }
  std::tie(m.x_mean_, m.x_std_) = mean_std(xs);
  m.min_train_ = *std::min_element(xs.begin(), xs.end());
  m.max_train_ = *std::max_element(xs.begin(), xs.end());

  const int n = static_cast<int>(samples.size());
  Eigen::MatrixXd design(n, degree + 1);
  Eigen::VectorXd target(n);
  for (int i = 0; i < n; ++i) {
    const double z = (xs[i] - m.x_mean_) / m.x_std_;
    double p = 1;
    for (int d = 0; d <= degree; ++d) {
      design(i, d) = p;
      p *= z;
    }
    target(i) = ys[i];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < degree + 1)
    throw std::invalid_argument("fit_poly: rank-deficient design matrix (collinear distances)");
  const Eigen::VectorXd beta = qr.solve(target);
  m.coeffs_.assign(beta.data(), beta.data() + beta.size());
  return m;
}

DropModel DropModel::fit_knn(const std::vector<DropSample>& samples, int k) {
  if (k < 1) throw std::invalid_argument("fit_knn: k must be >= 1");
  if (samples.size() < static_cast<std::size_t>(k))
    throw std::invalid_argument("fit_knn: need at least k samples");
  validate_samples(samples);

  DropModel m;
  m.kind_ = DropModelKind::Knn;
  m.samples_ = samples;
  m.k_ = k;
  auto [lo, hi] = std::minmax_element(samples.begin(), samples.end(),
                                      [](const DropSample& a, const DropSample& b) {
                                        return a.distance_cm < b.distance_cm;
                                      });
  m.min_train_ = lo->distance_cm;
  m.max_train_ = hi->distance_cm;
  return m;
}

DropModel DropModel::fit_svr(const std::vector<DropSample>& samples, const SvrConfig& cfg) {
  if (samples.size() < 2) throw std::invalid_argument("fit_svr: need at least 2 samples");
  validate_samples(samples);

  DropModel m;
  m.kind_ = DropModelKind::Svr;
  m.samples_ = samples;
  m.gamma_ = cfg.gamma;

  const int n = static_cast<int>(samples.size());
  std::vector<double> xs(n), ys(n);
  for (int i = 0; i < n; ++i) {
    xs[i] = samples[i].distance_cm;
    ys[i] = samples[i].drop_px;
  }
  std::tie(m.x_mean_, m.x_std_) = mean_std(xs);
  std::tie(m.y_mean_, m.y_std_) = mean_std(ys);
  m.min_train_ = *std::min_element(xs.begin(), xs.end());
  m.max_train_ = *std::max_element(xs.begin(), xs.end());

  std::vector<double> zx(n), zy(n);
  for (int i = 0; i < n; ++i) {
    zx[i] = (xs[i] - m.x_mean_) / m.x_std_;
    zy[i] = (ys[i] - m.y_mean_) / m.y_std_;
  }

  // Dual coordinate descent on beta_i = alpha_i - alpha_i^* with the bias
  // absorbed into an augmented kernel K+1, which drops the sum(beta)=0
  // equality constraint. Small ridge keeps the quadratic strictly convex.
  Eigen::MatrixXd kmat(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) kmat(i, j) = rbf(zx[i], zx[j], cfg.gamma) + 1.0;
  constexpr double kRidge = 1e-8;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n);  // f_i = sum_j K~(i,j) beta_j
  for (int pass = 0; pass < cfg.max_passes; ++pass) {
    double max_change = 0;
    for (int i = 0; i < n; ++i) {
      const double a = kmat(i, i) + kRidge;
      const double g = f(i) - kmat(i, i) * beta(i) - zy[i];  // gradient at beta_i = 0
      double next;
      if (g > cfg.epsilon) {
        next = -(g - cfg.epsilon) / a;
      } else if (g < -cfg.epsilon) {
        next = -(g + cfg.epsilon) / a;
      } else {
        next = 0;
      }
      next = std::clamp(next, -cfg.c, cfg.c);
      const double delta = next - beta(i);
      if (delta != 0) {
        f += kmat.col(i) * delta;
        beta(i) = next;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    if (max_change < 1e-10) break;
  }
  m.beta_.assign(beta.data(), beta.data() + beta.size());
  m.bias_ = std::accumulate(m.beta_.begin(), m.beta_.end(), 0.0);
  return m;
}

double DropModel::predict(double distance_cm) const {
  if (!(distance_cm > 0) || !std::isfinite(distance_cm))
    throw std::domain_error("DropModel::predict: distance must be > 0 and finite");
  switch (kind_) {
    case DropModelKind::Poly: {
      const double z = (distance_cm - x_mean_) / x_std_;
      double acc = 0;
      for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * z + *it;
      return acc;
    }
    case DropModelKind::Knn: {
      // Canonical (distance, drop) order keeps the prediction bit-identical
      // under any permutation of the training set, ties included.
      std::vector<std::pair<double, double>> ranked;
      ranked.reserve(samples_.size());
      for (const auto& s : samples_)
        ranked.emplace_back(std::abs(s.distance_cm - distance_cm), s.drop_px);
      std::sort(ranked.begin(), ranked.end());
      const double kth = ranked[k_ - 1].first;
      double sum = 0;
      int count = 0;
      for (const auto& [d, drop] : ranked) {
        if (d > kth) break;
        sum += drop;
        ++count;
      }
      return sum / count;
    }
    case DropModelKind::Svr: {
      const double z = (distance_cm - x_mean_) / x_std_;
      double acc = 0;
      for (std::size_t i = 0; i < samples_.size(); ++i) {
        const double zi = (samples_[i].distance_cm - x_mean_) / x_std_;
        acc += beta_[i] * (rbf(zi, z, gamma_) + 1.0);
      }
      return acc * y_std_ + y_mean_;
    }
  }
  return 0;
}

bool DropModel::is_extrapolating(double distance_cm) const {
  return distance_cm < 0.5 * min_train_ || distance_cm > 1.5 * max_train_;
}

FitReport DropModel::score(const std::vector<DropSample>& holdout) const {
  if (holdout.empty()) throw std::invalid_argument("score: holdout must be non-empty");
  std::vector<double> truth, pred;
  for (const auto& s : holdout) {
    truth.push_back(s.drop_px);
    pred.push_back(predict(s.distance_cm));
  }
  return score_predictions(truth, pred);
}

FitReport score_predictions(const std::vector<double>& truth,
                            const std::vector<double>& predicted) {
  if (truth.empty() || truth.size() != predicted.size())
    throw std::invalid_argument("score_predictions: size mismatch or empty input");
  const double n = static_cast<double>(truth.size());
  double sse = 0, abs_sum = 0, ybar = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double e = truth[i] - predicted[i];
    sse += e * e;
    abs_sum += std::abs(e);
    ybar += truth[i];
  }
  ybar /= n;
  double sst = 0;
  for (double y : truth) sst += (y - ybar) * (y - ybar);

  FitReport r;
  r.mse = sse / n;
  r.rmse = std::sqrt(r.mse);
  r.mae = abs_sum / n;
  if (sst > 0) r.r2 = 1.0 - sse / sst;
  return r;
}

double drop_to_pitch(const CameraModel& cam, double drop_px) {
  return std::atan(drop_px / cam.focal_px);
}

std::vector<DropSample> load_drop_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open drop data file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("empty drop data file: " + path);
  auto strip = [](std::string s) {
    s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }),
            s.end());
    return s;
  };
  if (strip(line) != "distance_cm,drop_px")
    throw std::invalid_argument("drop data file must start with header 'distance_cm,drop_px'");

  std::vector<DropSample> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (strip(line).empty()) continue;
    std::istringstream ss(line);
    DropSample s;
    char comma = 0;
    if (!(ss >> s.distance_cm >> comma >> s.drop_px) || comma != ',')
      throw std::invalid_argument("malformed drop sample at line " + std::to_string(line_no));
    out.push_back(s);
  }
  validate_samples(out);
  return out;
}

void save_drop_csv(const std::string& path, const std::vector<DropSample>& samples) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write drop data file: " + path);
  out << "distance_cm,drop_px\n";
  char buf[64];
  for (const auto& s : samples) {
    std::snprintf(buf, sizeof buf, "%.9g,%.9g\n", s.distance_cm, s.drop_px);
    out << buf;
  }
}

void split_samples(const std::vector<DropSample>& samples, uint64_t seed,
                   std::vector<DropSample>& train, std::vector<DropSample>& holdout) {
  if (samples.size() < 2)
    throw std::invalid_argument("split_samples: need at least 2 samples");
  std::vector<DropSample> shuffled = samples;
  std::mt19937_64 rng(seed);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const std::size_t n_holdout = std::max<std::size_t>(1, shuffled.size() / 5);
  holdout.assign(shuffled.end() - n_holdout, shuffled.end());
  train.assign(shuffled.begin(), shuffled.end() - n_holdout);
}

}  // namespace autoaim
