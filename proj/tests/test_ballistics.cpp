#include "autoaim/ballistics.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <random>

using namespace autoaim;

namespace {

std::vector<DropSample> poly_samples(const std::vector<double>& coeffs, double lo, double hi,
                                     int n, double noise_sigma = 0, uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0, noise_sigma > 0 ? noise_sigma : 1);
  std::vector<DropSample> out;
  for (int i = 0; i < n; ++i) {
    const double x = lo + (hi - lo) * i / (n - 1);
    double y = 0, p = 1;
    for (double c : coeffs) {
      y += c * p;
      p *= x;
    }
    if (noise_sigma > 0) y += noise(rng);
    out.push_back({x, y});
  }
  return out;
}

}  // namespace

TEST_CASE("quartic fit recovers an exact quadratic") {
  const auto samples = poly_samples({0, 0, 2}, 50, 400, 9);  // y = 2x^2
  const DropModel m = DropModel::fit_poly(samples, 4);
  for (const auto& s : samples)
    CHECK(m.predict(s.distance_cm) == doctest::Approx(s.drop_px).epsilon(1e-8));
  const FitReport r = m.score(samples);
  CHECK(r.mse == doctest::Approx(0.0).scale(1));
  REQUIRE(r.r2.has_value());
  CHECK(*r.r2 == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("polynomial fit evaluates beta0 + beta1*x") {
  const auto samples = poly_samples({1, 1}, 1, 20, 6);  // y = 1 + x
  const DropModel m = DropModel::fit_poly(samples, 1);
  CHECK(m.predict(10.0) == doctest::Approx(11.0).epsilon(1e-9));
}

TEST_CASE("poly reproduces any lower-degree polynomial through enough points") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> coeff(-2, 2);
  for (int iter = 0; iter < 30; ++iter) {
    const std::vector<double> c{coeff(rng), coeff(rng), coeff(rng) * 1e-2, coeff(rng) * 1e-4};
    const auto samples = poly_samples(c, 60, 500, 12);
    const DropModel m = DropModel::fit_poly(samples, 4);
    for (double q : {75.0, 130.0, 260.0, 410.0}) {
      double want = 0, p = 1;
      for (double ci : c) {
        want += ci * p;
        p *= q;
      }
      CHECK(m.predict(q) == doctest::Approx(want).epsilon(1e-8));
    }
  }
}

TEST_CASE("poly fit rejects bad inputs") {
  CHECK_THROWS_AS(DropModel::fit_poly(poly_samples({1, 1}, 1, 10, 4), 4), std::invalid_argument);
  // six samples but only three distinct distances: rank-deficient quartic
  std::vector<DropSample> dup{{100, 1}, {100, 1.1}, {200, 2}, {200, 2.1}, {300, 3}, {300, 3.2}};
  CHECK_THROWS_AS(DropModel::fit_poly(dup, 4), std::invalid_argument);
  CHECK_THROWS_AS(DropModel::fit_poly({{100, 1}, {-5, 2}, {200, 1}, {300, 4}, {400, 2}}, 4),
                  std::invalid_argument);
}

TEST_CASE("knn averages the nearest targets") {
  const std::vector<DropSample> train{{100, 5}, {200, 9}};
  const DropModel m = DropModel::fit_knn(train, 2);
  CHECK(m.predict(150) == doctest::Approx(7.0));

  const DropModel m1 = DropModel::fit_knn(train, 1);
  CHECK(m1.predict(100) == doctest::Approx(5.0));
  CHECK(m1.predict(130) == doctest::Approx(5.0));
  CHECK(m1.predict(151) == doctest::Approx(9.0));
}

TEST_CASE("knn(1) is exact on its own training points") {
  const auto train = poly_samples({0, 0.1, 0.001}, 80, 600, 25);
  const DropModel m = DropModel::fit_knn(train, 1);
  const FitReport r = m.score(train);
  CHECK(r.mse == 0.0);
  CHECK(r.rmse == 0.0);
  CHECK(r.mae == 0.0);
  REQUIRE(r.r2.has_value());
  CHECK(*r.r2 == 1.0);
}

TEST_CASE("knn prediction is invariant under training permutations") {
  auto train = poly_samples({2, 0.05, 0.0008}, 50, 500, 40);
  train.push_back({275.0, 17.0});  // duplicate distance with the grid midpoint region
  const DropModel base = DropModel::fit_knn(train, 3);
  std::vector<double> queries{60.5, 111.0, 275.0, 333.3, 499.0};
  std::vector<double> want;
  for (double q : queries) want.push_back(base.predict(q));

  std::mt19937_64 rng(77);
  for (int iter = 0; iter < 20; ++iter) {
    std::shuffle(train.begin(), train.end(), rng);
    const DropModel m = DropModel::fit_knn(train, 3);
    for (std::size_t i = 0; i < queries.size(); ++i)
      CHECK(m.predict(queries[i]) == want[i]);  // bit-identical
  }
}

TEST_CASE("knn fit validation") {
  CHECK_THROWS_AS(DropModel::fit_knn({{100, 1}}, 2), std::invalid_argument);
  CHECK_THROWS_AS(DropModel::fit_knn({{100, 1}, {200, 2}}, 0), std::invalid_argument);
}

TEST_CASE("svr fits a smooth curve") {
  const auto samples = poly_samples({3, 0.02, 0.0005}, 80, 600, 60, 0.05, 5);
  std::vector<DropSample> train, holdout;
  split_samples(samples, 11, train, holdout);
  const DropModel m = DropModel::fit_svr(train);
  const FitReport r = m.score(holdout);
  REQUIRE(r.r2.has_value());
  CHECK(*r.r2 > 0.95);
  CHECK_THROWS_AS(DropModel::fit_svr({{100, 1}}), std::invalid_argument);
}

TEST_CASE("constant targets leave the variance undefined") {
  const std::vector<DropSample> flat{{100, 4}, {200, 4}, {300, 4}, {400, 4}, {500, 4}, {600, 4}};
  const DropModel m = DropModel::fit_poly(flat, 4);
  for (const auto& s : flat) CHECK(m.predict(s.distance_cm) == doctest::Approx(4.0));
  const FitReport r = m.score(flat);
  CHECK_FALSE(r.r2.has_value());  // SST == 0
}

TEST_CASE("score matches the hand-computed example") {
  const FitReport r = score_predictions({0, 2}, {1, 1});
  CHECK(r.mse == doctest::Approx(1.0));
  CHECK(r.rmse == doctest::Approx(1.0));
  CHECK(r.mae == doctest::Approx(1.0));
  REQUIRE(r.r2.has_value());
  CHECK(*r.r2 == doctest::Approx(0.0));
}

TEST_CASE("rmse is exactly the square root of mse") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> v(-30, 30);
  for (int iter = 0; iter < 100; ++iter) {
    std::vector<double> truth, pred;
    for (int i = 0; i < 17; ++i) {
      truth.push_back(v(rng));
      pred.push_back(v(rng));
    }
    const FitReport r = score_predictions(truth, pred);
    CHECK(r.rmse == std::sqrt(r.mse));
    CHECK(std::abs(r.rmse * r.rmse - r.mse) < 1e-12);
  }
}

TEST_CASE("r2 of the mean predictor is exactly zero, perfect predictor exactly one") {
  const std::vector<double> truth{1, 2, 3, 4, 6};
  double mean = 0;
  for (double t : truth) mean += t;
  mean /= static_cast<double>(truth.size());
  const FitReport r_mean = score_predictions(truth, std::vector<double>(truth.size(), mean));
  REQUIRE(r_mean.r2.has_value());
  CHECK(*r_mean.r2 == 0.0);
  const FitReport r_perfect = score_predictions(truth, truth);
  REQUIRE(r_perfect.r2.has_value());
  CHECK(*r_perfect.r2 == 1.0);
}

TEST_CASE("extrapolation guard band") {
  const DropModel m = DropModel::fit_knn({{100, 1}, {150, 2}, {200, 3}}, 1);
  CHECK_FALSE(m.is_extrapolating(100));
  CHECK_FALSE(m.is_extrapolating(50));
  CHECK_FALSE(m.is_extrapolating(300));
  CHECK(m.is_extrapolating(49));
  CHECK(m.is_extrapolating(301));
}

TEST_CASE("drop to pitch conversion") {
  const CameraModel cam = CameraModel::make(640, 480, 90.0);
  CHECK(drop_to_pitch(cam, 0) == 0.0);
  CHECK(drop_to_pitch(cam, cam.focal_px) == doctest::Approx(M_PI / 4));
  CHECK(drop_to_pitch(cam, 32) == doctest::Approx(0.09966865249116204).epsilon(1e-12));
}

TEST_CASE("drop csv round trip and validation") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "autoaim_ballistics_test";
  fs::create_directories(dir);
  const std::string path = (dir / "drops.csv").string();

  const auto samples = poly_samples({1, 0.05, 0.0002}, 90, 560, 12);
  save_drop_csv(path, samples);
  const auto loaded = load_drop_csv(path);
  REQUIRE(loaded.size() == samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    CHECK(loaded[i].distance_cm == doctest::Approx(samples[i].distance_cm).epsilon(1e-8));
    CHECK(loaded[i].drop_px == doctest::Approx(samples[i].drop_px).epsilon(1e-8));
  }

  const std::string bad_header = (dir / "bad_header.csv").string();
  {
    std::FILE* f = std::fopen(bad_header.c_str(), "w");
    std::fputs("range,drop\n100,1\n", f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(load_drop_csv(bad_header), std::invalid_argument);

  const std::string bad_row = (dir / "bad_row.csv").string();
  {
    std::FILE* f = std::fopen(bad_row.c_str(), "w");
    std::fputs("distance_cm,drop_px\n100,1\nnot-a-number,2\n", f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(load_drop_csv(bad_row), std::invalid_argument);
  CHECK_THROWS_AS(load_drop_csv((dir / "missing.csv").string()), std::invalid_argument);
}

TEST_CASE("seeded split is deterministic and sized 80/20") {
  const auto samples = poly_samples({0, 1}, 10, 200, 20);
  std::vector<DropSample> train1, hold1, train2, hold2;
  split_samples(samples, 42, train1, hold1);
  split_samples(samples, 42, train2, hold2);
  CHECK(hold1.size() == 4);
  CHECK(train1.size() == 16);
  REQUIRE(hold1.size() == hold2.size());
  for (std::size_t i = 0; i < hold1.size(); ++i)
    CHECK(hold1[i].distance_cm == hold2[i].distance_cm);
}
