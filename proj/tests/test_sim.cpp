#include "autoaim/sim.hpp"

#include "autoaim/ballistics.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>

using namespace autoaim;

namespace {

Scenario single_target_scenario() {
  Scenario s;
  s.duration_s = 4.0;
  s.tick_s = 1.0 / 120.0;
  s.seed = 3;
  TargetSpec tgt;
  tgt.class_id = kRedArmor;
  tgt.path.kind = PathKind::ConstantVelocity;
  tgt.path.start_m = {0.3, 0.0, 3.0};
  tgt.path.velocity_m_s = {0, 0, 0};
  s.targets.push_back(tgt);
  s.noise = NoiseSpec{0, 0, 0, 0};
  return s;
}

}  // namespace

TEST_CASE("zero-duration scenario yields an empty log") {
  Scenario s = single_target_scenario();
  s.duration_s = 0;
  const SimResult r = run_simulation(s, PipelineConfig{});
  CHECK(r.log.empty());
  CHECK(r.summary.ticks == 0);
}

TEST_CASE("stationary off-center target is centered by the loop") {
  Scenario s = single_target_scenario();
  s.duration_s = 6.0;
  const SimResult r = run_simulation(s, PipelineConfig{});
  REQUIRE_FALSE(r.log.empty());
  // starts roughly 33 px off boresight
  CHECK(r.log.front().aim_err_px > 20.0);
  CHECK(r.summary.final_aim_err_px < 1.0);
  // settled and stayed: every tick of the last second inside 1 px
  for (std::size_t i = r.log.size() - 120; i < r.log.size(); ++i)
    CHECK(r.log[i].aim_err_px < 1.0);
}

TEST_CASE("same seed and config give byte-identical logs") {
  const Scenario s = [] {
    Scenario sc = single_target_scenario();
    sc.noise = NoiseSpec{1.0, 0.5, 0.05, 0.2};
    sc.targets[0].path.velocity_m_s = {0.4, 0, 0};
    return sc;
  }();
  const SimResult a = run_simulation(s, PipelineConfig{});
  const SimResult b = run_simulation(s, PipelineConfig{});
  CHECK(ticklog_csv(a.log) == ticklog_csv(b.log));

  Scenario other = s;
  other.seed = 99;
  const SimResult c = run_simulation(other, PipelineConfig{});
  CHECK(ticklog_csv(a.log) != ticklog_csv(c.log));
}

TEST_CASE("plant never exceeds its slew limit") {
  Scenario s = single_target_scenario();
  s.targets[0].path.kind = PathKind::SinusoidalStrafe;
  s.targets[0].path.center_m = {0, 0, 2.5};
  s.targets[0].path.amplitude_m = 1.0;
  s.targets[0].path.freq_hz = 0.8;
  const PipelineConfig cfg;
  const SimResult r = run_simulation(s, cfg);
  const double limit = cfg.plant.max_slew_rad_s * s.tick_s + 1e-12;
  for (std::size_t i = 1; i < r.log.size(); ++i) {
    CHECK(std::abs(r.log[i].plant_yaw - r.log[i - 1].plant_yaw) <= limit);
    CHECK(std::abs(r.log[i].plant_pitch - r.log[i - 1].plant_pitch) <= limit);
  }
}

TEST_CASE("kalman prediction beats raw aiming on a strafing target") {
  Scenario s = single_target_scenario();
  s.duration_s = 6.0;
  s.targets[0].path.kind = PathKind::SinusoidalStrafe;
  s.targets[0].path.center_m = {0, 0, 2.0};
  s.targets[0].path.amplitude_m = 0.8;
  s.targets[0].path.freq_hz = 0.4;
  s.noise = NoiseSpec{1.0, 0.5, 0.02, 0.05};
  s.seed = 21;

  PipelineConfig with_pred;
  with_pred.estimation.detector_period_s = 1.0 / 40.0;  // detector slower than the loop
  with_pred.control.use_prediction = true;
  PipelineConfig without_pred = with_pred;
  without_pred.control.use_prediction = false;

  const SimResult a = run_simulation(s, with_pred);
  const SimResult b = run_simulation(s, without_pred);
  CHECK(a.summary.mean_abs_aim_err_px < b.summary.mean_abs_aim_err_px);
}

TEST_CASE("short occlusion keeps the identity, long occlusion removes the track") {
  Scenario s = single_target_scenario();
  s.duration_s = 8.0;
  s.targets[0].path.velocity_m_s = {0.03, 0, 0};
  s.targets[0].path.start_m = {-0.05, 0, 1.2};
  s.targets[0].occlusions = {{3.0, 5.0}};  // 2 s = 240 frames
  s.noise = NoiseSpec{0.5, 0.3, 0.0, 0.0};

  SUBCASE("occlusion shorter than max_age") {
    PipelineConfig cfg;
    cfg.tracker.max_age = 300;
    const SimResult r = run_simulation(s, cfg);
    CHECK(r.summary.unique_selected_tracks == 1);
    CHECK(r.summary.tracks_removed == 0);
    // selection resumes after the gap
    bool resumed = false;
    for (const TickLog& row : r.log)
      if (row.t > 5.2 && row.sel_track >= 0) resumed = true;
    CHECK(resumed);
  }

  SUBCASE("occlusion beyond max_age removes the track") {
    PipelineConfig cfg;
    cfg.tracker.max_age = 120;  // 1 s at 120 Hz, occlusion lasts 2 s
    const SimResult r = run_simulation(s, cfg);
    CHECK(r.summary.tracks_removed >= 1);
    CHECK(r.summary.unique_selected_tracks == 2);  // a fresh id after reappearing
  }
}

TEST_CASE("drop compensation pitches the aim above the target") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "autoaim_sim_test";
  fs::create_directories(dir);
  const std::string csv = (dir / "drops.csv").string();
  std::vector<DropSample> drops;
  for (int i = 0; i < 40; ++i) {
    const double d = 60 + i * 10;
    drops.push_back({d, 2.0 + 0.05 * d});  // pellet falls more with range
  }
  save_drop_csv(csv, drops);

  Scenario s = single_target_scenario();
  s.duration_s = 5.0;
  PipelineConfig flat;
  PipelineConfig compensated;
  compensated.ballistics.data_csv = csv;
  compensated.ballistics.model = "knn";

  const SimResult without = run_simulation(s, flat);
  const SimResult with = run_simulation(s, compensated);
  // with compensation the barrel points above the optical line to the target
  CHECK(with.log.back().plant_pitch > without.log.back().plant_pitch + 0.01);
}

TEST_CASE("detector metrics appear in the summary") {
  Scenario s = single_target_scenario();
  s.noise = NoiseSpec{1.0, 0.5, 0.1, 0.5};
  const SimResult r = run_simulation(s, PipelineConfig{});
  REQUIRE(r.summary.detector_precision.has_value());
  REQUIRE(r.summary.detector_recall.has_value());
  REQUIRE(r.summary.detector_map.has_value());
  CHECK(*r.summary.detector_precision < 1.0);  // false positives present
  CHECK(*r.summary.detector_recall > 0.8);
  CHECK(*r.summary.detector_map > 0.5);
}

TEST_CASE("ticklog csv has the documented header and shape") {
  Scenario s = single_target_scenario();
  s.duration_s = 0.1;
  const SimResult r = run_simulation(s, PipelineConfig{});
  const std::string csv = ticklog_csv(r.log);
  CHECK(csv.rfind("t,target_id,gt_x,gt_y,det_count,sel_track,x_pred,y_pred,d_yaw,d_pitch,"
                  "plant_yaw,plant_pitch,aim_err_px\n", 0) == 0);
  std::size_t lines = 0;
  for (char ch : csv) lines += ch == '\n';
  CHECK(lines == r.log.size() + 1);
}

TEST_CASE("scenario json round trip") {
  Scenario s = single_target_scenario();
  s.targets[0].occlusions = {{1.0, 2.0}};
  TargetSpec way;
  way.class_id = kBlueArmor;
  way.path.kind = PathKind::Waypoints;
  way.path.waypoints = {{0.0, {0, 0, 3}}, {2.0, {1, 0, 3}}, {4.0, {1, 1, 4}}};
  s.targets.push_back(way);
  TargetSpec strafe;
  strafe.path.kind = PathKind::SinusoidalStrafe;
  strafe.path.axis = 2;
  s.targets.push_back(strafe);

  const Scenario parsed = parse_scenario_json(scenario_to_json(s));
  CHECK(parsed.duration_s == s.duration_s);
  CHECK(parsed.tick_s == s.tick_s);
  CHECK(parsed.seed == s.seed);
  REQUIRE(parsed.targets.size() == 3);
  CHECK(parsed.targets[0].occlusions == s.targets[0].occlusions);
  CHECK(parsed.targets[1].path.kind == PathKind::Waypoints);
  CHECK(parsed.targets[1].path.waypoints.size() == 3);
  CHECK(parsed.targets[2].path.axis == 2);
}

TEST_CASE("scenario validation rejects bad inputs") {
  CHECK_THROWS_AS(parse_scenario_json("{\"tick_s\": 0}"), std::invalid_argument);
  CHECK_THROWS_AS(parse_scenario_json("{\"noise\": {\"miss_prob\": 1.5}}"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_scenario_json("{\"targets\": [{\"class_id\": 42}]}"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_scenario_json("{\"targets\": [{\"path\": {\"kind\": \"warp\"}}]}"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_scenario_json("not json"), std::invalid_argument);
  CHECK_THROWS_AS(
      parse_scenario_json("{\"targets\": [{\"occlusions\": [[2.0, 1.0]]}]}"),
      std::invalid_argument);
}

TEST_CASE("spawn, despawn and occlusion windows") {
  TargetSpec tgt;
  tgt.spawn_s = 1.0;
  tgt.despawn_s = 4.0;
  tgt.occlusions = {{2.0, 2.5}, {3.0, 3.25}};
  CHECK_FALSE(tgt.alive_at(0.5, 10.0));
  CHECK(tgt.alive_at(1.0, 10.0));
  CHECK(tgt.alive_at(3.9, 10.0));
  CHECK_FALSE(tgt.alive_at(4.0, 10.0));
  CHECK_FALSE(tgt.occluded_at(1.9));
  CHECK(tgt.occluded_at(2.0));
  CHECK(tgt.occluded_at(2.49));
  CHECK_FALSE(tgt.occluded_at(2.5));
  CHECK(tgt.occluded_at(3.1));

  TargetSpec forever;  // despawn -1 lives to scenario end
  CHECK(forever.alive_at(9.99, 10.0));
  CHECK_FALSE(forever.alive_at(10.0, 10.0));

  Scenario s = single_target_scenario();
  s.duration_s = 2.0;
  s.targets[0].despawn_s = 1.0;
  const SimResult r = run_simulation(s, PipelineConfig{});
  bool seen_late_detection = false;
  for (const TickLog& row : r.log)
    if (row.t > 1.05 && row.det_count > 0) seen_late_detection = true;
  CHECK_FALSE(seen_late_detection);
}

TEST_CASE("waypoint paths interpolate linearly") {
  PathSpec p;
  p.kind = PathKind::Waypoints;
  p.waypoints = {{0.0, {0, 0, 2}}, {2.0, {4, 0, 2}}, {3.0, {4, 2, 2}}};
  CHECK(p.position_at(-1).x == doctest::Approx(0.0));
  CHECK(p.position_at(1.0).x == doctest::Approx(2.0));
  CHECK(p.position_at(2.5).y == doctest::Approx(1.0));
  CHECK(p.position_at(9.0).y == doctest::Approx(2.0));
}

TEST_CASE("config json round trip and validation") {
  PipelineConfig cfg;
  cfg.tracker.max_age = 77;
  cfg.control.pid.kp = 3.25;
  cfg.ballistics.model = "poly5";
  const PipelineConfig parsed = parse_config_json(config_to_json(cfg));
  CHECK(parsed.tracker.max_age == 77);
  CHECK(parsed.control.pid.kp == 3.25);
  CHECK(parsed.ballistics.model == "poly5");
  CHECK(parsed.selection.middle_x == parsed.camera.middle_x());

  CHECK_THROWS_AS(parse_config_json("{\"tracker\": {\"bogus\": 1}}"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_json("{\"tracker\": {\"dt\": -1}}"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_json("{\"ballistics\": {\"model\": \"magic\"}}"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_config_json("{\"control\": {\"fir_order\": 7}}"), std::invalid_argument);
}
