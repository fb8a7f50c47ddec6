#include "autoaim/config.hpp"
#include "autoaim/io.hpp"
#include "autoaim/selection.hpp"
#include "autoaim/sim.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

namespace fs = std::filesystem;
using namespace autoaim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

PipelineConfig load_config_or_default(const std::string& path) {
  return path.empty() ? PipelineConfig{} : load_config(path);
}

const char* status_name(TrackStatus s) {
  switch (s) {
    case TrackStatus::Active: return "ACTIVE";
    case TrackStatus::Missing: return "MISSING";
    case TrackStatus::Removed: return "REMOVED";
  }
  return "?";
}

int run_track(const std::string& input, const std::string& config_path,
              const std::string& out_dir) {
  const PipelineConfig cfg = load_config_or_default(config_path);
  const auto frames = group_by_frame(read_detections_jsonl(input));
  fs::create_directories(out_dir);

  std::ofstream tracks_csv(fs::path(out_dir) / "tracks.csv");
  std::ofstream sel_csv(fs::path(out_dir) / "selection.csv");
  if (!tracks_csv || !sel_csv) throw std::runtime_error("cannot write outputs in " + out_dir);
  tracks_csv << "t,track_id,class_id,cx,cy,w,h,status,age,time_since_update\n";
  sel_csv << "t,sel_track,x_ret,y_ret,x_pred,y_pred\n";

  Tracker tracker(cfg.tracker);
  std::map<int64_t, std::pair<MeasurementHistory, MeasurementHistory>> histories;
  char buf[256];
  for (const auto& frame : frames) {
    const double t = frame.front().t;
    const TrackerReport report = tracker.step(frame, t);
    for (int64_t id : report.removed) histories.erase(id);

    for (const auto& trk : tracker.tracks()) {
      std::snprintf(buf, sizeof buf, "%.9g,%lld,%d,%.9g,%.9g,%.9g,%.9g,%s,%d,%d\n", t,
                    static_cast<long long>(trk->track_id), trk->class_id, trk->kx.position(),
                    trk->ky.position(), trk->w, trk->h, status_name(trk->status), trk->age,
                    trk->time_since_update);
      tracks_csv << buf;
    }

    std::vector<AimCandidate> candidates;
    for (const Track* trk : tracker.confirmed_tracks()) {
      if (!is_targetable(trk->class_id)) continue;
      AimCandidate c{trk->track_id, trk->kx.position(), trk->ky.position(), trk->w, trk->h, {}};
      if (!trk->hit_history.empty()) c.last_hit_t = trk->hit_history.back();
      candidates.push_back(c);
    }
    if (auto sel = select(candidates, cfg.selection, t)) {
      auto it = histories.find(sel->track_id);
      if (it == histories.end())
        it = histories
                 .emplace(sel->track_id,
                          std::make_pair(MeasurementHistory(cfg.estimation.history_capacity),
                                         MeasurementHistory(cfg.estimation.history_capacity)))
                 .first;
      const AimPrediction pred =
          predict_aim(*sel, it->second.first, it->second.second, cfg.estimation.dt(),
                      cfg.estimation.eps_acc, cfg.estimation.eps_meas);
      std::snprintf(buf, sizeof buf, "%.9g,%lld,%.9g,%.9g,%.9g,%.9g\n", t,
                    static_cast<long long>(sel->track_id), sel->x_ret, sel->y_ret, pred.x_pred,
                    pred.y_pred);
      sel_csv << buf;
    }
  }
  std::cout << "processed " << frames.size() << " frames -> " << out_dir << "\n";
  return kExitOk;
}

int run_simulate(const std::string& scenario_path, const std::string& config_path,
                 long long seed_override, const std::string& out_dir) {
  const PipelineConfig cfg = load_config_or_default(config_path);
  Scenario scenario = load_scenario(scenario_path);
  if (seed_override >= 0) scenario.seed = static_cast<uint64_t>(seed_override);

  const SimResult result = run_simulation(scenario, cfg);
  fs::create_directories(out_dir);
  write_ticklog_csv((fs::path(out_dir) / "ticklog.csv").string(), result.log);
  std::ofstream summary(fs::path(out_dir) / "summary.json");
  summary << summary_to_json(result.summary);
  std::cout << summary_to_json(result.summary);
  return kExitOk;
}

int run_fit(const std::string& data_path, const std::string& model_name,
            const std::string& report_path, uint64_t seed) {
  const std::vector<DropSample> samples = load_drop_csv(data_path);
  std::vector<DropSample> train, holdout;
  split_samples(samples, seed, train, holdout);

  BallisticsConfig bc;
  bc.model = model_name;
  const DropModel model = fit_drop_model(bc, train);
  const FitReport train_report = model.score(train);
  const FitReport holdout_report = model.score(holdout);

  std::ofstream report(report_path);
  if (!report) throw std::runtime_error("cannot write report: " + report_path);
  report << "split,mse,rmse,mae,r2\n";
  char buf[160];
  auto emit = [&](const char* split, const FitReport& r) {
    std::snprintf(buf, sizeof buf, "%s,%.9g,%.9g,%.9g,%s\n", split, r.mse, r.rmse, r.mae,
                  r.r2 ? std::to_string(*r.r2).c_str() : "undefined");
    report << buf;
    std::cout << split << ": mse=" << r.mse << " rmse=" << r.rmse << " mae=" << r.mae
              << " r2=" << (r.r2 ? std::to_string(*r.r2) : "undefined") << "\n";
  };
  emit("train", train_report);
  emit("holdout", holdout_report);
  return kExitOk;
}

int run_eval(const std::string& pred_path, const std::string& truth_path, double iou_thr) {
  const auto to_boxes = [](const std::vector<Detection>& dets) {
    std::vector<LabeledBox> out;
    for (const auto& d : dets) out.push_back({d.t, d.class_id, d.bbox, d.confidence});
    return out;
  };
  const std::vector<LabeledBox> preds = to_boxes(read_detections_jsonl(pred_path));
  const std::vector<LabeledBox> truths = to_boxes(read_detections_jsonl(truth_path));

  EvalCounts total;
  total.iou_threshold = iou_thr;
  std::map<int, EvalCounts> per_class;
  for (int cls = 0; cls < kNumClasses; ++cls) {
    const EvalCounts c = count_detections(preds, truths, cls, iou_thr);
    if (c.tp + c.fp + c.fn == 0) continue;
    per_class[cls] = c;
    total.tp += c.tp;
    total.fp += c.fp;
    total.fn += c.fn;
  }
  const ApResult ap = mean_ap(preds, truths, iou_thr);

  for (const auto& [cls, c] : per_class) {
    std::cout << class_name(cls) << ": tp=" << c.tp << " fp=" << c.fp << " fn=" << c.fn;
    if (auto p = precision(c)) std::cout << " precision=" << *p;
    if (auto r = recall(c)) std::cout << " recall=" << *r;
    if (auto it = ap.per_class_ap.find(cls); it != ap.per_class_ap.end())
      std::cout << " ap=" << it->second;
    std::cout << "\n";
  }
  std::cout << "overall: tp=" << total.tp << " fp=" << total.fp << " fn=" << total.fn;
  if (auto p = precision(total)) std::cout << " precision=" << *p;
  if (auto r = recall(total)) std::cout << " recall=" << *r;
  std::cout << " mAP@" << iou_thr << "=" << ap.map << "\n";
  if (!ap.classes_without_truth.empty()) {
    std::cout << "classes without ground truth (excluded):";
    for (int cls : ap.classes_without_truth) std::cout << " " << class_name(cls);
    std::cout << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"target tracking and auto-aim pipeline"};
  app.require_subcommand(1);

  std::string input, config_path, out_dir = "out";
  auto* track = app.add_subcommand("track", "run the tracker over a recorded detection stream");
  track->add_option("--input", input, "detection stream (jsonl)")->required();
  track->add_option("--config", config_path, "pipeline config (json)");
  track->add_option("--out", out_dir, "output directory");

  std::string scenario_path;
  long long seed = -1;
  auto* simulate = app.add_subcommand("simulate", "run the deterministic closed-loop simulator");
  simulate->add_option("--scenario", scenario_path, "scenario file (json)")->required();
  simulate->add_option("--config", config_path, "pipeline config (json)");
  simulate->add_option("--seed", seed, "override the scenario seed");
  simulate->add_option("--out", out_dir, "output directory");

  std::string data_path, model_name = "knn", report_path = "report.csv";
  uint64_t fit_seed = 42;
  auto* fit = app.add_subcommand("fit", "fit a drop-compensation regressor");
  fit->add_option("--data", data_path, "drop data csv (distance_cm,drop_px)")->required();
  fit->add_option("--model", model_name, "poly4|poly5|knn|svr")
      ->check(CLI::IsMember({"poly4", "poly5", "knn", "svr"}));
  fit->add_option("--report", report_path, "metrics report csv");
  fit->add_option("--split-seed", fit_seed, "seed for the 80/20 split");

  std::string pred_path, truth_path;
  double iou_thr = 0.5;
  auto* eval = app.add_subcommand("eval", "score predictions against ground truth");
  eval->add_option("--pred", pred_path, "predictions (jsonl)")->required();
  eval->add_option("--truth", truth_path, "ground truth (jsonl)")->required();
  eval->add_option("--iou", iou_thr, "matching IoU threshold");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (app.got_subcommand(track)) return run_track(input, config_path, out_dir);
    if (app.got_subcommand(simulate)) return run_simulate(scenario_path, config_path, seed, out_dir);
    if (app.got_subcommand(fit)) return run_fit(data_path, model_name, report_path, fit_seed);
    if (app.got_subcommand(eval)) return run_eval(pred_path, truth_path, iou_thr);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
