#pragma once

#include "autoaim/geometry.hpp"

#include <map>
#include <optional>
#include <vector>

namespace autoaim {

/// Per-class detection counts at a fixed IoU threshold.
struct EvalCounts {
  int tp = 0;
  int fp = 0;
  int fn = 0;
  double iou_threshold = 0.5;
};

/// TP/(TP+FP); nullopt when no predictions were made.
std::optional<double> precision(const EvalCounts& c);
/// TP/(TP+FN); nullopt when there is no ground truth.
std::optional<double> recall(const EvalCounts& c);

/// A prediction or ground-truth box grouped into frames by timestamp.
struct LabeledBox {
  double t = 0;  // frame key; boxes with equal t belong to one frame
  int class_id = 0;
  BBox bbox;
  double confidence = 1.0;  // ignored for ground truth
};

/// Greedy matching protocol: predictions in descending confidence order, each
/// matched to the highest-IoU unused truth of its class and frame at
/// IoU >= threshold.
EvalCounts count_detections(const std::vector<LabeledBox>& predictions,
                            const std::vector<LabeledBox>& truths, int class_id,
                            double iou_threshold);

struct ApResult {
  std::map<int, double> per_class_ap;       // classes with ground truth
  std::vector<int> classes_without_truth;   // excluded from the mean
  double map = 0;
};

/// Per class: AP is the area under the all-points interpolated
/// precision-recall curve from a confidence-descending sweep; mAP averages
/// the APs of classes that have ground truth. Throws std::invalid_argument
/// when no class has any ground truth.
ApResult mean_ap(const std::vector<LabeledBox>& predictions,
                 const std::vector<LabeledBox>& truths, double iou_threshold);

}  // namespace autoaim
