#include "autoaim/eval.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>

namespace autoaim {

std::optional<double> precision(const EvalCounts& c) {
  if (c.tp + c.fp == 0) return std::nullopt;
  return static_cast<double>(c.tp) / (c.tp + c.fp);
}

std::optional<double> recall(const EvalCounts& c) {
  if (c.tp + c.fn == 0) return std::nullopt;
  return static_cast<double>(c.tp) / (c.tp + c.fn);
}

namespace {

// Stable confidence-descending order; ties broken by original index so the
// sweep is deterministic.
std::vector<int> confidence_order(const std::vector<LabeledBox>& boxes,
                                  const std::vector<int>& subset) {
  std::vector<int> order = subset;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return boxes[a].confidence > boxes[b].confidence;
  });
  return order;
}

std::vector<int> indices_of_class(const std::vector<LabeledBox>& boxes, int class_id) {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(boxes.size()); ++i)
    if (boxes[i].class_id == class_id) out.push_back(i);
  return out;
}

// Marks each class prediction TP/FP under the greedy protocol; returns flags
// aligned with the confidence-ordered prediction list.
std::vector<char> greedy_flags(const std::vector<LabeledBox>& predictions,
                               const std::vector<int>& pred_order,
                               const std::vector<LabeledBox>& truths,
                               const std::vector<int>& truth_idx, double iou_threshold) {
  std::vector<char> is_tp(pred_order.size(), 0);
  std::vector<char> used(truth_idx.size(), 0);
  for (std::size_t p = 0; p < pred_order.size(); ++p) {
    const LabeledBox& pred = predictions[pred_order[p]];
    double best = 0;
    int best_t = -1;
    for (std::size_t t = 0; t < truth_idx.size(); ++t) {
      if (used[t]) continue;
      const LabeledBox& truth = truths[truth_idx[t]];
      if (truth.t != pred.t) continue;
      const double overlap = iou(pred.bbox, truth.bbox);
      if (overlap >= iou_threshold && overlap > best) {
        best = overlap;
        best_t = static_cast<int>(t);
      }
    }
    if (best_t >= 0) {
      used[best_t] = 1;
      is_tp[p] = 1;
    }
  }
  return is_tp;
}

}  // namespace

EvalCounts count_detections(const std::vector<LabeledBox>& predictions,
                            const std::vector<LabeledBox>& truths, int class_id,
                            double iou_threshold) {
  const std::vector<int> pred_idx = indices_of_class(predictions, class_id);
  const std::vector<int> truth_idx = indices_of_class(truths, class_id);
  const std::vector<int> order = confidence_order(predictions, pred_idx);
  const std::vector<char> is_tp = greedy_flags(predictions, order, truths, truth_idx, iou_threshold);

  EvalCounts c;
  c.iou_threshold = iou_threshold;
  for (char f : is_tp) f ? ++c.tp : ++c.fp;
  c.fn = static_cast<int>(truth_idx.size()) - c.tp;
  return c;
}

ApResult mean_ap(const std::vector<LabeledBox>& predictions,
                 const std::vector<LabeledBox>& truths, double iou_threshold) {
  std::set<int> classes;
  for (const auto& b : predictions) classes.insert(b.class_id);
  for (const auto& b : truths) classes.insert(b.class_id);

  ApResult result;
  for (int cls : classes) {
    const std::vector<int> truth_idx = indices_of_class(truths, cls);
    if (truth_idx.empty()) {
      result.classes_without_truth.push_back(cls);
      continue;
    }
    const std::vector<int> pred_idx = indices_of_class(predictions, cls);
    const std::vector<int> order = confidence_order(predictions, pred_idx);
    const std::vector<char> is_tp =
        greedy_flags(predictions, order, truths, truth_idx, iou_threshold);

    // Precision/recall after each prediction in the sweep.
    const double n_truth = static_cast<double>(truth_idx.size());
    std::vector<double> rec, prec;
    int tp = 0;
    for (std::size_t p = 0; p < order.size(); ++p) {
      if (is_tp[p]) ++tp;
      rec.push_back(tp / n_truth);
      prec.push_back(static_cast<double>(tp) / static_cast<double>(p + 1));
    }

    // All-points interpolation: envelope precision from the right, then sum
    // the area over recall increments.
    double ap = 0;
    double envelope = 0;
    for (int p = static_cast<int>(order.size()) - 1; p >= 0; --p) {
      envelope = std::max(envelope, prec[p]);
      const double prev_recall = p > 0 ? rec[p - 1] : 0.0;
      ap += (rec[p] - prev_recall) * envelope;
    }
    result.per_class_ap[cls] = ap;
  }

  if (result.per_class_ap.empty())
    throw std::invalid_argument("mean_ap: no class has ground truth");
  double sum = 0;
  for (const auto& [cls, ap] : result.per_class_ap) sum += ap;
  result.map = sum / static_cast<double>(result.per_class_ap.size());
  return result;
}

}  // namespace autoaim
