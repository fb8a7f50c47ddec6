#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

namespace autoaim {

// Entries at or above kForbiddenCost are excluded from matching (gated pairs).
inline constexpr double kForbiddenCost = 1e9;

// rows = tracks, cols = detections; entries are nonnegative association
// costs, expected to stay far below kForbiddenCost (association costs are
// O(1); anything beyond ~1e6 is treated as effectively unmatchable).
struct CostMatrix {
  Eigen::MatrixXd costs;

  CostMatrix() = default;
  CostMatrix(int rows, int cols) : costs(Eigen::MatrixXd::Zero(rows, cols)) {}

  int rows() const { return static_cast<int>(costs.rows()); }
  int cols() const { return static_cast<int>(costs.cols()); }
  void forbid(int r, int c) { costs(r, c) = kForbiddenCost; }
  bool forbidden(int r, int c) const { return costs(r, c) >= kForbiddenCost; }
};

struct Assignment {
  std::vector<std::pair<int, int>> pairs;  // (row, col), ordered by row
  std::vector<int> unmatched_rows;
  std::vector<int> unmatched_cols;
  double total_cost = 0;  // sum over matched pairs only
};

/// Exact minimum-cost assignment over the allowed (non-forbidden) pairs of a
/// possibly rectangular matrix. Rows or columns that cannot be matched are
/// reported unmatched; an empty matrix yields an empty assignment.
Assignment hungarian(const CostMatrix& c);

}  // namespace autoaim
