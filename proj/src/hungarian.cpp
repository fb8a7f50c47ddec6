#include "autoaim/hungarian.hpp"

#include <limits>

namespace autoaim {

namespace {

// Jonker-Volgenant style shortest augmenting path solver for a square matrix.
// Returns row -> column assignment. O(n^3).
std::vector<int> solve_square(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0), v(n + 1, 0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace

Assignment hungarian(const CostMatrix& c) {
  Assignment out;
  const int nr = c.rows();
  const int nc = c.cols();
  if (nr == 0 || nc == 0) {
    for (int i = 0; i < nr; ++i) out.unmatched_rows.push_back(i);
    for (int j = 0; j < nc; ++j) out.unmatched_cols.push_back(j);
    return out;
  }

  // Embed into an (nr+nc)-square problem where every row and column owns a
  // private "stay unmatched" slot. A real pair is picked iff its cost beats
  // 2*kUnmatched, so forbidden entries (>= kForbiddenCost) are never taken.
  constexpr double kUnmatched = 1e6;
  const int n = nr + nc;
  Eigen::MatrixXd a = Eigen::MatrixXd::Constant(n, n, kForbiddenCost);
  a.topLeftCorner(nr, nc) = c.costs;
  for (int i = 0; i < nr; ++i) a(i, nc + i) = kUnmatched;
  for (int j = 0; j < nc; ++j) a(nr + j, j) = kUnmatched;
  a.bottomRightCorner(nc, nr).setZero();

  const std::vector<int> row_to_col = solve_square(a);
  std::vector<char> col_matched(nc, 0);
  for (int i = 0; i < nr; ++i) {
    const int j = row_to_col[i];
    if (j < nc && !c.forbidden(i, j)) {
      out.pairs.emplace_back(i, j);
      out.total_cost += c.costs(i, j);
      col_matched[j] = 1;
    } else {
      out.unmatched_rows.push_back(i);
    }
  }
  for (int j = 0; j < nc; ++j)
    if (!col_matched[j]) out.unmatched_cols.push_back(j);
  return out;
}

}  // namespace autoaim
