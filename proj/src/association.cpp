#include "flowtrack/association.hpp"

#include <algorithm>
#include <cmath>

namespace flowtrack {

namespace {

// Min-cost perfect matching on an n x n dense matrix via shortest augmenting
// paths with potentials, O(n^3). Fills row_to_col and the dual potentials.
void square_solve(const std::vector<std::vector<double>>& a,
                  std::vector<int>& row_to_col, std::vector<double>& pot_u,
                  std::vector<double>& pot_v) {
  const int n = static_cast<int>(a.size());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = -1;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = a[i0 - 1][j - 1] - u[i0] - v[j];
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
    } while (j0 != 0);
  }
  row_to_col.assign(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (p[j] >= 1) row_to_col[p[j] - 1] = j - 1;
  }
  pot_u.assign(n, 0.0);
  pot_v.assign(n, 0.0);
  for (int i = 0; i < n; ++i) pot_u[i] = u[i + 1];
  for (int j = 0; j < n; ++j) pot_v[j] = v[j + 1];
}

// Augmenting-path search restricted to tight edges; forced columns are
// excluded so pinned pairs never move.
bool augment(int row, const std::vector<std::vector<int>>& tight_cols,
             const std::vector<char>& col_forced, std::vector<int>& match_col,
             std::vector<int>& match_row, std::vector<char>& visited) {
  for (int c : tight_cols[static_cast<size_t>(row)]) {
    if (col_forced[static_cast<size_t>(c)] || visited[static_cast<size_t>(c)]) continue;
    visited[static_cast<size_t>(c)] = 1;
    if (match_col[static_cast<size_t>(c)] < 0 ||
        augment(match_col[static_cast<size_t>(c)], tight_cols, col_forced,
                match_col, match_row, visited)) {
      match_col[static_cast<size_t>(c)] = row;
      match_row[static_cast<size_t>(row)] = c;
      return true;
    }
  }
  return false;
}

}  // namespace

Assignment hungarian_solve(const CostMatrix& m) {
  Assignment out;
  if (m.rows == 0 || m.cols == 0) {
    for (int r = 0; r < m.rows; ++r) out.unmatched_rows.push_back(r);
    for (int c = 0; c < m.cols; ++c) out.unmatched_cols.push_back(c);
    return out;
  }

  // Pad to square with a finite big cost. One big edge outweighs any swing
  // in feasible costs, so the solver maximizes feasible cardinality first
  // and minimizes feasible cost second.
  const int n = std::max(m.rows, m.cols);
  double max_cost = 0.0;
  for (int r = 0; r < m.rows; ++r) {
    for (int c = 0; c < m.cols; ++c) {
      if (m.feasible(r, c)) max_cost = std::max(max_cost, m.at(r, c));
    }
  }
  const double big = (max_cost + 1.0) * n + 1.0;
  std::vector<std::vector<double>> a(n, std::vector<double>(n, big));
  for (int r = 0; r < m.rows; ++r) {
    for (int c = 0; c < m.cols; ++c) {
      if (m.feasible(r, c)) a[r][c] = m.at(r, c);
    }
  }

  std::vector<int> match_row;
  std::vector<double> pot_u, pot_v;
  square_solve(a, match_row, pot_u, pot_v);
  std::vector<int> match_col(n, -1);
  for (int r = 0; r < n; ++r) match_col[static_cast<size_t>(match_row[r])] = r;

  // Optimal solutions are exactly the perfect matchings of the tight-edge
  // graph (zero reduced cost under the final potentials).
  const double eps = 1e-9 * std::max(1.0, big);
  std::vector<std::vector<int>> tight_cols(static_cast<size_t>(n));
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      if (a[r][c] - pot_u[static_cast<size_t>(r)] - pot_v[static_cast<size_t>(c)] <= eps) {
        tight_cols[static_cast<size_t>(r)].push_back(c);
      }
    }
  }

  // Lexicographic refinement: pin each real row, in order, to the smallest
  // feasible tight column that still completes to a perfect matching.
  std::vector<char> col_forced(static_cast<size_t>(n), 0);
  for (int r = 0; r < m.rows; ++r) {
    int chosen = -1;
    for (int c : tight_cols[static_cast<size_t>(r)]) {
      if (c >= m.cols || col_forced[static_cast<size_t>(c)] || !m.feasible(r, c)) continue;
      if (match_row[static_cast<size_t>(r)] == c) {
        chosen = c;
        break;
      }
      // Tentatively rewire r to c and repair the displaced row.
      const int old_c = match_row[static_cast<size_t>(r)];
      const int displaced = match_col[static_cast<size_t>(c)];
      match_row[static_cast<size_t>(r)] = c;
      match_col[static_cast<size_t>(c)] = r;
      match_col[static_cast<size_t>(old_c)] = -1;
      bool ok = true;
      if (displaced >= 0) {
        match_row[static_cast<size_t>(displaced)] = -1;
        col_forced[static_cast<size_t>(c)] = 1;
        std::vector<char> visited(static_cast<size_t>(n), 0);
        ok = augment(displaced, tight_cols, col_forced, match_col, match_row, visited);
        col_forced[static_cast<size_t>(c)] = 0;
        if (!ok) {
          match_row[static_cast<size_t>(displaced)] = c;
          match_col[static_cast<size_t>(c)] = displaced;
          match_row[static_cast<size_t>(r)] = old_c;
          match_col[static_cast<size_t>(old_c)] = r;
        }
      }
      if (ok) {
        chosen = c;
        break;
      }
    }
    if (chosen >= 0) {
      col_forced[static_cast<size_t>(chosen)] = 1;
      out.pairs.emplace_back(r, chosen);
      out.total_cost += m.at(r, chosen);
    } else {
      out.unmatched_rows.push_back(r);
    }
  }
  for (int c = 0; c < m.cols; ++c) {
    if (!col_forced[static_cast<size_t>(c)]) out.unmatched_cols.push_back(c);
  }
  return out;
}

Assignment greedy_iou_match(const std::vector<BBox>& track_boxes,
                            const std::vector<BBox>& det_boxes,
                            double sigma_iou) {
  Assignment out;
  std::vector<char> det_used(det_boxes.size(), 0);
  for (size_t t = 0; t < track_boxes.size(); ++t) {
    int best = -1;
    double best_iou = 0.0;
    for (size_t d = 0; d < det_boxes.size(); ++d) {
      if (det_used[d]) continue;
      const double v = iou(track_boxes[t], det_boxes[d]);
      if (v > best_iou) {
        best_iou = v;
        best = static_cast<int>(d);
      }
    }
    if (best >= 0 && best_iou >= sigma_iou) {
      det_used[static_cast<size_t>(best)] = 1;
      out.pairs.emplace_back(static_cast<int>(t), best);
      out.total_cost += 1.0 - best_iou;
    } else {
      out.unmatched_rows.push_back(static_cast<int>(t));
    }
  }
  for (size_t d = 0; d < det_boxes.size(); ++d) {
    if (!det_used[d]) out.unmatched_cols.push_back(static_cast<int>(d));
  }
  return out;
}

CostMatrix build_iou_cost(const std::vector<BBox>& track_boxes,
                          const std::vector<BBox>& det_boxes, double gate) {
  CostMatrix m(static_cast<int>(track_boxes.size()),
               static_cast<int>(det_boxes.size()));
  for (int r = 0; r < m.rows; ++r) {
    for (int c = 0; c < m.cols; ++c) {
      const double v = iou(track_boxes[static_cast<size_t>(r)],
                           det_boxes[static_cast<size_t>(c)]);
      if (v >= gate) m.at(r, c) = 1.0 - v;
    }
  }
  return m;
}

CostMatrix build_stage2_cost(const std::vector<BBox>& track_boxes,
                             const std::vector<BBox>& det_boxes,
                             const std::vector<const Embedding*>& track_apps,
                             const std::vector<const Embedding*>& det_embs,
                             double gate_iou, double gate_app, Stage2Cost mode) {
  CostMatrix m(static_cast<int>(track_boxes.size()),
               static_cast<int>(det_boxes.size()));
  for (int r = 0; r < m.rows; ++r) {
    for (int c = 0; c < m.cols; ++c) {
      const double v = iou(track_boxes[static_cast<size_t>(r)],
                           det_boxes[static_cast<size_t>(c)]);
      if (v < gate_iou) continue;
      const Embedding* ta = track_apps[static_cast<size_t>(r)];
      const Embedding* de = det_embs[static_cast<size_t>(c)];
      if (ta == nullptr || de == nullptr) {
        m.at(r, c) = 1.0 - v;  // IoU fallback when an embedding is missing
        continue;
      }
      const double dist = cosine_distance(*ta, *de);
      if (dist > gate_app) continue;
      switch (mode) {
        case Stage2Cost::appearance:
          m.at(r, c) = dist;
          break;
        case Stage2Cost::iou:
          m.at(r, c) = 1.0 - v;
          break;
        case Stage2Cost::mean:
          m.at(r, c) = 0.5 * (dist + (1.0 - v));
          break;
      }
    }
  }
  return m;
}

}  // namespace flowtrack
