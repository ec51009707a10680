#pragma once

#include <limits>
#include <utility>
#include <vector>

#include "flowtrack/appearance.hpp"
#include "flowtrack/geometry.hpp"

namespace flowtrack {

/// Row-major track x detection cost matrix. Entries set to kInfeasible mark
/// forbidden pairs (a failed gate is a hard constraint, not a soft cost).
struct CostMatrix {
  static constexpr double kInfeasible = std::numeric_limits<double>::infinity();

  int rows = 0;
  int cols = 0;
  std::vector<double> costs;  // rows*cols

  CostMatrix() = default;
  CostMatrix(int r, int c) : rows(r), cols(c), costs(static_cast<size_t>(r) * c, kInfeasible) {}

  double& at(int r, int c) { return costs[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return costs[static_cast<size_t>(r) * cols + c]; }
  bool feasible(int r, int c) const { return std::isfinite(at(r, c)); }
};

struct Assignment {
  std::vector<std::pair<int, int>> pairs;  // (row, col), sorted by row
  std::vector<int> unmatched_rows;
  std::vector<int> unmatched_cols;
  double total_cost = 0.0;
};

/// Minimum-cost assignment over the feasible entries, at maximum matching
/// cardinality. Among optima, returns the lexicographically smallest pair
/// list by (row, col). Rectangular and empty matrices are handled; dummy
/// pairings from padding are reported as unmatched.
Assignment hungarian_solve(const CostMatrix& m);

/// Baseline greedy matching: tracks are visited in stable order and each
/// takes the remaining detection with highest IoU when that IoU >= sigma_iou
/// (ties: lower detection index). Used only by the baseline-mode tracker.
Assignment greedy_iou_match(const std::vector<BBox>& track_boxes,
                            const std::vector<BBox>& det_boxes,
                            double sigma_iou);

/// Stage-1 cost: 1 - IoU where IoU >= gate, infeasible otherwise.
CostMatrix build_iou_cost(const std::vector<BBox>& track_boxes,
                          const std::vector<BBox>& det_boxes, double gate);

enum class Stage2Cost { appearance, iou, mean };

/// Stage-2 cost: a pair is feasible iff IoU >= gate_iou AND cosine distance
/// <= gate_app; the cost is chosen by `mode` (default: appearance distance).
/// Pairs lacking an embedding on either side fall back to IoU-only gating
/// with cost 1 - IoU. Null pointers mark missing embeddings.
CostMatrix build_stage2_cost(const std::vector<BBox>& track_boxes,
                             const std::vector<BBox>& det_boxes,
                             const std::vector<const Embedding*>& track_apps,
                             const std::vector<const Embedding*>& det_embs,
                             double gate_iou, double gate_app,
                             Stage2Cost mode = Stage2Cost::appearance);

}  // namespace flowtrack
