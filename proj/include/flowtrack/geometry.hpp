#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

namespace flowtrack {

/// Axis-aligned box in pixel coordinates, corner convention (x1,y1) top-left,
/// (x2,y2) bottom-right. Coordinates are real-valued; zero-area boxes are
/// allowed, negative extents are rejected at construction.
struct BBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  BBox() = default;

  BBox(double x1_, double y1_, double x2_, double y2_)
      : x1(x1_), y1(y1_), x2(x2_), y2(y2_) {
    if (!(std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) &&
          std::isfinite(y2))) {
      throw std::invalid_argument("BBox: coordinates must be finite");
    }
    if (x2 < x1 || y2 < y1) {
      throw std::invalid_argument("BBox: negative extent");
    }
  }

  static BBox from_ltwh(double left, double top, double w, double h) {
    return BBox(left, top, left + w, top + h);
  }

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }

  bool operator==(const BBox& o) const {
    return x1 == o.x1 && y1 == o.y1 && x2 == o.x2 && y2 == o.y2;
  }
};

/// One per-frame detector output. det_index is the within-frame ordinal,
/// embedding_id an optional reference into an EmbeddingTable.
struct Detection {
  int frame = 0;  // 1-based
  BBox bbox;
  double score = 0.0;  // in [0,1]
  int class_id = 0;
  int det_index = 0;
  std::optional<int> embedding_id;
};

/// Intersection-over-union of two boxes. Returns 0 when the union has zero
/// area (two degenerate boxes never match).
double iou(const BBox& a, const BBox& b);

/// Greedy class-agnostic non-maximum suppression. Detections are visited in
/// order of descending score (ties: lower det_index first); a detection is
/// kept iff its IoU with every already-kept detection is < sigma_nms.
/// Kept detections retain all their original fields, including det_index.
std::vector<Detection> class_agnostic_nms(const std::vector<Detection>& dets,
                                          double sigma_nms);

}  // namespace flowtrack
