#include "flowtrack/geometry.hpp"

#include <algorithm>

namespace flowtrack {

double iou(const BBox& a, const BBox& b) {
  const double ix = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double iy = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

std::vector<Detection> class_agnostic_nms(const std::vector<Detection>& dets,
                                          double sigma_nms) {
  std::vector<int> order(dets.size());
  for (size_t i = 0; i < dets.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int l, int r) {
    if (dets[l].score != dets[r].score) return dets[l].score > dets[r].score;
    return dets[l].det_index < dets[r].det_index;
  });

  std::vector<Detection> kept;
  kept.reserve(dets.size());
  for (int idx : order) {
    bool suppressed = false;
    for (const Detection& k : kept) {
      if (iou(dets[idx].bbox, k.bbox) >= sigma_nms) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(dets[idx]);
  }
  // Restore within-frame ordering so downstream indexing stays stable.
  std::sort(kept.begin(), kept.end(), [](const Detection& l, const Detection& r) {
    return l.det_index < r.det_index;
  });
  return kept;
}

}  // namespace flowtrack
