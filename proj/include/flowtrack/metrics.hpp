#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flowtrack/geometry.hpp"

namespace flowtrack {

/// One identity-labeled trajectory used on either side of evaluation. For
/// predictions, confidence is the tracklet confidence (mean of its detection
/// scores); for ground truth it is unused.
struct TrackRecord {
  long id = 0;
  int class_id = 0;
  std::map<int, BBox> boxes;  // frame -> box
  double confidence = 0.0;
};

/// Per-frame regions excluded from evaluation (e.g. VisDrone category 0).
using IgnoreRegions = std::map<int, std::vector<BBox>>;

struct ClearResult {
  double mota = 0.0;
  double motp = 0.0;  // mean matched IoU, in [0,1]
  int mt = 0;
  int ml = 0;
  long fp = 0;
  long fn = 0;
  long ids = 0;
  long fm = 0;
  long matches = 0;
  long gt_boxes = 0;
  long pred_boxes = 0;
};

struct ApReport {
  std::vector<double> thresholds;                 // {0.25, 0.5, 0.75}
  std::map<int, std::vector<double>> per_class;   // class -> AP per threshold
  std::map<int, double> class_mean;               // class -> mean over thresholds
  std::vector<double> map_per_threshold;          // mean over classes, per threshold
  double mean_ap = 0.0;                           // mean of map_per_threshold
};

struct EvalReport {
  std::optional<ClearResult> clear;
  std::optional<double> idf1;
  std::optional<ApReport> ap;
};

/// CLEAR-MOT bookkeeping at the given IoU gate. Correspondences persist
/// between frames while still valid; the remainder is re-matched optimally
/// per frame. Throws std::invalid_argument when the ground truth is empty
/// (MOTA is undefined).
ClearResult evaluate_clear(const std::vector<TrackRecord>& gt,
                           const std::vector<TrackRecord>& pred,
                           double iou_gate = 0.5,
                           const IgnoreRegions& ignore = {});

/// Identity F1 over a globally optimal trajectory matching. Empty GT and
/// empty predictions give 1.0 by convention; empty GT with nonempty
/// predictions gives 0.0.
double evaluate_idf1(const std::vector<TrackRecord>& gt,
                     const std::vector<TrackRecord>& pred,
                     double iou_gate = 0.5);

/// VisDrone-style tracklet AP at thresholds {0.25, 0.5, 0.75}. Tracklet IoU
/// is the mean per-frame box IoU over the union of both tracklets' frames; a
/// match is correct iff tracklet IoU is strictly above the threshold.
ApReport evaluate_track_ap(const std::vector<TrackRecord>& gt,
                           const std::vector<TrackRecord>& pred);

/// Mean per-frame IoU over the union of both tracklets' frames.
double tracklet_iou(const TrackRecord& a, const TrackRecord& b);

std::string format_report_table(const EvalReport& report);
std::string format_report_kv(const EvalReport& report);

}  // namespace flowtrack
