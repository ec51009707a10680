#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "flowtrack/appearance.hpp"
#include "flowtrack/association.hpp"
#include "flowtrack/geometry.hpp"
#include "flowtrack/metrics.hpp"
#include "flowtrack/motion.hpp"

namespace flowtrack {

enum class TrackState { active, coasting, finished };
enum class Provenance { detected, predicted };
enum class AssociationMode { greedy, hungarian };

/// All thresholds of the pipeline. Defaults follow the usual IoU-tracker
/// conventions; everything is externally configurable. A non-finite
/// sigma_app disables the appearance stage entirely.
struct TrackerConfig {
  double sigma_iou1 = 0.5;  // stage-1 IoU gate
  double sigma_iou2 = 0.3;  // stage-2 IoU gate (must be <= sigma_iou1)
  double sigma_app = 0.4;   // appearance distance gate; inf = stage 2 off
  double sigma_h = 0.5;     // min best-detection score per kept track
  int t_min = 3;            // min detected frames per kept track
  int t_max = 10;           // max coasting frames
  double sigma_nms = 0.5;
  MotionPolicy motion_policy;
  AssociationMode association = AssociationMode::hungarian;
  bool class_agnostic = false;
  Stage2Cost stage2_cost = Stage2Cost::appearance;
  double ema_alpha = 0.0;
  std::optional<std::set<int>> class_filter;  // in-memory only

  bool stage2_enabled() const { return std::isfinite(sigma_app); }
  void validate() const;
};

struct TrackEntry {
  int frame = 0;
  BBox box;
  double score = 0.0;
  Provenance provenance = Provenance::detected;
};

/// A live trajectory. Entries cover a contiguous frame interval by
/// construction; coast_count counts frames since the last real detection.
struct Track {
  long track_id = 0;
  int class_id = 0;
  TrackState state = TrackState::active;
  std::vector<TrackEntry> entries;
  std::optional<TrackAppearance> appearance;
  int coast_count = 0;
  double max_score = 0.0;

  const TrackEntry& last() const { return entries.back(); }
  int detected_count() const;
};

/// Finalized tracklet ready for output. Confidence is the mean of its
/// detected-provenance scores.
struct OutputTracklet {
  long id = 0;
  int class_id = 0;
  double confidence = 0.0;
  std::vector<TrackEntry> entries;
};

struct StepStats {
  long frames = 0;
  long cascade_reruns = 0;  // fast-mode second passes
};

/// The per-frame tracker state. step() consumes the next frame's detections
/// (already NMS-filtered) and advances every live track through motion
/// compensation, the matching cascade, coasting, and birth.
class TrackSet {
 public:
  explicit TrackSet(const TrackerConfig& cfg) : cfg_(cfg) { cfg_.validate(); }

  /// Frame index must be current_frame()+1; `flow` may be null (identity).
  void step(const std::vector<Detection>& frame_dets, MotionSource* flow,
            const EmbeddingTable* embeddings);

  /// Finish all remaining tracks, strip unconfirmed trailing coasting, and
  /// apply the t_min / sigma_h filters.
  std::vector<OutputTracklet> finalize();

  int current_frame() const { return current_frame_; }
  const std::vector<Track>& active_tracks() const { return active_; }
  const std::vector<Track>& finished_tracks() const { return finished_; }
  const StepStats& stats() const { return stats_; }

 private:
  struct CascadeResult {
    std::vector<std::pair<int, int>> matches;  // (active index, det index)
    std::vector<int> unmatched_tracks;
    std::vector<int> unmatched_dets;
  };
  CascadeResult run_cascade(const std::vector<BBox>& warped,
                            const std::vector<Detection>& dets,
                            const EmbeddingTable* embeddings) const;

  TrackerConfig cfg_;
  std::vector<Track> active_;  // active + coasting, in birth order
  std::vector<Track> finished_;
  long next_id_ = 1;
  int current_frame_ = 0;
  StepStats stats_;
};

/// NMS per frame, fold step over frames 1..n_frames, then finalize.
/// Deterministic given identical inputs and config.
std::vector<OutputTracklet> run_sequence(
    const std::map<int, std::vector<Detection>>& dets_by_frame, int n_frames,
    MotionSource* flow, const EmbeddingTable* embeddings,
    const TrackerConfig& cfg, StepStats* stats = nullptr);

/// Output tracklets viewed as evaluation records.
std::vector<TrackRecord> to_track_records(const std::vector<OutputTracklet>& tracklets);

}  // namespace flowtrack
