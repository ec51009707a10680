#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "flowtrack/appearance.hpp"
#include "flowtrack/geometry.hpp"
#include "flowtrack/metrics.hpp"

namespace flowtrack {

class MotionField;
class MotionSource;

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct file_not_found_error : io_error {
  using io_error::io_error;
};
struct format_error : io_error {
  using io_error::io_error;
};

/// One CSV row from a MOT-Challenge or VisDrone annotation/result file,
/// already converted to corner form.
struct MotRecord {
  int frame = 0;
  long id = -1;  // -1 marks a detection without identity
  BBox box;
  double conf = 0.0;
  int class_id = 0;
  double visibility = 0.0;
  bool ignore_region = false;  // VisDrone category 0
};

/// Parses `frame,id,bb_left,bb_top,bb_width,bb_height,conf,class,vis[,...]`
/// rows. Rows with non-positive width or height are skipped with a warning
/// on stderr; malformed rows raise format_error with the line number.
std::vector<MotRecord> read_mot_csv(const std::string& path);

/// Parses VisDrone 10-field rows; category 0 rows become ignore regions.
std::vector<MotRecord> read_visdrone_csv(const std::string& path);

/// Grouping helpers. Detections get a per-frame det_index in file order.
std::map<int, std::vector<Detection>> detections_by_frame(
    const std::vector<MotRecord>& records);
std::vector<TrackRecord> tracks_from_records(const std::vector<MotRecord>& records);
IgnoreRegions ignore_regions_from_records(const std::vector<MotRecord>& records);

/// Middlebury .flo: float32 magic 202021.25, int32 width/height, then
/// row-major interleaved (u,v) float32 pairs, all little-endian.
MotionField read_flo(const std::string& path);
void write_flo(const MotionField& field, const std::string& path);

/// Affine flow sidecar: `frame,a,b,c,d,e,f` per line.
std::map<int, MotionField> read_flow_csv(const std::string& path);

struct OutputTracklet;  // tracker.hpp

/// MOT-Challenge result rows `frame,id,left,top,w,h,conf,class,-1,-1`,
/// sorted by (frame, id), reals fixed to 6 decimals. Writes to a temporary
/// file and renames on success.
void write_results(const std::vector<OutputTracklet>& tracklets,
                   const std::string& path);
std::string format_results(const std::vector<OutputTracklet>& tracklets);

/// Embedding CSV with header `frame,det_index,dim=D`. Rows matching a
/// detection stamp its embedding_id; rows without one are ignored with a
/// warning on stderr.
EmbeddingTable read_embeddings_csv(const std::string& path,
                                   std::map<int, std::vector<Detection>>& dets);
void write_embeddings_csv(const EmbeddingTable& table,
                          const std::map<int, std::vector<Detection>>& dets,
                          const std::string& path);

struct SeqInfo {
  int width = 0;
  int height = 0;
  int frames = 0;
};
SeqInfo read_seqinfo(const std::string& path);
void write_seqinfo(const SeqInfo& info, const std::string& path);

struct TrackerConfig;  // tracker.hpp

/// Flat `key = value` config file; unknown keys are rejected.
TrackerConfig read_config(const std::string& path);

/// Everything one sequence needs, resolved from files or synthesized.
struct SequenceBundle {
  int width = 0;
  int height = 0;
  int frames = 0;
  std::map<int, std::vector<Detection>> detections;
  std::shared_ptr<MotionSource> flow;
  EmbeddingTable embeddings;
  std::vector<TrackRecord> gt;
  IgnoreRegions ignore;
};

}  // namespace flowtrack
