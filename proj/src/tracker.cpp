#include "flowtrack/tracker.hpp"

#include <algorithm>
#include <iostream>
#include <stdexcept>

namespace flowtrack {

void TrackerConfig::validate() const {
  if (!(sigma_iou2 >= 0.0 && sigma_iou2 <= sigma_iou1 && sigma_iou1 <= 1.0)) {
    throw std::invalid_argument(
        "TrackerConfig: require 0 <= sigma_iou2 <= sigma_iou1 <= 1");
  }
  if (t_min < 1) throw std::invalid_argument("TrackerConfig: t_min must be >= 1");
  if (t_max < 0) throw std::invalid_argument("TrackerConfig: t_max must be >= 0");
  if (!(sigma_nms >= 0.0 && sigma_nms <= 1.0)) {
    throw std::invalid_argument("TrackerConfig: sigma_nms must be in [0,1]");
  }
  if (!(motion_policy.trigger_ratio > 0.0)) {
    throw std::invalid_argument("TrackerConfig: trigger_ratio must be > 0");
  }
  if (!(ema_alpha >= 0.0 && ema_alpha <= 1.0)) {
    throw std::invalid_argument("TrackerConfig: ema_alpha must be in [0,1]");
  }
  if (sigma_app < 0.0) {
    throw std::invalid_argument("TrackerConfig: sigma_app must be >= 0");
  }
}

int Track::detected_count() const {
  int n = 0;
  for (const TrackEntry& e : entries) {
    if (e.provenance == Provenance::detected) ++n;
  }
  return n;
}

TrackSet::CascadeResult TrackSet::run_cascade(
    const std::vector<BBox>& warped, const std::vector<Detection>& dets,
    const EmbeddingTable* embeddings) const {
  CascadeResult res;
  const int n_tracks = static_cast<int>(active_.size());
  const int n_dets = static_cast<int>(dets.size());
  std::vector<char> track_done(static_cast<size_t>(n_tracks), 0);
  std::vector<char> det_done(static_cast<size_t>(n_dets), 0);

  // Tracks and detections are pooled per class unless class_agnostic.
  auto group_keys = [&](auto&& class_of, int count, const std::vector<char>& done) {
    std::map<int, std::vector<int>> groups;
    for (int i = 0; i < count; ++i) {
      if (done[static_cast<size_t>(i)]) continue;
      groups[cfg_.class_agnostic ? 0 : class_of(i)].push_back(i);
    }
    return groups;
  };
  auto track_class = [&](int i) { return active_[static_cast<size_t>(i)].class_id; };
  auto det_class = [&](int i) { return dets[static_cast<size_t>(i)].class_id; };

  auto run_stage = [&](bool stage2) {
    const auto track_groups = group_keys(track_class, n_tracks, track_done);
    const auto det_groups = group_keys(det_class, n_dets, det_done);
    for (const auto& [cls, t_idx] : track_groups) {
      const auto dit = det_groups.find(cls);
      if (dit == det_groups.end()) continue;
      const std::vector<int>& d_idx = dit->second;
      std::vector<BBox> t_boxes, d_boxes;
      t_boxes.reserve(t_idx.size());
      d_boxes.reserve(d_idx.size());
      for (int i : t_idx) t_boxes.push_back(warped[static_cast<size_t>(i)]);
      for (int j : d_idx) d_boxes.push_back(dets[static_cast<size_t>(j)].bbox);

      Assignment asg;
      if (!stage2) {
        if (cfg_.association == AssociationMode::greedy) {
          asg = greedy_iou_match(t_boxes, d_boxes, cfg_.sigma_iou1);
        } else {
          asg = hungarian_solve(build_iou_cost(t_boxes, d_boxes, cfg_.sigma_iou1));
        }
      } else {
        std::vector<const Embedding*> t_apps, d_embs;
        for (int i : t_idx) {
          const auto& app = active_[static_cast<size_t>(i)].appearance;
          t_apps.push_back(app ? &app->current : nullptr);
        }
        for (int j : d_idx) {
          const auto& eid = dets[static_cast<size_t>(j)].embedding_id;
          d_embs.push_back(embeddings && eid ? embeddings->get(*eid) : nullptr);
        }
        asg = hungarian_solve(build_stage2_cost(t_boxes, d_boxes, t_apps, d_embs,
                                                cfg_.sigma_iou2, cfg_.sigma_app,
                                                cfg_.stage2_cost));
      }
      for (const auto& [r, c] : asg.pairs) {
        const int ti = t_idx[static_cast<size_t>(r)];
        const int dj = d_idx[static_cast<size_t>(c)];
        res.matches.emplace_back(ti, dj);
        track_done[static_cast<size_t>(ti)] = 1;
        det_done[static_cast<size_t>(dj)] = 1;
      }
    }
  };

  run_stage(false);
  if (cfg_.stage2_enabled()) run_stage(true);

  std::sort(res.matches.begin(), res.matches.end());
  for (int i = 0; i < n_tracks; ++i) {
    if (!track_done[static_cast<size_t>(i)]) res.unmatched_tracks.push_back(i);
  }
  for (int j = 0; j < n_dets; ++j) {
    if (!det_done[static_cast<size_t>(j)]) res.unmatched_dets.push_back(j);
  }
  return res;
}

void TrackSet::step(const std::vector<Detection>& frame_dets, MotionSource* flow,
                    const EmbeddingTable* embeddings) {
  const int frame = current_frame_ + 1;
  for (const Detection& d : frame_dets) {
    if (d.frame != frame) {
      throw std::logic_error("TrackSet::step: frame index out of sequence");
    }
  }

  std::vector<Detection> dets;
  dets.reserve(frame_dets.size());
  for (const Detection& d : frame_dets) {
    if (cfg_.class_filter && !cfg_.class_filter->count(d.class_id)) {
      std::cerr << "warning: frame " << frame << ": detection class "
                << d.class_id << " not in config class list, ignored\n";
      continue;
    }
    dets.push_back(d);
  }

  auto warp_all = [&](const MotionField& field) {
    std::vector<BBox> warped;
    warped.reserve(active_.size());
    for (const Track& t : active_) warped.push_back(warp_bbox(t.last().box, field));
    return warped;
  };

  // Motion resolution. Fast mode first matches against unwarped boxes; if
  // the trigger fires, that pass is discarded and the cascade re-runs with
  // the real flow field.
  MotionField field = identity_field();
  const MotionMode mode = cfg_.motion_policy.mode;
  const bool want_flow = flow != nullptr && !active_.empty() && frame >= 2;
  CascadeResult res;
  std::vector<BBox> warped;
  if (mode == MotionMode::always_flow && want_flow) {
    field = flow->field_for(frame);
    warped = warp_all(field);
    res = run_cascade(warped, dets, embeddings);
  } else if (mode == MotionMode::flow_on_trigger && want_flow) {
    warped = warp_all(field);
    res = run_cascade(warped, dets, embeddings);
    const int n_matched = static_cast<int>(res.matches.size());
    const int n_unmatched =
        cfg_.motion_policy.trigger_counts == TriggerCounts::tracks
            ? static_cast<int>(res.unmatched_tracks.size())
            : static_cast<int>(res.unmatched_dets.size());
    if (should_run_flow(n_matched, n_unmatched, cfg_.motion_policy)) {
      field = flow->field_for(frame);
      warped = warp_all(field);
      res = run_cascade(warped, dets, embeddings);
      ++stats_.cascade_reruns;
    }
  } else {
    warped = warp_all(field);
    res = run_cascade(warped, dets, embeddings);
  }

  // Matched tracks take the detection box and refresh appearance memory.
  for (const auto& [ti, dj] : res.matches) {
    Track& t = active_[static_cast<size_t>(ti)];
    const Detection& d = dets[static_cast<size_t>(dj)];
    t.entries.push_back({frame, d.bbox, d.score, Provenance::detected});
    t.coast_count = 0;
    t.state = TrackState::active;
    t.max_score = std::max(t.max_score, d.score);
    if (embeddings && d.embedding_id) {
      if (const Embedding* e = embeddings->get(*d.embedding_id)) {
        if (t.appearance) {
          t.appearance = update_track_appearance(*t.appearance, *e);
        } else {
          t.appearance = TrackAppearance{*e, cfg_.ema_alpha};
        }
      }
    }
  }

  // Unmatched tracks coast on their warped prediction, up to t_max frames.
  std::vector<char> finish(active_.size(), 0);
  for (int ti : res.unmatched_tracks) {
    Track& t = active_[static_cast<size_t>(ti)];
    ++t.coast_count;
    if (t.coast_count > cfg_.t_max) {
      t.state = TrackState::finished;
      finish[static_cast<size_t>(ti)] = 1;
    } else {
      t.state = TrackState::coasting;
      t.entries.push_back({frame, warped[static_cast<size_t>(ti)],
                           t.entries.back().score, Provenance::predicted});
    }
  }
  if (std::find(finish.begin(), finish.end(), char(1)) != finish.end()) {
    std::vector<Track> still_active;
    still_active.reserve(active_.size());
    for (size_t i = 0; i < active_.size(); ++i) {
      if (finish[i]) {
        finished_.push_back(std::move(active_[i]));
      } else {
        still_active.push_back(std::move(active_[i]));
      }
    }
    active_ = std::move(still_active);
  }

  // Every unmatched detection births a new active track.
  for (int dj : res.unmatched_dets) {
    const Detection& d = dets[static_cast<size_t>(dj)];
    Track t;
    t.track_id = next_id_++;
    t.class_id = d.class_id;
    t.state = TrackState::active;
    t.entries.push_back({frame, d.bbox, d.score, Provenance::detected});
    t.max_score = d.score;
    if (embeddings && d.embedding_id) {
      if (const Embedding* e = embeddings->get(*d.embedding_id)) {
        t.appearance = TrackAppearance{*e, cfg_.ema_alpha};
      }
    }
    active_.push_back(std::move(t));
  }

  current_frame_ = frame;
  ++stats_.frames;
}

std::vector<OutputTracklet> TrackSet::finalize() {
  for (Track& t : active_) {
    t.state = TrackState::finished;
    finished_.push_back(std::move(t));
  }
  active_.clear();

  std::vector<OutputTracklet> out;
  for (Track& t : finished_) {
    // Trailing coasting was never confirmed by a detection; drop it.
    while (!t.entries.empty() &&
           t.entries.back().provenance == Provenance::predicted) {
      t.entries.pop_back();
    }
    if (t.entries.empty()) continue;
    const int detected = t.detected_count();
    if (detected < cfg_.t_min) continue;
    if (t.max_score <= cfg_.sigma_h) continue;
    double score_sum = 0.0;
    for (const TrackEntry& e : t.entries) {
      if (e.provenance == Provenance::detected) score_sum += e.score;
    }
    OutputTracklet ot;
    ot.id = t.track_id;
    ot.class_id = t.class_id;
    ot.confidence = score_sum / detected;
    ot.entries = std::move(t.entries);
    out.push_back(std::move(ot));
  }
  finished_.clear();
  std::sort(out.begin(), out.end(),
            [](const OutputTracklet& a, const OutputTracklet& b) { return a.id < b.id; });
  return out;
}

std::vector<OutputTracklet> run_sequence(
    const std::map<int, std::vector<Detection>>& dets_by_frame, int n_frames,
    MotionSource* flow, const EmbeddingTable* embeddings,
    const TrackerConfig& cfg, StepStats* stats) {
  int last = n_frames;
  if (last <= 0) {
    for (const auto& [frame, dets] : dets_by_frame) last = std::max(last, frame);
  }
  TrackSet ts(cfg);
  const std::vector<Detection> empty;
  for (int frame = 1; frame <= last; ++frame) {
    const auto it = dets_by_frame.find(frame);
    const std::vector<Detection>& raw = it == dets_by_frame.end() ? empty : it->second;
    ts.step(class_agnostic_nms(raw, cfg.sigma_nms), flow, embeddings);
  }
  auto out = ts.finalize();
  if (stats) *stats = ts.stats();
  return out;
}

std::vector<TrackRecord> to_track_records(const std::vector<OutputTracklet>& tracklets) {
  std::vector<TrackRecord> records;
  records.reserve(tracklets.size());
  for (const OutputTracklet& t : tracklets) {
    TrackRecord r;
    r.id = t.id;
    r.class_id = t.class_id;
    r.confidence = t.confidence;
    for (const TrackEntry& e : t.entries) r.boxes[e.frame] = e.box;
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace flowtrack
