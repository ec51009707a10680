#include "flowtrack/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>

#include "flowtrack/association.hpp"

namespace flowtrack {

namespace {

// Fraction of box `a` covered by box `b`.
double coverage(const BBox& a, const BBox& b) {
  const double ix = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double iy = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (ix <= 0.0 || iy <= 0.0 || a.area() <= 0.0) return 0.0;
  return ix * iy / a.area();
}

struct FrameBox {
  size_t track_index;
  const BBox* box;
};

std::map<int, std::vector<FrameBox>> by_frame(const std::vector<TrackRecord>& tracks) {
  std::map<int, std::vector<FrameBox>> out;
  for (size_t i = 0; i < tracks.size(); ++i) {
    for (const auto& [frame, box] : tracks[i].boxes) {
      out[frame].push_back({i, &box});
    }
  }
  return out;
}

}  // namespace

ClearResult evaluate_clear(const std::vector<TrackRecord>& gt,
                           const std::vector<TrackRecord>& pred,
                           double iou_gate, const IgnoreRegions& ignore) {
  ClearResult res;
  for (const TrackRecord& g : gt) res.gt_boxes += static_cast<long>(g.boxes.size());
  if (res.gt_boxes == 0) {
    throw std::invalid_argument("evaluate_clear: empty ground truth, MOTA undefined");
  }
  for (const TrackRecord& p : pred) res.pred_boxes += static_cast<long>(p.boxes.size());

  const auto gt_frames = by_frame(gt);
  const auto pred_frames = by_frame(pred);
  std::set<int> frames;
  for (const auto& [f, _] : gt_frames) frames.insert(f);
  for (const auto& [f, _] : pred_frames) frames.insert(f);

  // corr: persisting frame-to-frame correspondence (bimap); last_pred: the
  // most recent pred identity matched to each GT, persisting across gaps.
  std::map<size_t, size_t> corr_gp, corr_pg;
  std::map<size_t, long> last_pred;
  std::map<size_t, std::vector<char>> gt_cover;  // per gt track: matched per present frame
  for (size_t i = 0; i < gt.size(); ++i) {
    gt_cover[i] = std::vector<char>(gt[i].boxes.size(), 0);
  }
  auto frame_pos = [&](const TrackRecord& t, int frame) {
    return static_cast<size_t>(std::distance(t.boxes.begin(), t.boxes.find(frame)));
  };

  double motp_sum = 0.0;
  for (int frame : frames) {
    std::vector<FrameBox> gs, ps;
    if (auto it = gt_frames.find(frame); it != gt_frames.end()) gs = it->second;
    if (auto it = pred_frames.find(frame); it != pred_frames.end()) ps = it->second;

    std::vector<char> g_done(gs.size(), 0), p_done(ps.size(), 0);
    std::vector<std::pair<size_t, size_t>> matched;  // (gs idx, ps idx)

    // Carry over still-valid correspondences first.
    for (size_t gi = 0; gi < gs.size(); ++gi) {
      auto it = corr_gp.find(gs[gi].track_index);
      if (it == corr_gp.end()) continue;
      for (size_t pi = 0; pi < ps.size(); ++pi) {
        if (p_done[pi] || ps[pi].track_index != it->second) continue;
        if (iou(*gs[gi].box, *ps[pi].box) >= iou_gate) {
          matched.emplace_back(gi, pi);
          g_done[gi] = 1;
          p_done[pi] = 1;
        }
        break;
      }
    }

    // Optimal completion on the remainder.
    std::vector<int> g_rest, p_rest;
    for (size_t gi = 0; gi < gs.size(); ++gi) if (!g_done[gi]) g_rest.push_back(static_cast<int>(gi));
    for (size_t pi = 0; pi < ps.size(); ++pi) if (!p_done[pi]) p_rest.push_back(static_cast<int>(pi));
    CostMatrix m(static_cast<int>(g_rest.size()), static_cast<int>(p_rest.size()));
    for (int r = 0; r < m.rows; ++r) {
      for (int c = 0; c < m.cols; ++c) {
        const double v = iou(*gs[static_cast<size_t>(g_rest[static_cast<size_t>(r)])].box,
                             *ps[static_cast<size_t>(p_rest[static_cast<size_t>(c)])].box);
        if (v >= iou_gate) m.at(r, c) = 1.0 - v;
      }
    }
    for (const auto& [r, c] : hungarian_solve(m).pairs) {
      matched.emplace_back(static_cast<size_t>(g_rest[static_cast<size_t>(r)]),
                           static_cast<size_t>(p_rest[static_cast<size_t>(c)]));
      g_done[static_cast<size_t>(g_rest[static_cast<size_t>(r)])] = 1;
      p_done[static_cast<size_t>(p_rest[static_cast<size_t>(c)])] = 1;
    }

    // Update correspondences and count switches.
    for (const auto& [gi, pi] : matched) {
      const size_t g_idx = gs[gi].track_index;
      const size_t p_idx = ps[pi].track_index;
      const long p_id = pred[p_idx].id;
      auto lp = last_pred.find(g_idx);
      if (lp != last_pred.end() && lp->second != p_id) ++res.ids;
      last_pred[g_idx] = p_id;
      if (auto old = corr_gp.find(g_idx); old != corr_gp.end()) corr_pg.erase(old->second);
      if (auto old = corr_pg.find(p_idx); old != corr_pg.end()) corr_gp.erase(old->second);
      corr_gp[g_idx] = p_idx;
      corr_pg[p_idx] = g_idx;
      motp_sum += iou(*gs[gi].box, *ps[pi].box);
      ++res.matches;
      gt_cover[g_idx][frame_pos(gt[g_idx], frame)] = 1;
    }

    res.fn += static_cast<long>(std::count(g_done.begin(), g_done.end(), char(0)));

    // Unmatched predictions mostly covered by an ignore region are excluded.
    const auto ig = ignore.find(frame);
    for (size_t pi = 0; pi < ps.size(); ++pi) {
      if (p_done[pi]) continue;
      bool ignored = false;
      if (ig != ignore.end()) {
        for (const BBox& region : ig->second) {
          if (coverage(*ps[pi].box, region) >= 0.5) {
            ignored = true;
            break;
          }
        }
      }
      if (!ignored) ++res.fp;
    }
  }

  // Coverage statistics: MT/ML cutoffs and fragmentations.
  for (size_t i = 0; i < gt.size(); ++i) {
    const auto& cover = gt_cover[i];
    const long present = static_cast<long>(cover.size());
    const long hit = std::count(cover.begin(), cover.end(), char(1));
    const double ratio = present > 0 ? static_cast<double>(hit) / present : 0.0;
    if (ratio > 0.8) ++res.mt;
    if (ratio < 0.2) ++res.ml;
    bool in_gap = false;
    bool seen_hit = false;
    for (char c : cover) {
      if (c) {
        if (seen_hit && in_gap) ++res.fm;
        seen_hit = true;
        in_gap = false;
      } else if (seen_hit) {
        in_gap = true;
      }
    }
  }

  res.mota = 1.0 - static_cast<double>(res.fn + res.fp + res.ids) /
                       static_cast<double>(res.gt_boxes);
  res.motp = res.matches > 0 ? motp_sum / static_cast<double>(res.matches) : 0.0;
  return res;
}

double evaluate_idf1(const std::vector<TrackRecord>& gt,
                     const std::vector<TrackRecord>& pred, double iou_gate) {
  long gt_boxes = 0, pred_boxes = 0;
  for (const TrackRecord& g : gt) gt_boxes += static_cast<long>(g.boxes.size());
  for (const TrackRecord& p : pred) pred_boxes += static_cast<long>(p.boxes.size());
  if (gt_boxes == 0) return pred_boxes == 0 ? 1.0 : 0.0;

  // idtp(g,p): frames where both are present and overlap at the gate. The
  // denominator 2*IDTP + IDFP + IDFN = gt_boxes + pred_boxes is constant, so
  // maximizing total IDTP over an injective trajectory matching suffices.
  std::vector<std::vector<long>> idtp(gt.size(), std::vector<long>(pred.size(), 0));
  long max_w = 0;
  for (size_t i = 0; i < gt.size(); ++i) {
    for (size_t j = 0; j < pred.size(); ++j) {
      for (const auto& [frame, gbox] : gt[i].boxes) {
        const auto it = pred[j].boxes.find(frame);
        if (it != pred[j].boxes.end() && iou(gbox, it->second) >= iou_gate) {
          ++idtp[i][j];
        }
      }
      max_w = std::max(max_w, idtp[i][j]);
    }
  }
  CostMatrix m(static_cast<int>(gt.size()), static_cast<int>(pred.size()));
  for (int r = 0; r < m.rows; ++r) {
    for (int c = 0; c < m.cols; ++c) {
      m.at(r, c) = static_cast<double>(max_w - idtp[static_cast<size_t>(r)][static_cast<size_t>(c)]);
    }
  }
  long total_idtp = 0;
  for (const auto& [r, c] : hungarian_solve(m).pairs) {
    total_idtp += idtp[static_cast<size_t>(r)][static_cast<size_t>(c)];
  }
  return 2.0 * static_cast<double>(total_idtp) /
         static_cast<double>(gt_boxes + pred_boxes);
}

double tracklet_iou(const TrackRecord& a, const TrackRecord& b) {
  std::set<int> frames;
  for (const auto& [f, _] : a.boxes) frames.insert(f);
  for (const auto& [f, _] : b.boxes) frames.insert(f);
  if (frames.empty()) return 0.0;
  double sum = 0.0;
  for (int f : frames) {
    const auto ia = a.boxes.find(f);
    const auto ib = b.boxes.find(f);
    if (ia != a.boxes.end() && ib != b.boxes.end()) {
      sum += iou(ia->second, ib->second);
    }
  }
  return sum / static_cast<double>(frames.size());
}

ApReport evaluate_track_ap(const std::vector<TrackRecord>& gt,
                           const std::vector<TrackRecord>& pred) {
  ApReport report;
  report.thresholds = {0.25, 0.5, 0.75};

  std::set<int> classes;
  for (const TrackRecord& g : gt) classes.insert(g.class_id);

  for (size_t ti = 0; ti < report.thresholds.size(); ++ti) {
    const double tau = report.thresholds[ti];
    double class_sum = 0.0;
    for (int cls : classes) {
      std::vector<const TrackRecord*> g_cls, p_cls;
      for (const TrackRecord& g : gt) {
        if (g.class_id == cls) g_cls.push_back(&g);
      }
      for (const TrackRecord& p : pred) {
        if (p.class_id == cls) p_cls.push_back(&p);
      }
      std::sort(p_cls.begin(), p_cls.end(), [](const TrackRecord* a, const TrackRecord* b) {
        if (a->confidence != b->confidence) return a->confidence > b->confidence;
        return a->id < b->id;
      });

      // Greedy: each prediction takes the unclaimed GT tracklet with the
      // highest tracklet IoU; correct iff strictly above tau.
      std::vector<char> claimed(g_cls.size(), 0);
      std::vector<char> is_tp(p_cls.size(), 0);
      for (size_t pi = 0; pi < p_cls.size(); ++pi) {
        int best = -1;
        double best_iou = -1.0;
        for (size_t gi = 0; gi < g_cls.size(); ++gi) {
          if (claimed[gi]) continue;
          const double v = tracklet_iou(*p_cls[pi], *g_cls[gi]);
          if (v > best_iou) {
            best_iou = v;
            best = static_cast<int>(gi);
          }
        }
        if (best >= 0 && best_iou > tau) {
          claimed[static_cast<size_t>(best)] = 1;
          is_tp[pi] = 1;
        }
      }

      // 101-point interpolated AP.
      const double n_gt = static_cast<double>(g_cls.size());
      std::vector<double> precision, recall;
      long tp = 0;
      for (size_t pi = 0; pi < p_cls.size(); ++pi) {
        if (is_tp[pi]) ++tp;
        precision.push_back(static_cast<double>(tp) / static_cast<double>(pi + 1));
        recall.push_back(static_cast<double>(tp) / n_gt);
      }
      double ap = 0.0;
      for (int k = 0; k <= 100; ++k) {
        const double r = static_cast<double>(k) / 100.0;
        double best_p = 0.0;
        for (size_t pi = 0; pi < precision.size(); ++pi) {
          if (recall[pi] >= r) best_p = std::max(best_p, precision[pi]);
        }
        ap += best_p;
      }
      ap /= 101.0;

      report.per_class[cls].resize(report.thresholds.size(), 0.0);
      report.per_class[cls][ti] = ap;
      class_sum += ap;
    }
    report.map_per_threshold.push_back(classes.empty() ? 0.0
                                                       : class_sum / static_cast<double>(classes.size()));
  }

  double total = 0.0;
  for (double v : report.map_per_threshold) total += v;
  report.mean_ap = report.map_per_threshold.empty()
                       ? 0.0
                       : total / static_cast<double>(report.map_per_threshold.size());
  for (const auto& [cls, aps] : report.per_class) {
    double s = 0.0;
    for (double v : aps) s += v;
    report.class_mean[cls] = aps.empty() ? 0.0 : s / static_cast<double>(aps.size());
  }
  return report;
}

std::string format_report_table(const EvalReport& report) {
  std::ostringstream os;
  char buf[512];
  if (report.clear || report.idf1) {
    os << "  MOTA   MOTP   IDF1     MT     ML      FP      FN     IDS      FM\n";
    const ClearResult c = report.clear.value_or(ClearResult{});
    const double idf1 = report.idf1.value_or(0.0);
    std::snprintf(buf, sizeof(buf),
                  "%6.1f %6.1f %6.1f %6d %6d %7ld %7ld %7ld %7ld\n", c.mota * 100.0,
                  c.motp * 100.0, idf1 * 100.0, c.mt, c.ml, c.fp, c.fn, c.ids, c.fm);
    os << buf;
  }
  if (report.ap) {
    const ApReport& ap = *report.ap;
    os << "\n   class      AP";
    for (double t : ap.thresholds) {
      std::snprintf(buf, sizeof(buf), "  AP_%.2f", t);
      os << buf;
    }
    os << "\n";
    for (const auto& [cls, aps] : ap.per_class) {
      std::snprintf(buf, sizeof(buf), "%8d %7.2f", cls, ap.class_mean.at(cls) * 100.0);
      os << buf;
      for (double v : aps) {
        std::snprintf(buf, sizeof(buf), " %7.2f", v * 100.0);
        os << buf;
      }
      os << "\n";
    }
    std::snprintf(buf, sizeof(buf), "%8s %7.2f", "all", ap.mean_ap * 100.0);
    os << buf;
    for (double v : ap.map_per_threshold) {
      std::snprintf(buf, sizeof(buf), " %7.2f", v * 100.0);
      os << buf;
    }
    os << "\n";
  }
  return os.str();
}

std::string format_report_kv(const EvalReport& report) {
  std::ostringstream os;
  char buf[128];
  auto emit = [&](const char* key, double v) {
    std::snprintf(buf, sizeof(buf), "%s=%.6f\n", key, v);
    os << buf;
  };
  if (report.clear) {
    const ClearResult& c = *report.clear;
    emit("MOTA", c.mota);
    emit("MOTP", c.motp);
    os << "MT=" << c.mt << "\nML=" << c.ml << "\nFP=" << c.fp << "\nFN=" << c.fn
       << "\nIDS=" << c.ids << "\nFM=" << c.fm << "\n";
  }
  if (report.idf1) emit("IDF1", *report.idf1);
  if (report.ap) {
    const ApReport& ap = *report.ap;
    emit("AP", ap.mean_ap);
    for (size_t i = 0; i < ap.thresholds.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "AP_%.2f=%.6f\n", ap.thresholds[i],
                    ap.map_per_threshold[i]);
      os << buf;
    }
    for (const auto& [cls, mean] : ap.class_mean) {
      std::snprintf(buf, sizeof(buf), "AP_class_%d=%.6f\n", cls, mean);
      os << buf;
    }
  }
  return os.str();
}

}  // namespace flowtrack
