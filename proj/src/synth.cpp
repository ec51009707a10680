#include "flowtrack/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "flowtrack/motion.hpp"

namespace flowtrack {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 step keeps the four streams decorrelated.
  std::uint64_t z = seed + stream * 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

BBox clip_to_image(double x1, double y1, double x2, double y2, int w, int h) {
  if (x2 < x1) std::swap(x1, x2);
  if (y2 < y1) std::swap(y1, y2);
  x1 = std::clamp(x1, 0.0, static_cast<double>(w));
  x2 = std::clamp(x2, 0.0, static_cast<double>(w));
  y1 = std::clamp(y1, 0.0, static_cast<double>(h));
  y2 = std::clamp(y2, 0.0, static_cast<double>(h));
  return BBox(x1, y1, x2, y2);
}

std::vector<double> random_normal_vec(Rng& rng, int dim) {
  std::vector<double> v(static_cast<size_t>(dim));
  for (double& x : v) x = rng.normal();
  return v;
}

}  // namespace

void ScenarioSpec::validate() const {
  if (frames < 1) throw std::invalid_argument("ScenarioSpec: frames must be >= 1");
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("ScenarioSpec: image size must be positive");
  }
  if (!(drop_prob >= 0.0 && drop_prob <= 1.0)) {
    throw std::invalid_argument("ScenarioSpec: drop_prob must be in [0,1]");
  }
  if (fp_rate < 0.0) throw std::invalid_argument("ScenarioSpec: fp_rate must be >= 0");
  if (loc_jitter < 0.0 || sigma_world < 0.0 || embed_noise < 0.0) {
    throw std::invalid_argument("ScenarioSpec: noise sigmas must be >= 0");
  }
  if (embed_dim < 2) throw std::invalid_argument("ScenarioSpec: embed_dim must be >= 2");
  for (const ObjectSpec& o : objects) {
    if (o.birth < 1 || (o.death != 0 && o.death < o.birth)) {
      throw std::invalid_argument("ScenarioSpec: invalid object lifetime");
    }
  }
  for (const PanEvent& p : camera_pan) {
    if (p.frame < 2) {
      throw std::invalid_argument("ScenarioSpec: pan events start at frame 2");
    }
  }
}

SequenceBundle generate(const ScenarioSpec& spec) {
  spec.validate();
  SequenceBundle bundle;
  bundle.width = spec.width;
  bundle.height = spec.height;
  bundle.frames = spec.frames;

  Rng rng_world(mix_seed(spec.seed, 1));
  Rng rng_det(mix_seed(spec.seed, 2));
  Rng rng_fp(mix_seed(spec.seed, 3));
  Rng rng_embed(mix_seed(spec.seed, 4));

  // Cumulative camera pan per frame.
  std::vector<std::pair<double, double>> pan(static_cast<size_t>(spec.frames) + 1,
                                             {0.0, 0.0});
  std::vector<std::pair<double, double>> cum(static_cast<size_t>(spec.frames) + 1,
                                             {0.0, 0.0});
  for (const PanEvent& p : spec.camera_pan) {
    if (p.frame <= spec.frames) {
      pan[static_cast<size_t>(p.frame)].first += p.dx;
      pan[static_cast<size_t>(p.frame)].second += p.dy;
    }
  }
  for (int f = 1; f <= spec.frames; ++f) {
    cum[static_cast<size_t>(f)] = {cum[static_cast<size_t>(f - 1)].first +
                                       pan[static_cast<size_t>(f)].first,
                                   cum[static_cast<size_t>(f - 1)].second +
                                       pan[static_cast<size_t>(f)].second};
  }

  // Ground truth: world kinematics composed with cumulative pan.
  const int n_obj = static_cast<int>(spec.objects.size());
  std::vector<TrackRecord> gt(static_cast<size_t>(n_obj));
  std::vector<std::pair<double, double>> world_off(static_cast<size_t>(n_obj),
                                                   {0.0, 0.0});
  for (int i = 0; i < n_obj; ++i) {
    gt[static_cast<size_t>(i)].id = i + 1;
    gt[static_cast<size_t>(i)].class_id = spec.class_id;
  }
  for (int f = 1; f <= spec.frames; ++f) {
    for (int i = 0; i < n_obj; ++i) {
      const ObjectSpec& o = spec.objects[static_cast<size_t>(i)];
      const int death = o.death == 0 ? spec.frames : o.death;
      if (f < o.birth || f > death) continue;
      auto& off = world_off[static_cast<size_t>(i)];
      if (f > o.birth) {
        off.first += o.vx;
        off.second += o.vy;
        if (spec.sigma_world > 0.0) {
          off.first += rng_world.normal() * spec.sigma_world;
          off.second += rng_world.normal() * spec.sigma_world;
        }
      } else {
        off = {0.0, 0.0};
      }
      const double dx = off.first + cum[static_cast<size_t>(f)].first;
      const double dy = off.second + cum[static_cast<size_t>(f)].second;
      gt[static_cast<size_t>(i)].boxes[f] =
          clip_to_image(o.box0.x1 + dx, o.box0.y1 + dy, o.box0.x2 + dx,
                        o.box0.y2 + dy, spec.width, spec.height);
    }
  }
  bundle.gt = gt;

  // Detection geometry pass: drop draws, corner jitter, scores, then
  // Poisson false positives. Embedding vectors are filled in afterwards.
  struct PendingEmbedding {
    int object = -1;  // -1 marks a false positive
  };
  std::vector<PendingEmbedding> pending;
  for (int f = 1; f <= spec.frames; ++f) {
    std::vector<Detection>& frame_dets = bundle.detections[f];
    for (int i = 0; i < n_obj; ++i) {
      const auto it = gt[static_cast<size_t>(i)].boxes.find(f);
      if (it == gt[static_cast<size_t>(i)].boxes.end()) continue;
      if (rng_det.uniform() < spec.drop_prob) continue;
      const BBox& g = it->second;
      double x1 = g.x1, y1 = g.y1, x2 = g.x2, y2 = g.y2;
      if (spec.loc_jitter > 0.0) {
        x1 += rng_det.normal() * spec.loc_jitter;
        y1 += rng_det.normal() * spec.loc_jitter;
        x2 += rng_det.normal() * spec.loc_jitter;
        y2 += rng_det.normal() * spec.loc_jitter;
      }
      const double score = rng_det.uniform(0.6, 1.0);
      const BBox box = clip_to_image(x1, y1, x2, y2, spec.width, spec.height);
      if (box.width() <= 0.0 || box.height() <= 0.0) continue;
      Detection d;
      d.frame = f;
      d.bbox = box;
      d.score = score;
      d.class_id = spec.class_id;
      d.det_index = static_cast<int>(frame_dets.size());
      d.embedding_id = static_cast<int>(pending.size());
      pending.push_back({i});
      frame_dets.push_back(std::move(d));
    }
    const int n_fp = rng_fp.poisson(spec.fp_rate);
    for (int k = 0; k < n_fp; ++k) {
      const double w = rng_fp.uniform(10.0, 60.0);
      const double h = rng_fp.uniform(10.0, 60.0);
      const double x1 = rng_fp.uniform(0.0, std::max(1.0, spec.width - w));
      const double y1 = rng_fp.uniform(0.0, std::max(1.0, spec.height - h));
      const double score = rng_fp.uniform(0.1, 0.6);
      Detection d;
      d.frame = f;
      d.bbox = clip_to_image(x1, y1, x1 + w, y1 + h, spec.width, spec.height);
      d.score = score;
      d.class_id = spec.class_id;
      d.det_index = static_cast<int>(frame_dets.size());
      d.embedding_id = static_cast<int>(pending.size());
      pending.push_back({-1});
      frame_dets.push_back(std::move(d));
    }
  }

  // Embedding pass: draw identity base vectors plus per-detection noise and
  // verify separation empirically; regenerate everything on a violation.
  bundle.embeddings.dim = spec.embed_dim;
  for (int attempt = 0;; ++attempt) {
    std::vector<Embedding> identity;
    identity.reserve(static_cast<size_t>(n_obj));
    for (int i = 0; i < n_obj; ++i) {
      identity.emplace_back(random_normal_vec(rng_embed, spec.embed_dim));
    }
    std::vector<Embedding> entries;
    entries.reserve(pending.size());
    for (const PendingEmbedding& p : pending) {
      if (p.object < 0) {
        entries.emplace_back(random_normal_vec(rng_embed, spec.embed_dim));
        continue;
      }
      std::vector<double> e = identity[static_cast<size_t>(p.object)].values();
      for (double& x : e) x += rng_embed.normal() * spec.embed_noise;
      entries.emplace_back(std::move(e));
    }
    double max_intra = 0.0;
    double min_inter = 2.0;
    for (size_t a = 0; a < pending.size(); ++a) {
      if (pending[a].object < 0) continue;
      for (size_t b = a + 1; b < pending.size(); ++b) {
        if (pending[b].object < 0) continue;
        const double dist = cosine_distance(entries[a], entries[b]);
        if (pending[a].object == pending[b].object) {
          max_intra = std::max(max_intra, dist);
        } else {
          min_inter = std::min(min_inter, dist);
        }
      }
    }
    if (max_intra + 0.05 < min_inter || n_obj < 2) {
      bundle.embeddings.entries = std::move(entries);
      break;
    }
    if (attempt >= 63) {
      throw std::runtime_error("generate: could not separate identity embeddings");
    }
  }

  // Per-frame flow carries camera motion only; object ego-motion is left to
  // stress the IoU gates.
  std::map<int, MotionField> flow;
  for (int f = 2; f <= spec.frames; ++f) {
    flow[f] = MotionField::constant(pan[static_cast<size_t>(f)].first,
                                    pan[static_cast<size_t>(f)].second);
  }
  bundle.flow = std::make_shared<ScheduleMotionSource>(std::move(flow));
  return bundle;
}

ScenarioSpec make_scenario(const std::string& name, std::uint64_t seed,
                           int frames, int objects) {
  ScenarioSpec spec;
  spec.frames = frames;
  spec.seed = seed;
  spec.width = 640;
  spec.height = 360;

  auto place_grid = [&](double box_w, double box_h, double spacing, double margin) {
    spec.objects.clear();
    const int per_row =
        std::max(1, static_cast<int>((spec.width - 2.0 * margin) / spacing));
    for (int i = 0; i < objects; ++i) {
      const double x = margin + spacing * (i % per_row);
      const double y = margin + spacing * (i / per_row);
      ObjectSpec o;
      o.box0 = BBox(x, y, x + box_w, y + box_h);
      spec.objects.push_back(o);
    }
  };

  if (name == "static") {
    place_grid(40.0, 40.0, 100.0, 80.0);
  } else if (name == "pan") {
    // Camera motion bursts every 4th frame, cycling through four directions
    // so positions stay bounded; magnitude 0.85 of the box width defeats
    // plain IoU matching on burst frames.
    place_grid(40.0, 40.0, 100.0, 80.0);
    const double mag = 34.0;
    const double dirs[4][2] = {{mag, 0.0}, {0.0, mag}, {-mag, 0.0}, {0.0, -mag}};
    int k = 0;
    for (int f = 5; f <= frames; f += 4) {
      spec.camera_pan.push_back({f, dirs[k % 4][0], dirs[k % 4][1]});
      ++k;
    }
    spec.loc_jitter = 0.5;
    spec.drop_prob = 0.02;
  } else if (name == "dropout") {
    place_grid(40.0, 40.0, 100.0, 80.0);
    for (size_t i = 0; i < spec.objects.size(); ++i) {
      spec.objects[i].vx = (i % 2 == 0) ? 1.5 : -1.5;
      spec.objects[i].vy = (i % 3 == 0) ? 1.0 : -1.0;
    }
    spec.drop_prob = 0.2;
    spec.loc_jitter = 0.5;
    spec.fp_rate = 0.1;
  } else if (name == "crowded") {
    // A tight cluster: four corners of an 18px square plus its center, with
    // 60px boxes, keeps every pairwise IoU above 0.3.
    spec.objects.clear();
    const double cx = 200.0, cy = 130.0, side = 18.0, bw = 60.0;
    const double offs[5][2] = {
        {0.0, 0.0}, {side, 0.0}, {0.0, side}, {side, side}, {side / 2, side / 2}};
    const int n = std::max(5, objects);
    for (int i = 0; i < n; ++i) {
      const double x = cx + offs[i % 5][0] + 150.0 * (i / 5);
      const double y = cy + offs[i % 5][1];
      ObjectSpec o;
      o.box0 = BBox(x, y, x + bw, y + bw);
      spec.objects.push_back(o);
    }
    spec.loc_jitter = 8.0;
    spec.drop_prob = 0.15;
    spec.embed_noise = 0.05;
  } else {
    throw std::invalid_argument("make_scenario: unknown scenario '" + name + "'");
  }
  return spec;
}

void write_bundle(const SequenceBundle& bundle, const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path target(dir);
  const fs::path staging = target.string() + ".partial";
  fs::remove_all(staging);
  fs::create_directories(staging / "flow");

  // VisDrone 10-field rows for GT and detections.
  {
    std::ostringstream os;
    char buf[256];
    for (const TrackRecord& t : bundle.gt) {
      for (const auto& [frame, box] : t.boxes) {
        std::snprintf(buf, sizeof(buf), "%d,%ld,%.6f,%.6f,%.6f,%.6f,1,%d,0,0\n",
                      frame, t.id, box.x1, box.y1, box.width(), box.height(),
                      t.class_id);
        os << buf;
      }
    }
    std::ofstream f(staging / "gt.txt");
    f << os.str();
  }
  {
    std::ostringstream os;
    char buf[256];
    for (const auto& [frame, dets] : bundle.detections) {
      for (const Detection& d : dets) {
        std::snprintf(buf, sizeof(buf), "%d,-1,%.6f,%.6f,%.6f,%.6f,%.6f,%d,-1,-1\n",
                      frame, d.bbox.x1, d.bbox.y1, d.bbox.width(), d.bbox.height(),
                      d.score, d.class_id);
        os << buf;
      }
    }
    std::ofstream f(staging / "det.txt");
    f << os.str();
  }

  write_seqinfo({bundle.width, bundle.height, bundle.frames},
                (staging / "seqinfo.txt").string());
  write_embeddings_csv(bundle.embeddings, bundle.detections,
                       (staging / "embeddings.csv").string());

  if (bundle.flow) {
    for (int f = 2; f <= bundle.frames; ++f) {
      const MotionField field = bundle.flow->field_for(f);
      const size_t n =
          static_cast<size_t>(bundle.width) * static_cast<size_t>(bundle.height);
      std::vector<float> u(n), v(n);
      for (int y = 0; y < bundle.height; ++y) {
        for (int x = 0; x < bundle.width; ++x) {
          const auto d = field.sample(x, y);
          u[static_cast<size_t>(y) * bundle.width + x] = static_cast<float>(d[0]);
          v[static_cast<size_t>(y) * bundle.width + x] = static_cast<float>(d[1]);
        }
      }
      char name[32];
      std::snprintf(name, sizeof(name), "%06d.flo", f);
      write_flo(
          MotionField::dense(bundle.width, bundle.height, std::move(u), std::move(v)),
          (staging / "flow" / name).string());
    }
  }

  fs::remove_all(target);
  fs::rename(staging, target);
}

std::vector<std::pair<std::string, TrackerConfig>> default_ablation_ladder(
    const TrackerConfig& base) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::pair<std::string, TrackerConfig>> grid;

  TrackerConfig c = base;
  c.association = AssociationMode::greedy;
  c.motion_policy.mode = MotionMode::none;
  c.sigma_app = inf;
  c.t_max = 0;
  grid.emplace_back("iou-tracker", c);

  c.association = AssociationMode::hungarian;
  grid.emplace_back("+ hungarian", c);

  c.motion_policy.mode = MotionMode::always_flow;
  grid.emplace_back("+ motion estimation", c);

  c.t_max = base.t_max;
  grid.emplace_back("+ auxiliary tracker", c);

  c.sigma_app = base.sigma_app;
  grid.emplace_back("+ cascade matching", c);
  return grid;
}

std::vector<AblationRow> run_ablation(
    const SequenceBundle& bundle,
    const std::vector<std::pair<std::string, TrackerConfig>>& grid) {
  std::vector<AblationRow> rows;
  for (const auto& [label, cfg] : grid) {
    const auto tracklets = run_sequence(bundle.detections, bundle.frames,
                                        bundle.flow.get(), &bundle.embeddings, cfg);
    const auto pred = to_track_records(tracklets);
    AblationRow row;
    row.label = label;
    row.cfg = cfg;
    row.report.clear = evaluate_clear(bundle.gt, pred, 0.5, bundle.ignore);
    row.report.idf1 = evaluate_idf1(bundle.gt, pred);
    row.report.ap = evaluate_track_ap(bundle.gt, pred);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_ablation_table(const std::vector<AblationRow>& rows) {
  std::ostringstream os;
  char buf[256];
  os << "method                 MOTA   MOTP   IDF1     MT     ML      FP      FN "
        "    IDS      FM      AP\n";
  for (const AblationRow& row : rows) {
    const ClearResult& c = row.report.clear.value();
    std::snprintf(buf, sizeof(buf),
                  "%-20s %6.1f %6.1f %6.1f %6d %6d %7ld %7ld %7ld %7ld %7.2f\n",
                  row.label.c_str(), c.mota * 100.0, c.motp * 100.0,
                  row.report.idf1.value() * 100.0, c.mt, c.ml, c.fp, c.fn, c.ids,
                  c.fm, row.report.ap.value().mean_ap * 100.0);
    os << buf;
  }
  return os.str();
}

}  // namespace flowtrack
