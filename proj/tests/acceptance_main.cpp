// Acceptance suite: one pass/fail line per criterion. Exits nonzero if any
// criterion fails. The first argument is the CLI binary path (used by the
// determinism checks).

#include <chrono>
#include <climits>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>
#include <sys/wait.h>
#include <unistd.h>

#include "flowtrack/io.hpp"
#include "flowtrack/metrics.hpp"
#include "flowtrack/motion.hpp"
#include "flowtrack/synth.hpp"
#include "flowtrack/tracker.hpp"
#include "support/oracles.hpp"

using namespace flowtrack;
namespace fs = std::filesystem;

namespace {

std::string g_cli;
fs::path g_work;
int g_failures = 0;

void report(int criterion, const std::string& name, bool ok, const std::string& detail) {
  std::printf("%s criterion %2d: %s (%s)\n", ok ? "PASS" : "FAIL", criterion,
              name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args, const std::string& stdout_file = "/dev/null") {
  const std::string cmd = g_cli + " " + args + " > " + stdout_file + " 2>/dev/null";
  return WEXITSTATUS(std::system(cmd.c_str()));
}

// ---------------------------------------------------------------------------
// 1. Geometry oracle

void criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> c(0, 200);
  auto make = [&] {
    int x1 = c(rng), x2 = c(rng), y1 = c(rng), y2 = c(rng);
    if (x2 < x1) std::swap(x1, x2);
    if (y2 < y1) std::swap(y1, y2);
    return BBox(x1, y1, x2, y2);
  };
  int bad = 0;
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const BBox a = make(), b = make();
    const double diff = std::fabs(iou(a, b) - oracle::rasterized_iou(a, b));
    worst = std::max(worst, diff);
    if (diff > 1e-6) ++bad;
  }
  const double dt = seconds_since(t0);
  char detail[128];
  std::snprintf(detail, sizeof(detail), "10000 pairs, max |diff| %.2e, %.2f s", worst, dt);
  report(1, "iou matches the pixel-rasterization oracle", bad == 0 && dt < 10.0, detail);
}

// ---------------------------------------------------------------------------
// 2. Assignment oracle

void criterion_2() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> dim(1, 7);
  std::uniform_int_distribution<int> int_cost(0, 20);
  std::uniform_real_distribution<double> real_cost(0.0, 5.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    CostMatrix m(dim(rng), dim(rng));
    const bool integral = trial % 2 == 0;
    for (int r = 0; r < m.rows; ++r) {
      for (int c = 0; c < m.cols; ++c) {
        if (unit(rng) < 0.2) continue;  // infeasible
        m.at(r, c) = integral ? static_cast<double>(int_cost(rng)) : real_cost(rng);
      }
    }
    const auto got = hungarian_solve(m);
    const auto want = oracle::brute_force_assignment(m);
    const double tol = integral ? 0.0 : 1e-9;
    if (static_cast<int>(got.pairs.size()) != want.cardinality ||
        std::fabs(got.total_cost - want.cost) > tol) {
      ++bad;
    }
  }
  const double dt = seconds_since(t0);
  char detail[128];
  std::snprintf(detail, sizeof(detail), "1000 matrices <=7x7, %d mismatches, %.2f s", bad, dt);
  report(2, "hungarian_solve equals the brute-force minimum", bad == 0 && dt < 30.0, detail);
}

// ---------------------------------------------------------------------------
// 3. Flow/warp keystone

void criterion_3() {
  auto spec = make_scenario("pan", 1);
  spec.loc_jitter = 0.0;
  spec.drop_prob = 0.0;  // keystone wants the clean geometry
  const auto bundle = generate(spec);
  double worst = 0.0;
  long pairs = 0;
  for (const auto& t : bundle.gt) {
    for (const auto& [frame, box] : t.boxes) {
      const auto next = t.boxes.find(frame + 1);
      if (next == t.boxes.end()) continue;
      const BBox warped = warp_bbox(box, bundle.flow->field_for(frame + 1));
      worst = std::max({worst, std::fabs(warped.x1 - next->second.x1),
                        std::fabs(warped.y1 - next->second.y1),
                        std::fabs(warped.x2 - next->second.x2),
                        std::fabs(warped.y2 - next->second.y2)});
      ++pairs;
    }
  }
  char detail[128];
  std::snprintf(detail, sizeof(detail), "%ld frame pairs, max |err| %.2e", pairs, worst);
  report(3, "emitted flow warps GT boxes exactly one frame forward",
         pairs > 0 && worst <= 1e-9, detail);
}

// ---------------------------------------------------------------------------
// Shared helpers for the directional criteria

struct RunMetrics {
  ClearResult clear;
  double idf1 = 0.0;
};

RunMetrics run_and_score(const SequenceBundle& bundle, const TrackerConfig& cfg) {
  const auto out = run_sequence(bundle.detections, bundle.frames,
                                bundle.flow.get(), &bundle.embeddings, cfg);
  const auto pred = to_track_records(out);
  RunMetrics m;
  m.clear = evaluate_clear(bundle.gt, pred, 0.5, bundle.ignore);
  m.idf1 = evaluate_idf1(bundle.gt, pred);
  return m;
}

// ---------------------------------------------------------------------------
// 4. Motion-compensation direction

void criterion_4() {
  double ids_base = 0, ids_flow = 0, mota_base = 0, mota_flow = 0;
  long min_base_ids = LONG_MAX;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto bundle = generate(make_scenario("pan", seed));
    TrackerConfig base;
    base.motion_policy.mode = MotionMode::none;
    TrackerConfig flow;
    flow.motion_policy.mode = MotionMode::always_flow;
    const auto mb = run_and_score(bundle, base);
    const auto mf = run_and_score(bundle, flow);
    ids_base += static_cast<double>(mb.clear.ids);
    ids_flow += static_cast<double>(mf.clear.ids);
    mota_base += mb.clear.mota;
    mota_flow += mf.clear.mota;
    min_base_ids = std::min(min_base_ids, mb.clear.ids);
  }
  ids_base /= 10;
  ids_flow /= 10;
  mota_base /= 10;
  mota_flow /= 10;
  const bool ok = ids_flow < ids_base && (mota_flow - mota_base) >= 0.05 && min_base_ids >= 1;
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "IDS %.1f -> %.1f, MOTA %.3f -> %.3f over 10 seeds", ids_base,
                ids_flow, mota_base, mota_flow);
  report(4, "flow compensation cuts IDS and lifts MOTA on the pan scenario", ok, detail);
}

// ---------------------------------------------------------------------------
// 5. Auxiliary-tracker direction

void criterion_5() {
  double fm_off = 0, fm_on = 0, ids_off = 0, ids_on = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto bundle = generate(make_scenario("dropout", seed));
    TrackerConfig off;
    off.t_max = 0;
    TrackerConfig on;
    on.t_max = 3;
    const auto mo = run_and_score(bundle, off);
    const auto mn = run_and_score(bundle, on);
    fm_off += static_cast<double>(mo.clear.fm);
    fm_on += static_cast<double>(mn.clear.fm);
    ids_off += static_cast<double>(mo.clear.ids);
    ids_on += static_cast<double>(mn.clear.ids);
  }
  fm_off /= 10;
  fm_on /= 10;
  ids_off /= 10;
  ids_on /= 10;
  const bool ok = fm_on < fm_off && ids_on < ids_off;
  char detail[160];
  std::snprintf(detail, sizeof(detail), "FM %.1f -> %.1f, IDS %.1f -> %.1f over 10 seeds",
                fm_off, fm_on, ids_off, ids_on);
  report(5, "coasting reduces fragmentations and IDS on the dropout scenario", ok, detail);
}

// ---------------------------------------------------------------------------
// 6. Cascade-matching direction

void criterion_6() {
  // Sanity on the scenario shape: at least 4 objects with pairwise IoU >= 0.3.
  {
    const auto spec = make_scenario("crowded", 1);
    int dense = 0;
    for (size_t i = 0; i < 5 && i < spec.objects.size(); ++i) {
      bool all = true;
      for (size_t j = 0; j < 5 && j < spec.objects.size(); ++j) {
        if (i != j && iou(spec.objects[i].box0, spec.objects[j].box0) < 0.3) all = false;
      }
      dense += all;
    }
    if (dense < 4) {
      report(6, "appearance gating cuts IDS on the crowded scenario", false,
             "scenario lacks a >=4 object cluster at pairwise IoU >= 0.3");
      return;
    }
  }
  double ids_iou = 0, ids_app = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto bundle = generate(make_scenario("crowded", seed));
    TrackerConfig iou_only;
    iou_only.sigma_app = 2.0;  // appearance gate never rejects
    iou_only.stage2_cost = Stage2Cost::iou;
    TrackerConfig app;
    app.sigma_app = 0.4;
    app.stage2_cost = Stage2Cost::appearance;
    ids_iou += static_cast<double>(run_and_score(bundle, iou_only).clear.ids);
    ids_app += static_cast<double>(run_and_score(bundle, app).clear.ids);
  }
  ids_iou /= 10;
  ids_app /= 10;
  char detail[128];
  std::snprintf(detail, sizeof(detail),
                "IDS %.1f (iou-only) -> %.1f (appearance) over 10 seeds", ids_iou, ids_app);
  report(6, "appearance gating cuts IDS on the crowded scenario", ids_app < ids_iou, detail);
}

// ---------------------------------------------------------------------------
// 7. Fast-variant trade-off

ScenarioSpec fast_spec(std::uint64_t seed) {
  ScenarioSpec spec;
  spec.frames = 100;
  spec.width = 320;
  spec.height = 180;
  spec.seed = seed;
  spec.embed_dim = 8;
  for (int i = 0; i < 8; ++i) {
    const double x = 40.0 + 45.0 * (i % 6);
    const double y = 40.0 + 48.0 * (i / 6);
    spec.objects.push_back({1, 0, BBox(x, y, x + 24, y + 24), 0.0, 0.0});
  }
  // Camera motion in exactly k = N/10 frames, magnitude 0.83 box width.
  const double mag = 20.0;
  const double dirs[4][2] = {{mag, 0}, {0, mag}, {-mag, 0}, {0, -mag}};
  for (int k = 0; k < 10; ++k) {
    spec.camera_pan.push_back({10 + 10 * k, dirs[k % 4][0], dirs[k % 4][1]});
  }
  return spec;
}

void criterion_7() {
  const auto spec = fast_spec(3);
  const auto bundle = generate(spec);
  const fs::path dir = g_work / "fast_bundle";
  write_bundle(bundle, dir.string());
  const auto dets = detections_by_frame(read_visdrone_csv((dir / "det.txt").string()));
  const int n = spec.frames;
  const int k = static_cast<int>(spec.camera_pan.size());

  auto run_mode = [&](MotionMode mode, long& loads, double& wall) {
    FloDirMotionSource flow((dir / "flow").string());
    TrackerConfig cfg;
    cfg.motion_policy.mode = mode;
    const auto t0 = std::chrono::steady_clock::now();
    const auto out = run_sequence(dets, n, &flow, nullptr, cfg);
    wall = seconds_since(t0);
    loads = flow.loads();
    const auto pred = to_track_records(out);
    return evaluate_clear(bundle.gt, pred).mota;
  };

  long loads_always = 0, loads_fast = 0;
  double wall_always = 0, wall_fast = 0;
  const double mota_always = run_mode(MotionMode::always_flow, loads_always, wall_always);
  const double mota_fast = run_mode(MotionMode::flow_on_trigger, loads_fast, wall_fast);

  const bool ok = loads_fast <= k + static_cast<int>(0.05 * n) &&
                  std::fabs(mota_fast - mota_always) <= 0.03 && wall_fast < wall_always;
  char detail[200];
  std::snprintf(detail, sizeof(detail),
                "loads %ld vs %ld (budget %d), MOTA %.3f vs %.3f, wall %.3fs vs %.3fs",
                loads_fast, loads_always, k + static_cast<int>(0.05 * n), mota_fast,
                mota_always, wall_fast, wall_always);
  report(7, "fast mode loads flow rarely at near-equal MOTA and lower wall time", ok, detail);
}

// ---------------------------------------------------------------------------
// 8. Baseline fidelity

std::map<int, std::vector<Detection>> random_small_sequence(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> frames(4, 14);
  std::uniform_int_distribution<int> objects(1, 4);
  std::uniform_int_distribution<int> cls(1, 2);
  std::uniform_real_distribution<double> coord(0.0, 150.0);
  std::uniform_real_distribution<double> vel(-4.0, 4.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const int n_frames = frames(rng);
  const int n_obj = objects(rng);
  struct Obj {
    double x, y, vx, vy, size;
    int cls;
  };
  std::vector<Obj> objs;
  for (int i = 0; i < n_obj; ++i) {
    objs.push_back({coord(rng), coord(rng), vel(rng), vel(rng),
                    12.0 + 10.0 * unit(rng), cls(rng)});
  }
  std::map<int, std::vector<Detection>> out;
  for (int f = 1; f <= n_frames; ++f) {
    auto& dets = out[f];
    for (auto& o : objs) {
      o.x += o.vx;
      o.y += o.vy;
      if (unit(rng) < 0.3) continue;
      Detection d;
      d.frame = f;
      d.bbox = BBox(o.x, o.y, o.x + o.size, o.y + o.size);
      d.score = unit(rng);
      d.class_id = o.cls;
      d.det_index = static_cast<int>(dets.size());
      dets.push_back(d);
    }
    if (unit(rng) < 0.35) {
      Detection d;
      d.frame = f;
      const double x = coord(rng), y = coord(rng);
      d.bbox = BBox(x, y, x + 14, y + 14);
      d.score = unit(rng);
      d.class_id = cls(rng);
      d.det_index = static_cast<int>(dets.size());
      dets.push_back(d);
    }
  }
  return out;
}

void criterion_8() {
  std::mt19937_64 rng(5150);
  TrackerConfig cfg;
  cfg.association = AssociationMode::greedy;
  cfg.motion_policy.mode = MotionMode::none;
  cfg.sigma_app = std::numeric_limits<double>::infinity();
  cfg.t_max = 0;
  cfg.sigma_nms = 1.0;

  int bad = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto dets = random_small_sequence(rng);
    const auto ours = run_sequence(dets, 0, nullptr, nullptr, cfg);
    const auto ref =
        oracle::reference_greedy_tracker(dets, cfg.sigma_iou1, cfg.sigma_h, cfg.t_min);
    const fs::path a = g_work / "base_ours.txt";
    const fs::path b = g_work / "base_ref.txt";
    write_results(ours, a.string());
    write_results(ref, b.string());
    if (slurp(a.string()) != slurp(b.string())) ++bad;
  }
  char detail[96];
  std::snprintf(detail, sizeof(detail), "100 random sequences, %d file mismatches", bad);
  report(8, "baseline mode is byte-identical to the reference greedy tracker", bad == 0, detail);
}

// ---------------------------------------------------------------------------
// 9. Metrics oracle on the golden suite

struct GoldenCase {
  std::string name;
  std::vector<TrackRecord> gt, pred;
};

TrackRecord mk_track(long id, int cls, int first, const std::vector<BBox>& boxes,
                     double conf = 1.0) {
  TrackRecord t;
  t.id = id;
  t.class_id = cls;
  t.confidence = conf;
  for (size_t i = 0; i < boxes.size(); ++i) t.boxes[first + static_cast<int>(i)] = boxes[i];
  return t;
}

std::vector<BBox> row_boxes(double x0, double y0, int n, double step = 20.0) {
  std::vector<BBox> out;
  for (int i = 0; i < n; ++i) {
    out.emplace_back(x0 + step * i, y0, x0 + step * i + 10, y0 + 10);
  }
  return out;
}

std::vector<GoldenCase> golden_suite() {
  std::vector<GoldenCase> cases;

  {
    GoldenCase g;
    g.name = "perfect two tracks";
    g.gt = {mk_track(1, 1, 1, row_boxes(0, 0, 5)), mk_track(2, 1, 1, row_boxes(0, 100, 5))};
    g.pred = g.gt;
    g.pred[0].id = 10;
    g.pred[1].id = 11;
    cases.push_back(g);
  }
  {
    GoldenCase g;
    g.name = "worked MOTA 0.6";
    g.gt = {mk_track(1, 1, 1, row_boxes(0, 0, 5)), mk_track(2, 1, 1, row_boxes(0, 200, 5))};
    g.pred = {mk_track(11, 1, 1, row_boxes(0, 0, 3), 0.9),
              mk_track(12, 1, 4, row_boxes(60, 0, 2), 0.8),
              mk_track(13, 1, 1, row_boxes(0, 200, 3), 0.7),
              mk_track(14, 1, 2, {BBox(400, 400, 410, 410)}, 0.6)};
    cases.push_back(g);
  }
  {
    GoldenCase g;
    g.name = "worked IDF1 0.5 split";
    g.gt = {mk_track(1, 1, 1, row_boxes(0, 0, 10))};
    g.pred = {mk_track(21, 1, 1, row_boxes(0, 0, 5), 0.9),
              mk_track(22, 1, 6, row_boxes(100, 0, 5), 0.8)};
    cases.push_back(g);
  }
  {
    GoldenCase g;
    g.name = "all misses";
    g.gt = {mk_track(1, 1, 1, row_boxes(0, 0, 6))};
    cases.push_back(g);
  }
  {
    GoldenCase g;
    g.name = "swap identities mid-sequence";
    g.gt = {mk_track(1, 1, 1, row_boxes(0, 0, 6)), mk_track(2, 1, 1, row_boxes(0, 50, 6))};
    auto pa = mk_track(31, 1, 1, row_boxes(0, 0, 3), 0.9);
    auto pb = mk_track(32, 1, 1, row_boxes(0, 50, 3), 0.8);
    const auto ra = row_boxes(0, 0, 6);
    const auto rb = row_boxes(0, 50, 6);
    for (int f = 4; f <= 6; ++f) {
      pa.boxes[f] = rb[static_cast<size_t>(f - 1)];
      pb.boxes[f] = ra[static_cast<size_t>(f - 1)];
    }
    g.pred = {pa, pb};
    cases.push_back(g);
  }
  {
    GoldenCase g;
    g.name = "fragmented coverage";
    g.gt = {mk_track(1, 1, 1, row_boxes(0, 0, 6))};
    auto p = mk_track(41, 1, 1, row_boxes(0, 0, 2), 0.9);
    const auto r = row_boxes(0, 0, 6);
    p.boxes[5] = r[4];
    p.boxes[6] = r[5];
    g.pred = {p};
    cases.push_back(g);
  }
  {
    GoldenCase g;
    g.name = "two classes with a stray prediction";
    g.gt = {mk_track(1, 1, 1, row_boxes(0, 0, 4)), mk_track(2, 2, 2, row_boxes(0, 80, 4))};
    g.pred = {mk_track(51, 1, 1, row_boxes(0, 0, 4), 0.9),
              mk_track(52, 2, 2, row_boxes(0, 80, 2), 0.5),
              mk_track(53, 3, 1, row_boxes(300, 300, 3), 0.4)};
    cases.push_back(g);
  }
  {
    GoldenCase g;
    g.name = "duplicate predictions on one object";
    g.gt = {mk_track(1, 1, 1, row_boxes(0, 0, 4))};
    g.pred = {mk_track(60, 1, 1, row_boxes(0, 0, 4), 0.9),
              mk_track(61, 1, 1, row_boxes(0.5, 0, 4), 0.7)};
    cases.push_back(g);
  }
  {
    GoldenCase g;
    g.name = "late birth and early death";
    g.gt = {mk_track(1, 1, 2, row_boxes(0, 0, 3)), mk_track(2, 1, 1, row_boxes(0, 60, 2))};
    g.pred = {mk_track(71, 1, 2, row_boxes(0, 0, 2), 0.9),
              mk_track(72, 1, 1, row_boxes(0, 60, 2), 0.9)};
    cases.push_back(g);
  }
  return cases;
}

void criterion_9() {
  int bad = 0;
  std::string first_fail;
  const auto cases = golden_suite();
  for (const auto& g : cases) {
    const auto clear = evaluate_clear(g.gt, g.pred);
    const auto ref = oracle::brute_force_clear(g.gt, g.pred, 0.5);
    const double idf1 = evaluate_idf1(g.gt, g.pred);
    const double idf1_ref = oracle::brute_force_idf1(g.gt, g.pred, 0.5);
    const auto ap = evaluate_track_ap(g.gt, g.pred);
    const auto ap_ref = oracle::brute_force_track_ap(g.gt, g.pred);
    const bool ok = clear.fp == ref.fp && clear.fn == ref.fn && clear.ids == ref.ids &&
                    clear.fm == ref.fm && clear.mt == ref.mt && clear.ml == ref.ml &&
                    std::fabs(clear.mota - ref.mota) <= 1e-9 &&
                    std::fabs(clear.motp - ref.motp) <= 1e-9 &&
                    std::fabs(idf1 - idf1_ref) <= 1e-9 &&
                    std::fabs(ap.mean_ap - ap_ref.mean_ap) <= 1e-9;
    if (!ok) {
      ++bad;
      if (first_fail.empty()) first_fail = g.name;
    }
  }
  // The two worked examples pin exact values.
  const auto& worked = cases[1];
  const auto clear = evaluate_clear(worked.gt, worked.pred);
  const bool mota_ok = std::fabs(clear.mota - 0.6) <= 1e-9;
  const auto& split = cases[2];
  const bool idf1_ok = std::fabs(evaluate_idf1(split.gt, split.pred) - 0.5) <= 1e-9;

  char detail[192];
  std::snprintf(detail, sizeof(detail),
                "%zu golden cases, %d oracle mismatches%s%s, MOTA=0.6 %s, IDF1=0.5 %s",
                cases.size(), bad, first_fail.empty() ? "" : ", first: ",
                first_fail.c_str(), mota_ok ? "ok" : "BAD", idf1_ok ? "ok" : "BAD");
  report(9, "metric evaluators match brute-force references", bad == 0 && mota_ok && idf1_ok,
         detail);
}

// ---------------------------------------------------------------------------
// 10. Perfect-input sanity

void criterion_10() {
  const auto bundle = generate(make_scenario("static", 7));
  int bad = 0;
  std::string first_fail;
  for (auto assoc : {AssociationMode::greedy, AssociationMode::hungarian}) {
    for (auto mode :
         {MotionMode::none, MotionMode::always_flow, MotionMode::flow_on_trigger}) {
      for (bool stage2 : {true, false}) {
        TrackerConfig cfg;
        cfg.association = assoc;
        cfg.motion_policy.mode = mode;
        if (!stage2) cfg.sigma_app = std::numeric_limits<double>::infinity();
        const auto out = run_sequence(bundle.detections, bundle.frames,
                                      bundle.flow.get(), &bundle.embeddings, cfg);
        const auto pred = to_track_records(out);
        const auto clear = evaluate_clear(bundle.gt, pred);
        const double idf1 = evaluate_idf1(bundle.gt, pred);
        const auto ap = evaluate_track_ap(bundle.gt, pred);
        bool ok = std::fabs(clear.mota - 1.0) <= 1e-12 &&
                  std::fabs(idf1 - 1.0) <= 1e-12 && clear.ids == 0 && clear.fm == 0 &&
                  clear.fp == 0 && clear.fn == 0;
        for (double v : ap.map_per_threshold) ok = ok && std::fabs(v - 1.0) <= 1e-12;
        if (!ok && first_fail.empty()) {
          first_fail =
              std::string(assoc == AssociationMode::greedy ? "greedy" : "hungarian") +
              "/motion" + std::to_string(static_cast<int>(mode)) +
              (stage2 ? "/stage2" : "/nostage2");
        }
        if (!ok) ++bad;
      }
    }
  }
  char detail[128];
  std::snprintf(detail, sizeof(detail), "12 tracker modes, %d imperfect%s%s", bad,
                first_fail.empty() ? "" : ", first: ", first_fail.c_str());
  report(10, "noise-free static scenario is perfect in every mode", bad == 0, detail);
}

// ---------------------------------------------------------------------------
// 11. CLI determinism

bool same_file(const fs::path& a, const fs::path& b) {
  return slurp(a.string()) == slurp(b.string());
}

void criterion_11() {
  const fs::path d1 = g_work / "det1";
  const fs::path d2 = g_work / "det2";
  std::vector<std::string> problems;

  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) problems.push_back(what);
  };

  const std::string synth_flags =
      "synth --scenario pan --frames 24 --objects 4 --seed 3 --out-dir ";
  expect(run_cli(synth_flags + d1.string()) == 0, "synth run 1");
  expect(run_cli(synth_flags + d2.string()) == 0, "synth run 2");
  for (const char* f :
       {"det.txt", "gt.txt", "embeddings.csv", "seqinfo.txt", "flow/000002.flo"}) {
    expect(same_file(d1 / f, d2 / f), std::string("synth file ") + f);
  }

  for (int i = 1; i <= 2; ++i) {
    const std::string out = (g_work / ("track_base_" + std::to_string(i) + ".txt")).string();
    expect(run_cli("track --format visdrone --detections " + (d1 / "det.txt").string() +
                   " --embeddings " + (d1 / "embeddings.csv").string() + " --output " +
                   out) == 0,
           "track baseline run " + std::to_string(i));
  }
  expect(same_file(g_work / "track_base_1.txt", g_work / "track_base_2.txt"),
         "track baseline output");

  for (int i = 1; i <= 2; ++i) {
    const std::string out = (g_work / ("track_flow_" + std::to_string(i) + ".txt")).string();
    expect(run_cli("track --format visdrone --motion-mode flow --flow-dir " +
                   (d1 / "flow").string() + " --detections " + (d1 / "det.txt").string() +
                   " --embeddings " + (d1 / "embeddings.csv").string() + " --output " +
                   out) == 0,
           "track flow run " + std::to_string(i));
  }
  expect(same_file(g_work / "track_flow_1.txt", g_work / "track_flow_2.txt"),
         "track flow output");

  for (int i = 1; i <= 2; ++i) {
    expect(run_cli("eval --format visdrone --gt " + (d1 / "gt.txt").string() +
                   " --results " + (g_work / "track_flow_1.txt").string() + " --report " +
                   (g_work / ("eval_" + std::to_string(i) + ".kv")).string()) == 0,
           "eval run " + std::to_string(i));
  }
  expect(same_file(g_work / "eval_1.kv", g_work / "eval_2.kv"), "eval report");

  for (int i = 1; i <= 2; ++i) {
    expect(run_cli("ablate --scenario dropout --seed 5 --frames 24 --objects 4 --report " +
                       (g_work / ("abl_" + std::to_string(i) + ".kv")).string(),
                   (g_work / ("abl_" + std::to_string(i) + ".out")).string()) == 0,
           "ablate run " + std::to_string(i));
  }
  expect(same_file(g_work / "abl_1.kv", g_work / "abl_2.kv"), "ablate report");
  expect(same_file(g_work / "abl_1.out", g_work / "abl_2.out"), "ablate stdout");

  const std::string detail = problems.empty()
                                 ? "synth/track/eval/ablate all byte-identical"
                                 : "first problem: " + problems.front();
  report(11, "every CLI command is deterministic across repeated runs", problems.empty(),
         detail);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) {
    g_cli = argv[1];
  } else {
    g_cli = (fs::path(argv[0]).parent_path().parent_path() / "tools" / "flowtrack").string();
  }
  if (!fs::exists(g_cli)) {
    std::fprintf(stderr, "acceptance: CLI binary not found at %s\n", g_cli.c_str());
    return 2;
  }
  g_work = fs::temp_directory_path() / ("flowtrack_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(g_work);

  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();

  fs::remove_all(g_work);
  if (g_failures == 0) {
    std::printf("acceptance: all 11 criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criterion(s) FAILED\n", g_failures);
  return 1;
}
