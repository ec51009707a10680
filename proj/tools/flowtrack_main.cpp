// Command line front end for the tracking pipeline: track, eval, synth and
// ablate subcommands. Exit codes: 0 success, 1 runtime/data error, 2 usage
// error.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "flowtrack/io.hpp"
#include "flowtrack/metrics.hpp"
#include "flowtrack/motion.hpp"
#include "flowtrack/synth.hpp"
#include "flowtrack/tracker.hpp"

namespace {

using namespace flowtrack;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct TrackArgs {
  std::vector<std::string> detections;
  std::vector<std::string> outputs;
  std::vector<std::string> flow_dirs;
  std::vector<std::string> embeddings;
  std::string config;
  std::string motion_mode;
  std::string association;
  std::string format = "mot";
  int jobs = 1;
};

struct EvalArgs {
  std::string gt;
  std::string results;
  std::string report;
  std::string format = "mot";
  std::vector<std::string> metrics;
};

struct SynthArgs {
  std::string scenario;
  std::string out_dir;
  std::uint64_t seed = 1;
  int frames = 100;
  int objects = 8;
};

struct AblateArgs {
  std::string scenario;
  std::string report;
  std::uint64_t seed = 1;
  int frames = 100;
  int objects = 8;
};

std::vector<MotRecord> read_records(const std::string& path, const std::string& format) {
  return format == "visdrone" ? read_visdrone_csv(path) : read_mot_csv(path);
}

void apply_cli_overrides(TrackerConfig& cfg, const TrackArgs& args) {
  if (!args.motion_mode.empty()) {
    if (args.motion_mode == "none") cfg.motion_policy.mode = MotionMode::none;
    else if (args.motion_mode == "flow") cfg.motion_policy.mode = MotionMode::always_flow;
    else cfg.motion_policy.mode = MotionMode::flow_on_trigger;
  }
  if (!args.association.empty()) {
    cfg.association = args.association == "greedy" ? AssociationMode::greedy
                                                   : AssociationMode::hungarian;
  }
}

int run_one_sequence(const TrackArgs& args, const TrackerConfig& cfg, size_t idx,
                     std::mutex& out_mutex) {
  const std::string& det_path = args.detections[idx];
  const auto t_total0 = std::chrono::steady_clock::now();
  auto records = read_records(det_path, args.format);
  auto dets = detections_by_frame(records);

  std::unique_ptr<MotionSource> flow;
  if (!args.flow_dirs.empty()) {
    const std::string& dir =
        args.flow_dirs.size() == 1 ? args.flow_dirs[0] : args.flow_dirs[idx];
    flow = open_flow_dir(dir);
  }
  EmbeddingTable table;
  const EmbeddingTable* table_ptr = nullptr;
  if (!args.embeddings.empty()) {
    const std::string& path =
        args.embeddings.size() == 1 ? args.embeddings[0] : args.embeddings[idx];
    table = read_embeddings_csv(path, dets);
    table_ptr = &table;
  }

  const auto t_loop0 = std::chrono::steady_clock::now();
  StepStats stats;
  const auto tracklets = run_sequence(dets, 0, flow.get(), table_ptr, cfg, &stats);
  const auto t_loop1 = std::chrono::steady_clock::now();
  write_results(tracklets, args.outputs[idx]);
  const auto t_total1 = std::chrono::steady_clock::now();

  const double loop_s = std::chrono::duration<double>(t_loop1 - t_loop0).count();
  const double total_s = std::chrono::duration<double>(t_total1 - t_total0).count();
  std::lock_guard<std::mutex> lock(out_mutex);
  std::printf("%s: %ld frames, %zu tracklets\n", det_path.c_str(), stats.frames,
              tracklets.size());
  std::printf("  tracker loop: %.3f s (%.1f frames/s, excludes file parsing)\n",
              loop_s, loop_s > 0 ? stats.frames / loop_s : 0.0);
  std::printf("  end to end:   %.3f s (%.1f frames/s, includes file parsing)\n",
              total_s, total_s > 0 ? stats.frames / total_s : 0.0);
  return kExitOk;
}

int cmd_track(const TrackArgs& args) {
  TrackerConfig cfg;
  if (!args.config.empty()) cfg = read_config(args.config);
  apply_cli_overrides(cfg, args);
  cfg.validate();

  if (cfg.motion_policy.mode != MotionMode::none && args.flow_dirs.empty()) {
    std::cerr << "error: --flow-dir is required when --motion-mode is not none\n";
    return kExitUsage;
  }
  if (args.outputs.size() != args.detections.size()) {
    std::cerr << "error: need one --output per --detections\n";
    return kExitUsage;
  }
  if (args.flow_dirs.size() > 1 && args.flow_dirs.size() != args.detections.size()) {
    std::cerr << "error: --flow-dir must appear once or once per sequence\n";
    return kExitUsage;
  }
  if (args.embeddings.size() > 1 && args.embeddings.size() != args.detections.size()) {
    std::cerr << "error: --embeddings must appear once or once per sequence\n";
    return kExitUsage;
  }

  std::mutex out_mutex;
  const int jobs = std::max(1, args.jobs);
  std::vector<int> status(args.detections.size(), kExitOk);
  if (jobs == 1 || args.detections.size() == 1) {
    for (size_t i = 0; i < args.detections.size(); ++i) {
      status[i] = run_one_sequence(args, cfg, i, out_mutex);
    }
  } else {
    std::vector<std::thread> pool;
    std::mutex next_mutex;
    size_t next = 0;
    for (int t = 0; t < jobs; ++t) {
      pool.emplace_back([&] {
        for (;;) {
          size_t i;
          {
            std::lock_guard<std::mutex> lock(next_mutex);
            if (next >= args.detections.size()) return;
            i = next++;
          }
          try {
            status[i] = run_one_sequence(args, cfg, i, out_mutex);
          } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(out_mutex);
            std::cerr << "error: " << e.what() << "\n";
            status[i] = kExitRuntime;
          }
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  for (int s : status) {
    if (s != kExitOk) return s;
  }
  return kExitOk;
}

int cmd_eval(const EvalArgs& args) {
  const auto gt_records = read_records(args.gt, args.format);
  const auto gt = tracks_from_records(gt_records);
  const auto ignore = ignore_regions_from_records(gt_records);
  if (gt.empty()) {
    std::cerr << "error: ground truth is empty, nothing to evaluate\n";
    return kExitRuntime;
  }
  const auto pred = tracks_from_records(read_mot_csv(args.results));

  int gt_last = 0, pred_last = 0;
  for (const auto& t : gt) {
    if (!t.boxes.empty()) gt_last = std::max(gt_last, t.boxes.rbegin()->first);
  }
  for (const auto& t : pred) {
    if (!t.boxes.empty()) pred_last = std::max(pred_last, t.boxes.rbegin()->first);
  }
  if (pred_last > gt_last) {
    std::cerr << "error: results extend to frame " << pred_last
              << " but ground truth ends at frame " << gt_last << "\n";
    return kExitRuntime;
  }

  std::vector<std::string> wanted = args.metrics;
  if (wanted.empty()) wanted = {"clear", "idf1", "ap"};
  EvalReport report;
  for (const std::string& m : wanted) {
    if (m == "clear") report.clear = evaluate_clear(gt, pred, 0.5, ignore);
    else if (m == "idf1") report.idf1 = evaluate_idf1(gt, pred);
    else if (m == "ap") report.ap = evaluate_track_ap(gt, pred);
    else {
      std::cerr << "error: unknown metric '" << m << "' (want clear|idf1|ap)\n";
      return kExitUsage;
    }
  }
  std::cout << format_report_table(report);
  if (!args.report.empty()) {
    const std::string tmp = args.report + ".tmp";
    {
      std::ofstream f(tmp, std::ios::trunc);
      if (!f) throw io_error("cannot write: " + tmp);
      f << format_report_kv(report);
    }
    std::filesystem::rename(tmp, args.report);
  }
  return kExitOk;
}

int cmd_synth(const SynthArgs& args) {
  const ScenarioSpec spec =
      make_scenario(args.scenario, args.seed, args.frames, args.objects);
  const SequenceBundle bundle = generate(spec);
  write_bundle(bundle, args.out_dir);
  std::cout << "wrote " << args.out_dir << " (" << bundle.frames << " frames, "
            << bundle.gt.size() << " objects)\n";
  return kExitOk;
}

int cmd_ablate(const AblateArgs& args) {
  const ScenarioSpec spec =
      make_scenario(args.scenario, args.seed, args.frames, args.objects);
  const SequenceBundle bundle = generate(spec);
  const auto rows = run_ablation(bundle, default_ablation_ladder(TrackerConfig{}));
  const std::string table = format_ablation_table(rows);
  std::cout << table;

  // Directional sanity flags mirroring the module ladder.
  const auto& first = rows.front().report.clear.value();
  const auto& last = rows.back().report.clear.value();
  std::cout << "\nids " << (last.ids <= first.ids ? "<=" : ">") << " baseline, mota "
            << (rows.back().report.clear->mota >= first.mota ? ">=" : "<")
            << " baseline\n";

  if (!args.report.empty()) {
    std::ostringstream os;
    for (const AblationRow& row : rows) {
      os << "[" << row.label << "]\n" << format_report_kv(row.report);
    }
    const std::string tmp = args.report + ".tmp";
    {
      std::ofstream f(tmp, std::ios::trunc);
      if (!f) throw io_error("cannot write: " + tmp);
      f << os.str();
    }
    std::filesystem::rename(tmp, args.report);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flow-compensated multi-object tracker and evaluation toolkit"};
  app.require_subcommand(1);

  TrackArgs track_args;
  auto* track = app.add_subcommand("track", "run the tracker over a detection file");
  track->add_option("--detections", track_args.detections, "detection file (repeatable)")
      ->required();
  track->add_option("--output", track_args.outputs, "result file (one per sequence)")
      ->required();
  track->add_option("--flow-dir", track_args.flow_dirs,
                    "directory of %06d.flo files or a flow.csv sidecar");
  track->add_option("--embeddings", track_args.embeddings, "embedding CSV");
  track->add_option("--config", track_args.config, "tracker config file");
  track->add_option("--motion-mode", track_args.motion_mode, "none|flow|flow-fast")
      ->check(CLI::IsMember({"none", "flow", "flow-fast"}));
  track->add_option("--association", track_args.association, "greedy|hungarian")
      ->check(CLI::IsMember({"greedy", "hungarian"}));
  track->add_option("--format", track_args.format, "detection file format")
      ->check(CLI::IsMember({"mot", "visdrone"}));
  track->add_option("--jobs", track_args.jobs, "sequences processed concurrently");

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "evaluate results against ground truth");
  eval->add_option("--gt", eval_args.gt, "ground truth file")->required();
  eval->add_option("--results", eval_args.results, "tracker result file")->required();
  eval->add_option("--report", eval_args.report, "machine-readable key-value output");
  eval->add_option("--format", eval_args.format, "ground truth format")
      ->check(CLI::IsMember({"mot", "visdrone"}));
  eval->add_option("--metrics", eval_args.metrics, "subset of clear,idf1,ap")
      ->delimiter(',');

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "generate a synthetic sequence bundle");
  synth->add_option("--scenario", synth_args.scenario, "static|pan|dropout|crowded")
      ->required()
      ->check(CLI::IsMember({"static", "pan", "dropout", "crowded"}));
  synth->add_option("--out-dir", synth_args.out_dir, "bundle directory")->required();
  synth->add_option("--seed", synth_args.seed, "RNG seed");
  synth->add_option("--frames", synth_args.frames, "sequence length")
      ->check(CLI::PositiveNumber);
  synth->add_option("--objects", synth_args.objects, "object count")
      ->check(CLI::PositiveNumber);

  AblateArgs ablate_args;
  auto* ablate = app.add_subcommand("ablate", "run the module ladder on a scenario");
  ablate->add_option("--scenario", ablate_args.scenario, "static|pan|dropout|crowded")
      ->required()
      ->check(CLI::IsMember({"static", "pan", "dropout", "crowded"}));
  ablate->add_option("--seed", ablate_args.seed, "RNG seed");
  ablate->add_option("--frames", ablate_args.frames, "sequence length")
      ->check(CLI::PositiveNumber);
  ablate->add_option("--objects", ablate_args.objects, "object count")
      ->check(CLI::PositiveNumber);
  ablate->add_option("--report", ablate_args.report, "machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (track->parsed()) return cmd_track(track_args);
    if (eval->parsed()) return cmd_eval(eval_args);
    if (synth->parsed()) return cmd_synth(synth_args);
    if (ablate->parsed()) return cmd_ablate(ablate_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
