// Command-line frontend: synthetic scene generation, tracking, evaluation,
// strategy comparison and track visualization over the mft_core library.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mft/chain.hpp"
#include "mft/ensemble.hpp"
#include "mft/flow_io.hpp"
#include "mft/metrics.hpp"
#include "mft/run_config.hpp"
#include "mft/synth.hpp"
#include "mft/trackfile.hpp"

namespace {

using namespace mft;

ImageExtent parse_extent_flag(const std::string& value) {
  ImageExtent extent;
  char sep = 0;
  std::istringstream in(value);
  if (!(in >> extent.width >> sep >> extent.height) || sep != 'x' || !extent.valid()) {
    raise(ErrorCode::BadConfig, "extent must look like 64x64, got '" + value + "'");
  }
  return extent;
}

EvalOptions eval_options_for(const RunConfig& config) {
  EvalOptions options;
  options.native_extent = config.extent;
  options.evaluation_extent =
      config.eval_extent.valid() ? config.eval_extent : config.extent;
  options.thresholds = config.thresholds;
  return options;
}

std::vector<TrackRecord> run_tracker(const TrackerConfig& tracker, int frames,
                                     ImageExtent extent, const QuerySet& queries,
                                     char source) {
  const auto provider = build_provider(tracker, frames, extent);
  const std::vector<ChainState> states = track(frames, *provider, tracker.chain);
  std::vector<TrackRecord> records = sample_track_records(
      states, queries.points, tracker.chain.occlusion_threshold, source);
  for (std::size_t i = 0; i < records.size(); ++i) records[i].point_id = queries.ids[i];
  return records;
}

void dump_states(const std::vector<ChainState>& states, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const ChainState& state : states) {
    FlowPack pack;
    pack.extent = state.extent;
    pack.mask = kPlaneFlowU | kPlaneFlowV | kPlaneVariance | kPlaneOcclusion;
    const std::size_t n = state.extent.pixel_count();
    pack.flow_u.resize(n);
    pack.flow_v.resize(n);
    pack.variance.resize(n);
    pack.occlusion.resize(n);
    std::size_t i = 0;
    for (int row = 0; row < state.extent.height; ++row) {
      for (int col = 0; col < state.extent.width; ++col, ++i) {
        pack.flow_u[i] = static_cast<float>(state.x[i] - col);
        pack.flow_v[i] = static_cast<float>(state.y[i] - row);
        pack.variance[i] = static_cast<float>(state.variance[i]);
        pack.occlusion[i] = static_cast<float>(state.occlusion[i]);
      }
    }
    char name[32];
    std::snprintf(name, sizeof name, "state_%05d.mftflow", state.frame);
    write_flowpack(pack, dir / name);
  }
}

int cmd_track(const std::string& config_path, const std::string& out_path,
              const std::string& dump_dir) {
  const RunConfig config = read_run_config(config_path);
  const QuerySet queries = resolve_queries(config.queries, config.extent);

  std::vector<TrackRecord> records;
  if (config.tracker_b) {
    // The two tracker passes are independent; run them concurrently.
    auto future_a = std::async(std::launch::async, run_tracker, std::cref(config.tracker_a),
                               config.frames, config.extent, std::cref(queries), 'A');
    auto future_b = std::async(std::launch::async, run_tracker, std::cref(*config.tracker_b),
                               config.frames, config.extent, std::cref(queries), 'B');
    const std::vector<TrackRecord> a = future_a.get();
    const std::vector<TrackRecord> b = future_b.get();
    records = combine(a, b, config.strategy);
  } else {
    records = run_tracker(config.tracker_a, config.frames, config.extent, queries, 'A');
  }
  write_track_file(out_path, records, config.extent);

  if (!dump_dir.empty()) {
    const auto provider = build_provider(config.tracker_a, config.frames, config.extent);
    dump_states(track(config.frames, *provider, config.tracker_a.chain), dump_dir);
  }
  std::printf("wrote %zu tracks over %d frames to %s\n", records.size(), config.frames,
              out_path.c_str());
  return 0;
}

int cmd_synth(const std::string& scene_path, const std::string& out_dir,
              const std::string& pairs_mode, int max_candidates, bool flo_sidecar,
              const std::string& gt_out, const std::string& queries_spec,
              double noise_a, double noise_b, const std::string& variance_report,
              double false_rate, double missed_rate, long seed, bool degrade) {
  const SceneSpec scene = read_scene_file(scene_path);

  std::optional<DegradationModel> model;
  if (degrade) {
    DegradationModel m;
    m.noise_base = noise_a;
    m.noise_per_frame = noise_b;
    if (variance_report == "honest") {
      m.variance_report = DegradationModel::VarianceReport::Honest;
    } else if (variance_report.starts_with("const:")) {
      m.variance_report = DegradationModel::VarianceReport::Miscalibrated;
      m.miscalibrated_value = std::stod(variance_report.substr(6));
    } else {
      raise(ErrorCode::BadConfig, "--variance must be honest or const:<sigma>");
    }
    m.false_occlusion_rate = false_rate;
    m.missed_occlusion_rate = missed_rate;
    m.seed = static_cast<std::uint64_t>(seed);
    model = m;
  }
  const OracleProvider provider(scene, model);

  if (!out_dir.empty()) {
    std::vector<FlowRequest> pairs;
    if (pairs_mode == "mft") {
      pairs = schedule_pairs(scene.frame_count, max_candidates, ScheduleMode::Mft);
    } else if (pairs_mode == "consecutive") {
      pairs = schedule_pairs(scene.frame_count, max_candidates, ScheduleMode::ConsecutiveOnly);
    } else if (pairs_mode == "direct") {
      pairs = schedule_pairs(scene.frame_count, max_candidates, ScheduleMode::DirectOnly);
    } else if (pairs_mode == "all") {
      pairs = all_pairs(scene.frame_count);
    } else {
      raise(ErrorCode::BadConfig, "--pairs must be mft, consecutive, direct or all");
    }
    emit_provider_directory(provider, pairs, out_dir,
                            flo_sidecar ? ProviderFileFormat::FloWithSidecar
                                        : ProviderFileFormat::FlowPack);
    std::printf("wrote %zu flow pairs to %s\n", pairs.size(), out_dir.c_str());
  }

  if (!gt_out.empty()) {
    const QuerySet queries = resolve_queries(queries_spec, scene.extent);
    std::vector<TrackRecord> gt = gt_tracks(scene, queries.points);
    for (std::size_t i = 0; i < gt.size(); ++i) gt[i].point_id = queries.ids[i];
    write_track_file(gt_out, gt, scene.extent);
    std::printf("wrote %zu ground-truth tracks to %s\n", gt.size(), gt_out.c_str());
  }
  return 0;
}

int cmd_eval(const std::string& pred_path, const std::string& gt_path,
             const std::string& out_prefix, const std::string& eval_extent_flag,
             bool with_slices) {
  const TrackFileContents pred = read_track_file(pred_path);
  const TrackFileContents gt = read_track_file(gt_path);
  if (!pred.extent.valid()) {
    raise(ErrorCode::ShapeMismatch, "prediction file lacks an extent header");
  }
  std::vector<TrackRecord> records = pred.records;
  attach_ground_truth(records, gt.records);

  EvalOptions options;
  options.native_extent = pred.extent;
  if (eval_extent_flag == "native") {
    options.evaluation_extent = pred.extent;
  } else if (!eval_extent_flag.empty()) {
    options.evaluation_extent = parse_extent_flag(eval_extent_flag);
  }
  const EvalReport report = evaluate(records, options);

  std::string text = report_to_text(report);
  if (with_slices) {
    const CoordinateScale scale{
        static_cast<double>(options.evaluation_extent.width) / options.native_extent.width,
        static_cast<double>(options.evaluation_extent.height) / options.native_extent.height};
    text += slices_to_text(slice_by_predicted_visibility(records, options.thresholds, scale));
  }
  atomic_write_bytes(out_prefix + ".txt", text);
  atomic_write_bytes(out_prefix + ".json", report_to_json(report));
  std::fputs(text.c_str(), stdout);
  return 0;
}

int cmd_compare(const std::string& config_path, const std::string& out_dir) {
  const RunConfig config = read_run_config(config_path);
  const QuerySet queries = resolve_queries(config.queries, config.extent);

  std::vector<TrackRecord> gt;
  if (!config.gt_path.empty()) {
    gt = read_track_file(config.gt_path).records;
  } else if (config.tracker_a.kind == "oracle") {
    const SceneSpec scene = read_scene_file(config.tracker_a.scene_path);
    gt = gt_tracks(scene, queries.points);
    for (std::size_t i = 0; i < gt.size(); ++i) gt[i].point_id = queries.ids[i];
  } else {
    raise(ErrorCode::BadConfig, "compare needs gt = <file> unless tracker_a is an oracle");
  }

  std::filesystem::create_directories(out_dir);
  const EvalOptions options = eval_options_for(config);

  struct Row {
    const char* name;
    ScheduleMode mode;
    EvalReport report;
  };
  std::vector<Row> rows{{"direct", ScheduleMode::DirectOnly, {}},
                        {"chain", ScheduleMode::ConsecutiveOnly, {}},
                        {"mft", ScheduleMode::Mft, {}}};
  for (Row& row : rows) {
    TrackerConfig tracker = config.tracker_a;
    tracker.chain.schedule = row.mode;
    std::vector<TrackRecord> records =
        run_tracker(tracker, config.frames, config.extent, queries, 'A');
    const std::filesystem::path base = std::filesystem::path(out_dir);
    write_track_file(base / (std::string("tracks_") + row.name + ".txt"), records,
                     config.extent);
    attach_ground_truth(records, gt);
    row.report = evaluate(records, options);
    write_report(row.report, base / (std::string("report_") + row.name + ".txt"),
                 base / (std::string("report_") + row.name + ".json"));
  }

  std::printf("%-8s %10s %10s %10s\n", "strategy", "delta_avg", "aj", "oa");
  for (const Row& row : rows) {
    std::printf("%-8s %10.4f %10.4f %10.4f\n", row.name, row.report.position.delta_avg,
                row.report.aj, row.report.oa);
  }
  return 0;
}

// Minimal binary PPM canvas for track overlays.
class Canvas {
 public:
  Canvas(int width, int height) : width_(width), height_(height), rgb_(3u * width * height, 30) {}

  void splat(double x, double y, unsigned char r, unsigned char g, unsigned char b) {
    const int cx = static_cast<int>(std::lround(x));
    const int cy = static_cast<int>(std::lround(y));
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int px = cx + dx;
        const int py = cy + dy;
        if (px < 0 || px >= width_ || py < 0 || py >= height_) continue;
        const std::size_t at = 3u * (static_cast<std::size_t>(py) * width_ + px);
        rgb_[at] = r;
        rgb_[at + 1] = g;
        rgb_[at + 2] = b;
      }
    }
  }

  void write(const std::filesystem::path& path) const {
    std::string bytes = "P6\n" + std::to_string(width_) + " " + std::to_string(height_) +
                        "\n255\n";
    bytes.append(reinterpret_cast<const char*>(rgb_.data()), rgb_.size());
    atomic_write_bytes(path, bytes);
  }

 private:
  int width_;
  int height_;
  std::vector<unsigned char> rgb_;
};

int cmd_viz(const std::string& tracks_path, const std::string& out_dir,
            const std::string& extent_flag, int frame, int scale) {
  const TrackFileContents contents = read_track_file(tracks_path);
  ImageExtent extent = contents.extent;
  if (!extent_flag.empty()) extent = parse_extent_flag(extent_flag);
  if (!extent.valid()) {
    raise(ErrorCode::BadConfig, "track file lacks an extent header; pass --extent");
  }
  if (scale < 1) raise(ErrorCode::BadConfig, "--scale must be positive");

  std::filesystem::create_directories(out_dir);
  const int frames = contents.records.front().frame_count();
  int emitted = 0;
  for (int f = 0; f < frames; ++f) {
    if (frame > 0 && f + 1 != frame) continue;
    Canvas canvas(extent.width * scale, extent.height * scale);
    for (const TrackRecord& record : contents.records) {
      const Point p = record.position[f];
      if (record.visible[f]) {
        canvas.splat(p.x * scale, p.y * scale, 40, 220, 60);   // visible: green
      } else {
        canvas.splat(p.x * scale, p.y * scale, 70, 110, 255);  // occluded: blue
      }
    }
    char name[32];
    std::snprintf(name, sizeof name, "frame_%05d.ppm", f + 1);
    canvas.write(std::filesystem::path(out_dir) / name);
    ++emitted;
  }
  std::printf("wrote %d overlay image(s) to %s\n", emitted, out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dense long-term point tracking by multi-flow chaining"};
  app.require_subcommand(1);

  std::string config_path, out_path, dump_dir;
  auto* track_cmd = app.add_subcommand("track", "run one or two trackers per run config");
  track_cmd->add_option("--config", config_path, "run configuration file");
  track_cmd->add_option("--out", out_path, "output track file")->default_val("tracks.txt");
  track_cmd->add_option("--dump-state", dump_dir, "directory for dense per-frame state dumps");
  std::string init_config_path;
  track_cmd->add_option("--init-config", init_config_path,
                        "write a template config with the published defaults and exit");

  std::string scene_path, synth_out, pairs_mode = "mft", gt_out, queries_spec = "grid:4";
  std::string variance_report = "honest";
  int max_candidates = 5;
  bool flo_sidecar = false, degrade = false;
  double noise_a = 0.0, noise_b = 0.0, false_rate = 0.0, missed_rate = 0.0;
  long seed = 0;
  auto* synth_cmd = app.add_subcommand("synth", "emit scene flows and ground-truth tracks");
  synth_cmd->add_option("--scene", scene_path, "scene description file")->required();
  synth_cmd->add_option("--out", synth_out, "flow directory to write");
  synth_cmd->add_option("--pairs", pairs_mode, "mft | consecutive | direct | all");
  synth_cmd->add_option("--k", max_candidates, "schedule size for --pairs mft");
  synth_cmd->add_flag("--flo-sidecar", flo_sidecar, "write .flo plus scalar sidecars");
  synth_cmd->add_option("--gt-tracks", gt_out, "ground-truth track file to write");
  synth_cmd->add_option("--queries", queries_spec, "grid:<stride> or a track file");
  synth_cmd->add_flag("--degrade", degrade, "apply the degradation model");
  synth_cmd->add_option("--noise-a", noise_a, "noise base scale (pixels)");
  synth_cmd->add_option("--noise-b", noise_b, "noise growth per frame gap (pixels)");
  synth_cmd->add_option("--variance", variance_report, "honest | const:<sigma>");
  synth_cmd->add_option("--false-occlusion", false_rate, "false occlusion rate");
  synth_cmd->add_option("--missed-occlusion", missed_rate, "missed occlusion rate");
  synth_cmd->add_option("--seed", seed, "degradation seed");

  std::string pred_path, gt_path, out_prefix = "report", eval_extent_flag;
  bool with_slices = false;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a track file against ground truth");
  eval_cmd->add_option("--pred", pred_path, "predicted track file")->required();
  eval_cmd->add_option("--gt", gt_path, "ground-truth track file")->required();
  eval_cmd->add_option("--out", out_prefix, "report path prefix");
  eval_cmd->add_option("--eval-extent", eval_extent_flag,
                       "evaluation extent WxH, or 'native' (default 256x256)");
  eval_cmd->add_flag("--slices", with_slices, "append predicted-visibility slices");

  std::string compare_config, compare_out = "compare";
  auto* compare_cmd =
      app.add_subcommand("compare", "run direct, chain and mft strategies and tabulate");
  compare_cmd->add_option("--config", compare_config, "run configuration file")->required();
  compare_cmd->add_option("--out", compare_out, "output directory");

  std::string viz_tracks, viz_out = "viz", viz_extent;
  int viz_frame = 0, viz_scale = 4;
  auto* viz_cmd = app.add_subcommand("viz", "render track overlays as PPM images");
  viz_cmd->add_option("--tracks", viz_tracks, "track file to render")->required();
  viz_cmd->add_option("--out", viz_out, "output directory");
  viz_cmd->add_option("--extent", viz_extent, "canvas extent WxH when the file has none");
  viz_cmd->add_option("--frame", viz_frame, "render a single 1-based frame");
  viz_cmd->add_option("--scale", viz_scale, "canvas upscaling factor");

  CLI11_PARSE(app, argc, argv);

  try {
    if (track_cmd->parsed()) {
      if (!init_config_path.empty()) {
        mft::atomic_write_bytes(init_config_path, mft::default_run_config_text());
        std::printf("wrote template config to %s\n", init_config_path.c_str());
        return 0;
      }
      if (config_path.empty()) {
        mft::raise(mft::ErrorCode::BadConfig, "track needs --config (or --init-config)");
      }
      return cmd_track(config_path, out_path, dump_dir);
    }
    if (synth_cmd->parsed()) {
      return cmd_synth(scene_path, synth_out, pairs_mode, max_candidates, flo_sidecar,
                       gt_out, queries_spec, noise_a, noise_b, variance_report, false_rate,
                       missed_rate, seed, degrade);
    }
    if (eval_cmd->parsed()) {
      return cmd_eval(pred_path, gt_path, out_prefix, eval_extent_flag, with_slices);
    }
    if (compare_cmd->parsed()) {
      return cmd_compare(compare_config, compare_out);
    }
    if (viz_cmd->parsed()) {
      return cmd_viz(viz_tracks, viz_out, viz_extent, viz_frame, viz_scale);
    }
  } catch (const mft::Error& error) {
    std::fprintf(stderr, "error: %s\n", error.what());
    return 1;
  } catch (const std::exception& error) {
    std::fprintf(stderr, "error: Internal: %s\n", error.what());
    return 2;
  }
  return 0;
}
