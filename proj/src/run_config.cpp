#include "mft/run_config.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "mft/flow_io.hpp"
#include "mft/trackfile.hpp"

namespace mft {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

ImageExtent parse_extent_value(const std::string& value) {
  ImageExtent extent;
  char sep = 0;
  std::istringstream in(value);
  if (!(in >> extent.width >> sep >> extent.height) || sep != 'x' || !extent.valid()) {
    raise(ErrorCode::BadConfig, "extent must look like 64x64, got '" + value + "'");
  }
  return extent;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double parsed = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    raise(ErrorCode::BadConfig, key + " expects a number, got '" + value + "'");
  }
}

long parse_long(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long parsed = std::stol(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    raise(ErrorCode::BadConfig, key + " expects an integer, got '" + value + "'");
  }
}

ScheduleMode parse_schedule(const std::string& value) {
  if (value == "mft") return ScheduleMode::Mft;
  if (value == "chain") return ScheduleMode::ConsecutiveOnly;
  if (value == "direct") return ScheduleMode::DirectOnly;
  raise(ErrorCode::BadConfig, "schedule must be mft, chain or direct, got '" + value + "'");
}

// Applies one tracker_{a,b}.* key. Returns false when the key is unknown.
bool apply_tracker_key(TrackerConfig& tracker, const std::string& key,
                       const std::string& value) {
  if (key == "kind") {
    if (value != "oracle" && value != "flow-dir") {
      raise(ErrorCode::BadConfig, "tracker kind must be oracle or flow-dir");
    }
    tracker.kind = value;
  } else if (key == "backend") {
    tracker.adapter = default_adapter_config(value);  // validates the name
    tracker.backend = value;
    tracker.chain.occlusion_threshold = tracker.adapter.occlusion_threshold;
  } else if (key == "scene") {
    tracker.scene_path = value;
  } else if (key == "flow_dir") {
    tracker.flow_dir = value;
  } else if (key == "max_candidates") {
    tracker.chain.max_candidates = static_cast<int>(parse_long(key, value));
  } else if (key == "occlusion_threshold") {
    tracker.chain.occlusion_threshold = parse_double(key, value);
    tracker.adapter.occlusion_threshold = tracker.chain.occlusion_threshold;
  } else if (key == "schedule") {
    tracker.chain.schedule = parse_schedule(value);
  } else if (key == "certainty_threshold") {
    tracker.adapter.certainty_threshold = parse_double(key, value);
  } else if (key == "low_certainty_variance") {
    tracker.adapter.low_certainty_variance = parse_double(key, value);
  } else if (key == "noise_a") {
    tracker.degradation.noise_base = parse_double(key, value);
    tracker.degrade = true;
  } else if (key == "noise_b") {
    tracker.degradation.noise_per_frame = parse_double(key, value);
    tracker.degrade = true;
  } else if (key == "variance_report") {
    if (value == "honest") {
      tracker.degradation.variance_report = DegradationModel::VarianceReport::Honest;
    } else if (value.starts_with("const:")) {
      tracker.degradation.variance_report = DegradationModel::VarianceReport::Miscalibrated;
      tracker.degradation.miscalibrated_value = parse_double(key, value.substr(6));
    } else {
      raise(ErrorCode::BadConfig, "variance_report must be honest or const:<value>");
    }
    tracker.degrade = true;
  } else if (key == "false_occlusion_rate") {
    tracker.degradation.false_occlusion_rate = parse_double(key, value);
    tracker.degrade = true;
  } else if (key == "missed_occlusion_rate") {
    tracker.degradation.missed_occlusion_rate = parse_double(key, value);
    tracker.degrade = true;
  } else if (key == "seed") {
    tracker.degradation.seed = static_cast<std::uint64_t>(parse_long(key, value));
    tracker.degrade = true;
  } else {
    return false;
  }
  return true;
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  RunConfig config;
  bool have_tracker_b = false;
  TrackerConfig tracker_b;

  std::istringstream stream(text);
  std::string line;
  while (std::getline(stream, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      raise(ErrorCode::BadConfig, "expected key = value, got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      raise(ErrorCode::BadConfig, "empty key or value in '" + line + "'");
    }

    if (key == "frames") {
      config.frames = static_cast<int>(parse_long(key, value));
    } else if (key == "extent") {
      config.extent = parse_extent_value(value);
    } else if (key == "queries") {
      config.queries = value;
    } else if (key == "gt") {
      config.gt_path = value;
    } else if (key == "ensemble.strategy") {
      config.strategy = parse_ensemble_strategy(value);
    } else if (key == "eval.extent") {
      if (value == "native") {
        config.eval_extent = ImageExtent{0, 0};  // resolved to native later
      } else {
        config.eval_extent = parse_extent_value(value);
      }
    } else if (key == "eval.thresholds") {
      config.thresholds.clear();
      std::istringstream values(value);
      std::string item;
      while (std::getline(values, item, ',')) {
        config.thresholds.push_back(parse_double(key, trim(item)));
      }
      if (config.thresholds.empty()) {
        raise(ErrorCode::BadConfig, "eval.thresholds needs at least one value");
      }
    } else if (key.starts_with("tracker_a.")) {
      if (!apply_tracker_key(config.tracker_a, key.substr(10), value)) {
        raise(ErrorCode::BadConfig, "unknown key '" + key + "'");
      }
    } else if (key.starts_with("tracker_b.")) {
      if (!apply_tracker_key(tracker_b, key.substr(10), value)) {
        raise(ErrorCode::BadConfig, "unknown key '" + key + "'");
      }
      have_tracker_b = true;
    } else {
      raise(ErrorCode::BadConfig, "unknown key '" + key + "'");
    }
  }

  if (config.frames < 1) {
    raise(ErrorCode::BadConfig, "config needs frames >= 1");
  }
  if (!config.extent.valid()) {
    raise(ErrorCode::BadConfig, "config needs a valid extent");
  }
  if (!config.eval_extent.valid() && config.eval_extent.width != 0) {
    raise(ErrorCode::BadConfig, "eval.extent is invalid");
  }
  if (have_tracker_b) config.tracker_b = tracker_b;
  if (!config.tracker_b && config.strategy != EnsembleStrategy::AOnly) {
    raise(ErrorCode::BadConfig, "ensemble strategies other than a-only need tracker_b");
  }
  return config;
}

RunConfig read_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    raise(ErrorCode::IoError, "cannot open config file " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str());
}

std::string default_run_config_text() {
  return
      "# mftrack run configuration\n"
      "# Every tunable constant appears here at its published default.\n"
      "frames = 48\n"
      "extent = 64x64\n"
      "queries = grid:4            # grid:<stride> or a track-file path\n"
      "\n"
      "tracker_a.kind = oracle     # oracle | flow-dir\n"
      "tracker_a.backend = raft-like\n"
      "tracker_a.scene = scene.txt\n"
      "# tracker_a.flow_dir = flows/\n"
      "tracker_a.max_candidates = 5\n"
      "tracker_a.occlusion_threshold = 0.02   # raft-like default; 0.95 for matchers\n"
      "tracker_a.schedule = mft    # mft | chain | direct\n"
      "# matcher backends only:\n"
      "# tracker_a.certainty_threshold = 0.05 # dkm-like default; roma-like has none\n"
      "# tracker_a.low_certainty_variance = 1000\n"
      "# oracle degradation:\n"
      "# tracker_a.noise_a = 0.1\n"
      "# tracker_a.noise_b = 0.15\n"
      "# tracker_a.variance_report = honest   # honest | const:<sigma>\n"
      "# tracker_a.false_occlusion_rate = 0.05\n"
      "# tracker_a.missed_occlusion_rate = 0.05\n"
      "# tracker_a.seed = 1\n"
      "\n"
      "# tracker_b.kind = oracle\n"
      "# tracker_b.backend = roma-like\n"
      "# tracker_b.scene = scene.txt\n"
      "# tracker_b.certainty_threshold = 0.05\n"
      "\n"
      "ensemble.strategy = a-only  # a-only | b-only | position-b-occlusion-a | selective-b-position\n"
      "eval.extent = 256x256       # TAP-Vid convention; 512x512 or native also accepted\n"
      "eval.thresholds = 1,2,4,8,16\n";
}

std::unique_ptr<FlowProvider> build_provider(const TrackerConfig& tracker, int frames,
                                             ImageExtent extent) {
  if (tracker.kind == "oracle") {
    if (tracker.scene_path.empty()) {
      raise(ErrorCode::BadConfig, "oracle tracker needs a scene file");
    }
    SceneSpec scene = read_scene_file(tracker.scene_path);
    if (!(scene.extent == extent) || scene.frame_count != frames) {
      raise(ErrorCode::ExtentMismatch,
            "scene geometry disagrees with the run extent or frame count");
    }
    std::optional<DegradationModel> model;
    if (tracker.degrade) model = tracker.degradation;
    return std::make_unique<OracleProvider>(std::move(scene), model);
  }
  if (tracker.kind == "flow-dir") {
    if (tracker.flow_dir.empty()) {
      raise(ErrorCode::BadConfig, "flow-dir tracker needs flow_dir");
    }
    auto provider = std::make_unique<FileProvider>(
        tracker.flow_dir, frames, provider_kind_for_backend(tracker.backend),
        tracker.adapter);
    if (!(provider->extent() == extent)) {
      raise(ErrorCode::ExtentMismatch, "flow directory extent disagrees with the run extent");
    }
    return provider;
  }
  raise(ErrorCode::BadConfig, "unknown tracker kind '" + tracker.kind + "'");
}

QuerySet resolve_queries(const std::string& spec, ImageExtent extent) {
  QuerySet queries;
  if (spec.starts_with("grid:")) {
    const long stride = parse_long("queries", spec.substr(5));
    queries.points = grid_queries(extent, static_cast<int>(stride));
    queries.ids.resize(queries.points.size());
    for (std::size_t i = 0; i < queries.ids.size(); ++i) queries.ids[i] = static_cast<int>(i);
    return queries;
  }
  const TrackFileContents contents = read_track_file(spec);
  queries.points.reserve(contents.records.size());
  queries.ids.reserve(contents.records.size());
  for (const TrackRecord& record : contents.records) {
    queries.points.push_back(record.position.front());
    queries.ids.push_back(record.point_id);
  }
  return queries;
}

}  // namespace mft
