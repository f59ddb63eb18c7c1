#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mft/chain.hpp"
#include "mft/ensemble.hpp"
#include "mft/synth.hpp"

namespace mft {

struct TrackerConfig {
  std::string kind = "oracle";       // oracle | flow-dir
  std::string backend = "raft-like"; // raft-like | dkm-like | roma-like
  std::string scene_path;            // oracle kind
  std::string flow_dir;              // flow-dir kind
  bool degrade = false;
  DegradationModel degradation;
  ChainConfig chain;
  AdapterConfig adapter;
};

// One reproducible run: providers, chain parameters, ensembling and the
// evaluation convention, parsed from a flat key = value text file.
struct RunConfig {
  int frames = 0;
  ImageExtent extent;
  std::string queries = "grid:4";  // "grid:<stride>" or a track-file path
  TrackerConfig tracker_a;
  std::optional<TrackerConfig> tracker_b;
  EnsembleStrategy strategy = EnsembleStrategy::AOnly;
  ImageExtent eval_extent{256, 256};
  std::vector<double> thresholds{1.0, 2.0, 4.0, 8.0, 16.0};
  std::string gt_path;
};

RunConfig parse_run_config(const std::string& text);
RunConfig read_run_config(const std::string& path);

// Template configuration with every tunable constant spelled out at its
// published default.
std::string default_run_config_text();

// Instantiates the provider a tracker config describes. Scene-backed
// providers are validated against the run extent and frame count.
std::unique_ptr<FlowProvider> build_provider(const TrackerConfig& tracker, int frames,
                                             ImageExtent extent);

// Query points plus the ids evaluation joins on.
struct QuerySet {
  std::vector<Point> points;
  std::vector<int> ids;
};

// Resolves "grid:<stride>" (ids 0..n-1) or reads frame-1 positions and ids
// from a track file.
QuerySet resolve_queries(const std::string& spec, ImageExtent extent);

}  // namespace mft
