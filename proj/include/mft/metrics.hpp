#pragma once

#include <array>
#include <optional>
#include <vector>

#include "mft/chain.hpp"
#include "mft/tracks.hpp"

namespace mft {

// Multiplicative coordinate rescaling applied to both predicted and
// ground-truth positions before position errors are thresholded. Identity by
// default; evaluate() derives it from the evaluation extent.
struct CoordinateScale {
  double x = 1.0;
  double y = 1.0;
};

inline constexpr std::array<double, 5> kDefaultThresholds{1.0, 2.0, 4.0, 8.0, 16.0};

struct PositionAccuracy {
  std::vector<double> thresholds;
  std::vector<double> delta_at;   // fraction of GT-visible pairs with error < t
  std::vector<long> hits;
  long total = 0;                 // GT-visible pairs evaluated
  double delta_avg = 0.0;
};

struct JaccardCounts {
  long tp = 0;
  long fp = 0;
  long fn = 0;
};

struct EvalReport {
  ImageExtent native_extent;
  ImageExtent evaluation_extent;

  double oa = 0.0;
  long oa_correct = 0;
  long oa_total = 0;

  PositionAccuracy position;

  double aj = 0.0;
  std::vector<double> jaccard_at;
  std::vector<JaccardCounts> jaccard_counts;
  std::vector<std::uint8_t> jaccard_degenerate;  // denominator was empty; 1.0 reported

  double precision = 0.0;
  double recall = 0.0;
  long vis_tp = 0;
  long vis_fp = 0;
  long vis_fn = 0;
  bool precision_degenerate = false;
  bool recall_degenerate = false;
};

// Position accuracy on three partitions of the evaluated pairs, keyed by the
// *predicted* visibility. Empty partitions carry no accuracy result.
struct VisibilitySliceReport {
  std::optional<PositionAccuracy> predicted_visible;
  std::optional<PositionAccuracy> predicted_occluded;
  PositionAccuracy all;
};

// Frame 1 (the query frame) is excluded from every metric below; all counts
// run over (point, frame) pairs with frame >= 2.

// Fraction of pairs whose predicted visibility matches ground truth.
double occlusion_accuracy(const std::vector<TrackRecord>& records);

// Per-threshold fraction of GT-visible pairs with Euclidean error strictly
// below the threshold, plus their mean. Raises EmptyEvalSet when no pair is
// GT-visible.
PositionAccuracy position_accuracy(const std::vector<TrackRecord>& records,
                                   const std::vector<double>& thresholds =
                                       {kDefaultThresholds.begin(), kDefaultThresholds.end()},
                                   CoordinateScale scale = {});

// TAP-Vid Average Jaccard: per threshold TP / (TP + FP + FN) with position
// and visibility errors penalized jointly, averaged over thresholds.
double average_jaccard(const std::vector<TrackRecord>& records,
                       const std::vector<double>& thresholds =
                           {kDefaultThresholds.begin(), kDefaultThresholds.end()},
                       CoordinateScale scale = {});

// Precision and recall of the visibility classifier with "visible" positive.
// Degenerate denominators are reported as 1.0 with the matching flag set.
struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  long tp = 0;
  long fp = 0;
  long fn = 0;
  bool precision_degenerate = false;
  bool recall_degenerate = false;
};
PrecisionRecall visibility_precision_recall(const std::vector<TrackRecord>& records);

VisibilitySliceReport slice_by_predicted_visibility(
    const std::vector<TrackRecord>& records,
    const std::vector<double>& thresholds = {kDefaultThresholds.begin(),
                                             kDefaultThresholds.end()},
    CoordinateScale scale = {});

struct EvalOptions {
  ImageExtent native_extent;
  ImageExtent evaluation_extent{256, 256};
  std::vector<double> thresholds{kDefaultThresholds.begin(), kDefaultThresholds.end()};
};

// Full first-mode evaluation. Positions are rescaled from the native extent
// to the evaluation extent before thresholding.
EvalReport evaluate(const std::vector<TrackRecord>& records, const EvalOptions& options);

// Reads one dense prediction out of a chain state: bilinear sample of the
// position maps at the query, visible iff the sampled occlusion score is at
// most theta_o.
struct DensePrediction {
  Point position;
  bool visible = false;
  double variance = 0.0;
};
DensePrediction sample_dense_prediction(const ChainState& state, Point query,
                                        double occlusion_threshold);

// Convenience: samples a whole trajectory for each query from per-frame
// states, producing records tagged with `source`.
std::vector<TrackRecord> sample_track_records(const std::vector<ChainState>& states,
                                              const std::vector<Point>& queries,
                                              double occlusion_threshold, char source);

}  // namespace mft
