#include "mft/metrics.hpp"

#include <cmath>
#include <string>

#include "mft/tracks.hpp"

namespace mft {

void validate_records(const std::vector<TrackRecord>& records) {
  if (records.empty()) {
    raise(ErrorCode::ShapeMismatch, "no track records");
  }
  const int frames = records.front().frame_count();
  if (frames < 1) {
    raise(ErrorCode::ShapeMismatch, "track records must cover at least frame 1");
  }
  for (const TrackRecord& record : records) {
    const std::size_t n = record.position.size();
    if (record.frame_count() != frames) {
      raise(ErrorCode::ShapeMismatch, "track records disagree on frame count");
    }
    if (record.visible.size() != n ||
        (!record.variance.empty() && record.variance.size() != n) ||
        (!record.source.empty() && record.source.size() != n)) {
      raise(ErrorCode::ShapeMismatch, "track record arrays have unequal lengths");
    }
    if (record.has_gt() && (record.gt_visible.size() != n || record.gt_position.size() != n)) {
      raise(ErrorCode::ShapeMismatch, "ground-truth arrays have unequal lengths");
    }
  }
}

namespace {

void require_gt(const std::vector<TrackRecord>& records) {
  validate_records(records);
  for (const TrackRecord& record : records) {
    if (!record.has_gt()) {
      raise(ErrorCode::MissingGT,
            "record " + std::to_string(record.point_id) + " carries no ground truth");
    }
  }
}

double pair_error(const TrackRecord& record, int frame_index, CoordinateScale scale) {
  const double dx = (record.position[frame_index].x - record.gt_position[frame_index].x) * scale.x;
  const double dy = (record.position[frame_index].y - record.gt_position[frame_index].y) * scale.y;
  return std::hypot(dx, dy);
}

void validate_thresholds(const std::vector<double>& thresholds) {
  if (thresholds.empty()) {
    raise(ErrorCode::BadConfig, "at least one position threshold is required");
  }
  for (double t : thresholds) {
    if (!(t > 0.0)) {
      raise(ErrorCode::BadConfig, "position thresholds must be positive");
    }
  }
}

// Shared accumulation core for position accuracy; `include` filters pairs by
// predicted visibility (0 = occluded slice, 1 = visible slice, -1 = all).
PositionAccuracy accumulate_position_accuracy(const std::vector<TrackRecord>& records,
                                              const std::vector<double>& thresholds,
                                              CoordinateScale scale, int include) {
  PositionAccuracy acc;
  acc.thresholds = thresholds;
  acc.hits.assign(thresholds.size(), 0);
  acc.delta_at.assign(thresholds.size(), 0.0);
  for (const TrackRecord& record : records) {
    for (int f = 1; f < record.frame_count(); ++f) {
      if (!record.gt_visible[f]) continue;
      if (include >= 0 && static_cast<int>(record.visible[f] ? 1 : 0) != include) continue;
      ++acc.total;
      const double err = pair_error(record, f, scale);
      for (std::size_t t = 0; t < thresholds.size(); ++t) {
        if (err < thresholds[t]) ++acc.hits[t];
      }
    }
  }
  if (acc.total > 0) {
    double sum = 0.0;
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
      acc.delta_at[t] = static_cast<double>(acc.hits[t]) / static_cast<double>(acc.total);
      sum += acc.delta_at[t];
    }
    acc.delta_avg = sum / static_cast<double>(thresholds.size());
  }
  return acc;
}

}  // namespace

double occlusion_accuracy(const std::vector<TrackRecord>& records) {
  require_gt(records);
  long correct = 0;
  long total = 0;
  for (const TrackRecord& record : records) {
    for (int f = 1; f < record.frame_count(); ++f) {
      ++total;
      if ((record.visible[f] != 0) == (record.gt_visible[f] != 0)) ++correct;
    }
  }
  if (total == 0) return 1.0;
  return static_cast<double>(correct) / static_cast<double>(total);
}

PositionAccuracy position_accuracy(const std::vector<TrackRecord>& records,
                                   const std::vector<double>& thresholds,
                                   CoordinateScale scale) {
  require_gt(records);
  validate_thresholds(thresholds);
  PositionAccuracy acc = accumulate_position_accuracy(records, thresholds, scale, -1);
  if (acc.total == 0) {
    raise(ErrorCode::EmptyEvalSet, "no ground-truth-visible pairs to evaluate");
  }
  return acc;
}

double average_jaccard(const std::vector<TrackRecord>& records,
                       const std::vector<double>& thresholds, CoordinateScale scale) {
  require_gt(records);
  validate_thresholds(thresholds);
  double sum = 0.0;
  for (double threshold : thresholds) {
    JaccardCounts c;
    for (const TrackRecord& record : records) {
      for (int f = 1; f < record.frame_count(); ++f) {
        const bool gt_vis = record.gt_visible[f] != 0;
        const bool pred_vis = record.visible[f] != 0;
        const bool within = gt_vis && pair_error(record, f, scale) < threshold;
        if (pred_vis && gt_vis && within) ++c.tp;
        if (pred_vis && (!gt_vis || !within)) ++c.fp;
        if (gt_vis && (!pred_vis || !within)) ++c.fn;
      }
    }
    const long denom = c.tp + c.fp + c.fn;
    sum += denom == 0 ? 1.0 : static_cast<double>(c.tp) / static_cast<double>(denom);
  }
  return sum / static_cast<double>(thresholds.size());
}

PrecisionRecall visibility_precision_recall(const std::vector<TrackRecord>& records) {
  require_gt(records);
  PrecisionRecall pr;
  for (const TrackRecord& record : records) {
    for (int f = 1; f < record.frame_count(); ++f) {
      const bool gt_vis = record.gt_visible[f] != 0;
      const bool pred_vis = record.visible[f] != 0;
      if (pred_vis && gt_vis) ++pr.tp;
      if (pred_vis && !gt_vis) ++pr.fp;
      if (!pred_vis && gt_vis) ++pr.fn;
    }
  }
  if (pr.tp + pr.fp == 0) {
    pr.precision = 1.0;
    pr.precision_degenerate = true;
  } else {
    pr.precision = static_cast<double>(pr.tp) / static_cast<double>(pr.tp + pr.fp);
  }
  if (pr.tp + pr.fn == 0) {
    pr.recall = 1.0;
    pr.recall_degenerate = true;
  } else {
    pr.recall = static_cast<double>(pr.tp) / static_cast<double>(pr.tp + pr.fn);
  }
  return pr;
}

VisibilitySliceReport slice_by_predicted_visibility(const std::vector<TrackRecord>& records,
                                                    const std::vector<double>& thresholds,
                                                    CoordinateScale scale) {
  require_gt(records);
  validate_thresholds(thresholds);
  VisibilitySliceReport report;
  report.all = accumulate_position_accuracy(records, thresholds, scale, -1);
  if (report.all.total == 0) {
    raise(ErrorCode::EmptyEvalSet, "no ground-truth-visible pairs to evaluate");
  }
  PositionAccuracy vis = accumulate_position_accuracy(records, thresholds, scale, 1);
  if (vis.total > 0) report.predicted_visible = std::move(vis);
  PositionAccuracy occ = accumulate_position_accuracy(records, thresholds, scale, 0);
  if (occ.total > 0) report.predicted_occluded = std::move(occ);
  return report;
}

EvalReport evaluate(const std::vector<TrackRecord>& records, const EvalOptions& options) {
  require_gt(records);
  validate_thresholds(options.thresholds);
  if (!options.native_extent.valid() || !options.evaluation_extent.valid()) {
    raise(ErrorCode::BadConfig, "evaluation requires valid native and evaluation extents");
  }
  const CoordinateScale scale{
      static_cast<double>(options.evaluation_extent.width) / options.native_extent.width,
      static_cast<double>(options.evaluation_extent.height) / options.native_extent.height};

  EvalReport report;
  report.native_extent = options.native_extent;
  report.evaluation_extent = options.evaluation_extent;

  long correct = 0;
  long total = 0;
  for (const TrackRecord& record : records) {
    for (int f = 1; f < record.frame_count(); ++f) {
      ++total;
      if ((record.visible[f] != 0) == (record.gt_visible[f] != 0)) ++correct;
    }
  }
  report.oa_correct = correct;
  report.oa_total = total;
  report.oa = total == 0 ? 1.0 : static_cast<double>(correct) / static_cast<double>(total);

  report.position = position_accuracy(records, options.thresholds, scale);

  report.jaccard_at.assign(options.thresholds.size(), 0.0);
  report.jaccard_counts.assign(options.thresholds.size(), JaccardCounts{});
  report.jaccard_degenerate.assign(options.thresholds.size(), 0);
  double aj_sum = 0.0;
  for (std::size_t t = 0; t < options.thresholds.size(); ++t) {
    JaccardCounts& c = report.jaccard_counts[t];
    for (const TrackRecord& record : records) {
      for (int f = 1; f < record.frame_count(); ++f) {
        const bool gt_vis = record.gt_visible[f] != 0;
        const bool pred_vis = record.visible[f] != 0;
        const bool within = gt_vis && pair_error(record, f, scale) < options.thresholds[t];
        if (pred_vis && gt_vis && within) ++c.tp;
        if (pred_vis && (!gt_vis || !within)) ++c.fp;
        if (gt_vis && (!pred_vis || !within)) ++c.fn;
      }
    }
    const long denom = c.tp + c.fp + c.fn;
    if (denom == 0) {
      report.jaccard_at[t] = 1.0;
      report.jaccard_degenerate[t] = 1;
    } else {
      report.jaccard_at[t] = static_cast<double>(c.tp) / static_cast<double>(denom);
    }
    aj_sum += report.jaccard_at[t];
  }
  report.aj = aj_sum / static_cast<double>(options.thresholds.size());

  const PrecisionRecall pr = visibility_precision_recall(records);
  report.precision = pr.precision;
  report.recall = pr.recall;
  report.vis_tp = pr.tp;
  report.vis_fp = pr.fp;
  report.vis_fn = pr.fn;
  report.precision_degenerate = pr.precision_degenerate;
  report.recall_degenerate = pr.recall_degenerate;
  return report;
}

DensePrediction sample_dense_prediction(const ChainState& state, Point query,
                                        double occlusion_threshold) {
  if (!in_bounds(query, state.extent)) {
    raise(ErrorCode::OutOfBounds, "query point outside reference bounds");
  }
  DensePrediction prediction;
  prediction.position =
      Point{sample_bilinear(std::span<const double>(state.x), state.extent, query),
            sample_bilinear(std::span<const double>(state.y), state.extent, query)};
  const double occ =
      sample_bilinear(std::span<const double>(state.occlusion), state.extent, query);
  prediction.visible = occ <= occlusion_threshold;
  prediction.variance =
      sample_bilinear(std::span<const double>(state.variance), state.extent, query);
  return prediction;
}

std::vector<TrackRecord> sample_track_records(const std::vector<ChainState>& states,
                                              const std::vector<Point>& queries,
                                              double occlusion_threshold, char source) {
  if (states.empty()) {
    raise(ErrorCode::MissingState, "no chain states to sample");
  }
  std::vector<TrackRecord> records;
  records.reserve(queries.size());
  for (std::size_t q = 0; q < queries.size(); ++q) {
    TrackRecord record;
    record.point_id = static_cast<int>(q);
    record.query = queries[q];
    record.position.reserve(states.size());
    record.visible.reserve(states.size());
    record.variance.reserve(states.size());
    record.source.assign(states.size(), source);
    for (const ChainState& state : states) {
      const DensePrediction p = sample_dense_prediction(state, queries[q], occlusion_threshold);
      record.position.push_back(p.position);
      record.visible.push_back(p.visible ? 1 : 0);
      record.variance.push_back(p.variance);
    }
    records.push_back(std::move(record));
  }
  return records;
}

}  // namespace mft
