#include "mft/ensemble.hpp"

#include <string>

namespace mft {

EnsembleStrategy parse_ensemble_strategy(std::string_view name) {
  if (name == "a-only") return EnsembleStrategy::AOnly;
  if (name == "b-only") return EnsembleStrategy::BOnly;
  if (name == "position-b-occlusion-a") return EnsembleStrategy::PositionBOcclusionA;
  if (name == "selective-b-position") return EnsembleStrategy::SelectiveBPosition;
  raise(ErrorCode::BadConfig, "unknown ensemble strategy '" + std::string(name) + "'");
}

const char* ensemble_strategy_name(EnsembleStrategy strategy) {
  switch (strategy) {
    case EnsembleStrategy::AOnly: return "a-only";
    case EnsembleStrategy::BOnly: return "b-only";
    case EnsembleStrategy::PositionBOcclusionA: return "position-b-occlusion-a";
    case EnsembleStrategy::SelectiveBPosition: return "selective-b-position";
  }
  return "unknown";
}

std::vector<TrackRecord> combine(const std::vector<TrackRecord>& pred_a,
                                 const std::vector<TrackRecord>& pred_b,
                                 EnsembleStrategy strategy) {
  validate_records(pred_a);
  validate_records(pred_b);
  if (pred_a.size() != pred_b.size()) {
    raise(ErrorCode::ShapeMismatch, "trackers cover different query sets");
  }
  if (pred_a.front().frame_count() != pred_b.front().frame_count()) {
    raise(ErrorCode::ShapeMismatch, "trackers cover different frame counts");
  }

  if (strategy == EnsembleStrategy::AOnly) return pred_a;
  if (strategy == EnsembleStrategy::BOnly) return pred_b;

  std::vector<TrackRecord> combined;
  combined.reserve(pred_a.size());
  for (std::size_t i = 0; i < pred_a.size(); ++i) {
    const TrackRecord& a = pred_a[i];
    const TrackRecord& b = pred_b[i];
    if (a.point_id != b.point_id || !(a.query == b.query)) {
      raise(ErrorCode::ShapeMismatch,
            "query point mismatch at record " + std::to_string(i));
    }
    if (a.frame_count() != b.frame_count()) {
      raise(ErrorCode::ShapeMismatch,
            "frame count mismatch at record " + std::to_string(i));
    }

    TrackRecord out = a;  // visibility and ground truth pass through from A
    const std::size_t frames = out.position.size();
    if (out.source.empty()) out.source.assign(frames, 'A');
    if (out.variance.empty()) out.variance.assign(frames, 0.0);
    for (int f = 0; f < a.frame_count(); ++f) {
      const bool take_b = strategy == EnsembleStrategy::PositionBOcclusionA ||
                          (strategy == EnsembleStrategy::SelectiveBPosition && b.visible[f]);
      if (take_b) {
        out.position[f] = b.position[f];
        out.variance[f] = b.variance.empty() ? 0.0 : b.variance[f];
        out.source[f] = b.source.empty() ? 'B' : b.source[f];
      }
    }
    combined.push_back(std::move(out));
  }
  return combined;
}

}  // namespace mft
