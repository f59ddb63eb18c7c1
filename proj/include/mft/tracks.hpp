#pragma once

#include <cstdint>
#include <vector>

#include "mft/geometry.hpp"

namespace mft {

// Per-query-point trajectory, the unit of evaluation. Frames run contiguously
// from 1 (the query frame) to N; index 0 of every per-frame vector is frame 1.
// Ground-truth columns are optional and empty when absent.
struct TrackRecord {
  int point_id = 0;
  Point query;  // frame-1 coordinates

  std::vector<Point> position;
  std::vector<std::uint8_t> visible;
  std::vector<double> variance;      // chained variance reported per frame
  std::vector<char> source;          // tracker tag that supplied the position

  std::vector<Point> gt_position;
  std::vector<std::uint8_t> gt_visible;

  int frame_count() const { return static_cast<int>(position.size()); }
  bool has_gt() const { return !gt_visible.empty(); }
};

// Structural validation shared by metrics and ensembling: non-empty, equal
// frame counts, and parallel arrays of matching length. Raises ShapeMismatch.
void validate_records(const std::vector<TrackRecord>& records);

}  // namespace mft
