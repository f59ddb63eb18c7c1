#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mft/metrics.hpp"
#include "mft/tracks.hpp"

namespace mft {

// Line-delimited track text: one "point_id frame x y visible source variance"
// row per (point, frame), frames complete and ordered per point, preceded by
// a header that records the native extent. Ground-truth files share the
// format with the ground truth stored in the prediction columns.
std::string serialize_tracks(const std::vector<TrackRecord>& records, ImageExtent extent);
void write_track_file(const std::filesystem::path& path,
                      const std::vector<TrackRecord>& records, ImageExtent extent);

struct TrackFileContents {
  std::vector<TrackRecord> records;
  ImageExtent extent;
};
TrackFileContents parse_tracks(const std::string& text);
TrackFileContents read_track_file(const std::filesystem::path& path);

// Copies the prediction columns of `gt` into the ground-truth columns of
// `records`, joining on point id. Raises ShapeMismatch when the id sets or
// frame counts differ.
void attach_ground_truth(std::vector<TrackRecord>& records,
                         const std::vector<TrackRecord>& gt);

// Flat key=value serialization of an evaluation report, and its JSON twin.
std::string report_to_text(const EvalReport& report);
std::string report_to_json(const EvalReport& report);
void write_report(const EvalReport& report, const std::filesystem::path& text_path,
                  const std::filesystem::path& json_path);

// Optional slice section appended under slice_* keys.
std::string slices_to_text(const VisibilitySliceReport& slices);

}  // namespace mft
