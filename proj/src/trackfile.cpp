#include "mft/trackfile.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "mft/flow_io.hpp"

namespace mft {

namespace {

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.9g", value);
  return buffer;
}

void append_accuracy(std::string& out, const std::string& prefix,
                     const PositionAccuracy& acc) {
  out += prefix + "delta_avg=" + format_double(acc.delta_avg) + "\n";
  for (std::size_t t = 0; t < acc.thresholds.size(); ++t) {
    const std::string key = format_double(acc.thresholds[t]);
    out += prefix + "delta_at_" + key + "=" + format_double(acc.delta_at[t]) + "\n";
    out += prefix + "delta_hits_" + key + "=" + std::to_string(acc.hits[t]) + "\n";
  }
  out += prefix + "delta_total=" + std::to_string(acc.total) + "\n";
}

}  // namespace

std::string serialize_tracks(const std::vector<TrackRecord>& records, ImageExtent extent) {
  validate_records(records);
  std::string out;
  out += "# mftrack tracks v1\n";
  out += "# extent " + std::to_string(extent.width) + " " + std::to_string(extent.height) + "\n";
  out += "# columns: point_id frame x y visible source variance\n";
  char line[160];
  for (const TrackRecord& record : records) {
    for (int f = 0; f < record.frame_count(); ++f) {
      const char source = record.source.empty() ? '?' : record.source[f];
      const double variance = record.variance.empty() ? 0.0 : record.variance[f];
      std::snprintf(line, sizeof line, "%d %d %.9g %.9g %d %c %.9g\n", record.point_id,
                    f + 1, record.position[f].x, record.position[f].y,
                    record.visible[f] ? 1 : 0, source, variance);
      out += line;
    }
  }
  return out;
}

void write_track_file(const std::filesystem::path& path,
                      const std::vector<TrackRecord>& records, ImageExtent extent) {
  atomic_write_bytes(path, serialize_tracks(records, extent));
}

TrackFileContents parse_tracks(const std::string& text) {
  TrackFileContents contents;
  contents.extent = ImageExtent{0, 0};

  std::map<int, TrackRecord> by_id;
  std::istringstream stream(text);
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(stream, line)) {
    ++line_number;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream header(line.substr(1));
      std::string keyword;
      if (header >> keyword && keyword == "extent") {
        if (!(header >> contents.extent.width >> contents.extent.height)) {
          raise(ErrorCode::ShapeMismatch, "malformed extent header in track file");
        }
      }
      continue;
    }
    std::istringstream in(line);
    int id = 0, frame = 0, visible = 0;
    std::string x_token, y_token, variance_token;
    char source = '?';
    if (!(in >> id >> frame >> x_token >> y_token >> visible >> source >> variance_token)) {
      raise(ErrorCode::ShapeMismatch,
            "malformed track row at line " + std::to_string(line_number));
    }
    // strtod semantics: accepts the "inf" an out-of-bounds pixel's variance
    // serializes to, which stream extraction would reject.
    double x = 0.0, y = 0.0, variance = 0.0;
    try {
      std::size_t used = 0;
      x = std::stod(x_token, &used);
      if (used != x_token.size()) throw std::invalid_argument(x_token);
      y = std::stod(y_token, &used);
      if (used != y_token.size()) throw std::invalid_argument(y_token);
      variance = std::stod(variance_token, &used);
      if (used != variance_token.size()) throw std::invalid_argument(variance_token);
    } catch (const std::exception&) {
      raise(ErrorCode::ShapeMismatch,
            "malformed track row at line " + std::to_string(line_number));
    }
    if (visible != 0 && visible != 1) {
      raise(ErrorCode::ShapeMismatch,
            "visible flag must be 0 or 1 at line " + std::to_string(line_number));
    }
    TrackRecord& record = by_id[id];
    record.point_id = id;
    if (frame != record.frame_count() + 1) {
      raise(ErrorCode::ShapeMismatch, "frames for point " + std::to_string(id) +
                                          " are not contiguous from 1");
    }
    record.position.push_back(Point{x, y});
    record.visible.push_back(static_cast<std::uint8_t>(visible));
    record.variance.push_back(variance);
    record.source.push_back(source);
  }
  if (by_id.empty()) {
    raise(ErrorCode::ShapeMismatch, "track file holds no rows");
  }
  for (auto& [id, record] : by_id) {
    record.query = record.position.front();
    contents.records.push_back(std::move(record));
  }
  validate_records(contents.records);
  return contents;
}

TrackFileContents read_track_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    raise(ErrorCode::IoError, "cannot open track file " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_tracks(buffer.str());
}

void attach_ground_truth(std::vector<TrackRecord>& records,
                         const std::vector<TrackRecord>& gt) {
  validate_records(records);
  validate_records(gt);
  if (records.size() != gt.size()) {
    raise(ErrorCode::ShapeMismatch, "prediction and ground truth cover different point sets");
  }
  std::map<int, const TrackRecord*> gt_by_id;
  for (const TrackRecord& record : gt) gt_by_id[record.point_id] = &record;
  for (TrackRecord& record : records) {
    const auto found = gt_by_id.find(record.point_id);
    if (found == gt_by_id.end()) {
      raise(ErrorCode::ShapeMismatch,
            "no ground truth for point " + std::to_string(record.point_id));
    }
    const TrackRecord& truth = *found->second;
    if (truth.frame_count() != record.frame_count()) {
      raise(ErrorCode::ShapeMismatch,
            "frame count mismatch for point " + std::to_string(record.point_id));
    }
    record.gt_position = truth.position;
    record.gt_visible = truth.visible;
  }
}

std::string report_to_text(const EvalReport& report) {
  std::string out;
  out += "evaluation_extent=" + std::to_string(report.evaluation_extent.width) + "x" +
         std::to_string(report.evaluation_extent.height) + "\n";
  out += "native_extent=" + std::to_string(report.native_extent.width) + "x" +
         std::to_string(report.native_extent.height) + "\n";
  out += "oa=" + format_double(report.oa) + "\n";
  out += "oa_correct=" + std::to_string(report.oa_correct) + "\n";
  out += "oa_total=" + std::to_string(report.oa_total) + "\n";
  append_accuracy(out, "", report.position);
  out += "aj=" + format_double(report.aj) + "\n";
  for (std::size_t t = 0; t < report.jaccard_at.size(); ++t) {
    const std::string key = format_double(report.position.thresholds[t]);
    out += "jaccard_at_" + key + "=" + format_double(report.jaccard_at[t]) + "\n";
    out += "jaccard_tp_" + key + "=" + std::to_string(report.jaccard_counts[t].tp) + "\n";
    out += "jaccard_fp_" + key + "=" + std::to_string(report.jaccard_counts[t].fp) + "\n";
    out += "jaccard_fn_" + key + "=" + std::to_string(report.jaccard_counts[t].fn) + "\n";
    if (report.jaccard_degenerate[t]) {
      out += "jaccard_degenerate_" + key + "=1\n";
    }
  }
  out += "visibility_precision=" + format_double(report.precision) + "\n";
  out += "visibility_recall=" + format_double(report.recall) + "\n";
  out += "visibility_tp=" + std::to_string(report.vis_tp) + "\n";
  out += "visibility_fp=" + std::to_string(report.vis_fp) + "\n";
  out += "visibility_fn=" + std::to_string(report.vis_fn) + "\n";
  if (report.precision_degenerate) out += "visibility_precision_degenerate=1\n";
  if (report.recall_degenerate) out += "visibility_recall_degenerate=1\n";
  return out;
}

std::string report_to_json(const EvalReport& report) {
  nlohmann::json j;
  j["evaluation_extent"] = {report.evaluation_extent.width, report.evaluation_extent.height};
  j["native_extent"] = {report.native_extent.width, report.native_extent.height};
  j["oa"] = report.oa;
  j["oa_correct"] = report.oa_correct;
  j["oa_total"] = report.oa_total;
  j["delta_avg"] = report.position.delta_avg;
  nlohmann::json deltas = nlohmann::json::object();
  for (std::size_t t = 0; t < report.position.thresholds.size(); ++t) {
    const std::string key = format_double(report.position.thresholds[t]);
    deltas[key] = {{"fraction", report.position.delta_at[t]},
                   {"hits", report.position.hits[t]}};
  }
  j["delta_at"] = deltas;
  j["delta_total"] = report.position.total;
  j["aj"] = report.aj;
  nlohmann::json jaccard = nlohmann::json::object();
  for (std::size_t t = 0; t < report.jaccard_at.size(); ++t) {
    const std::string key = format_double(report.position.thresholds[t]);
    jaccard[key] = {{"fraction", report.jaccard_at[t]},
                    {"tp", report.jaccard_counts[t].tp},
                    {"fp", report.jaccard_counts[t].fp},
                    {"fn", report.jaccard_counts[t].fn},
                    {"degenerate", report.jaccard_degenerate[t] != 0}};
  }
  j["jaccard_at"] = jaccard;
  j["visibility"] = {{"precision", report.precision},
                     {"recall", report.recall},
                     {"tp", report.vis_tp},
                     {"fp", report.vis_fp},
                     {"fn", report.vis_fn},
                     {"precision_degenerate", report.precision_degenerate},
                     {"recall_degenerate", report.recall_degenerate}};
  return j.dump(2) + "\n";
}

void write_report(const EvalReport& report, const std::filesystem::path& text_path,
                  const std::filesystem::path& json_path) {
  atomic_write_bytes(text_path, report_to_text(report));
  atomic_write_bytes(json_path, report_to_json(report));
}

std::string slices_to_text(const VisibilitySliceReport& slices) {
  std::string out;
  append_accuracy(out, "slice_any_", slices.all);
  if (slices.predicted_visible) {
    append_accuracy(out, "slice_visible_", *slices.predicted_visible);
  } else {
    out += "slice_visible_empty=1\n";
  }
  if (slices.predicted_occluded) {
    append_accuracy(out, "slice_occluded_", *slices.predicted_occluded);
  } else {
    out += "slice_occluded_empty=1\n";
  }
  return out;
}

}  // namespace mft
