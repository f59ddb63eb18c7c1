#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mft/provider.hpp"
#include "mft/tracks.hpp"

namespace mft {

// 2x3 affine map q = A * r + t in pixel coordinates.
struct AffineTransform {
  double a11 = 1.0, a12 = 0.0, a13 = 0.0;
  double a21 = 0.0, a22 = 1.0, a23 = 0.0;

  static AffineTransform identity() { return {}; }

  Point apply(Point p) const {
    return Point{a11 * p.x + a12 * p.y + a13, a21 * p.x + a22 * p.y + a23};
  }
  double determinant() const { return a11 * a22 - a12 * a21; }
  AffineTransform inverse() const;
  // this ∘ other: applies `other` first.
  AffineTransform compose(const AffineTransform& other) const;
};

// Rigid motion of an object relative to its reference pose: rotation and
// isotropic scale about the shape center, then translation. Frame 1 must be
// the identity (zero translation, zero rotation, unit scale).
struct RigidMotion {
  Point translation;
  double rotation = 0.0;  // radians
  double scale = 1.0;
};

enum class ShapeKind { Rectangle, Ellipse };

// A flat rigid occluder. The shape is fixed in reference coordinates; the
// per-frame motion places it in every other frame. Later objects in the
// scene list are nearer to the camera.
struct ObjectSpec {
  ShapeKind shape = ShapeKind::Rectangle;
  Point center;
  double half_width = 0.0;
  double half_height = 0.0;
  std::vector<RigidMotion> motion;  // one entry per frame, [0] identity

  bool contains_reference(Point r) const;
  Point to_frame(int frame, Point reference) const;
  Point to_reference(int frame, Point in_frame) const;
};

struct SceneSpec {
  ImageExtent extent;
  int frame_count = 1;
  std::vector<AffineTransform> background;  // one entry per frame, [0] identity
  std::vector<ObjectSpec> objects;          // far to near

  void validate() const;  // raises BadConfig on inconsistency
};

// Controlled corruption of the exact scene flows. Flow noise is zero-mean
// per-axis Gaussian with scale a + b * |j - i| pixels, applied to the flow
// vectors so that chaining accumulates it. Occlusion errors flip the binary
// ground-truth occlusion. Everything is a pure function of (scene, i, j,
// seed), independent of evaluation order.
struct DegradationModel {
  double noise_base = 0.0;       // a
  double noise_per_frame = 0.0;  // b
  enum class VarianceReport { Honest, Miscalibrated };
  VarianceReport variance_report = VarianceReport::Honest;
  double miscalibrated_value = 0.0;  // reported sigma when miscalibrated
  double false_occlusion_rate = 0.0;
  double missed_occlusion_rate = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Exact flow, zero variance and binary occlusion between frames i and j, all
// derived from the analytic motion model of whichever surface owns each
// pixel in frame i.
FlowBundle gt_flow(const SceneSpec& scene, int i, int j);

// gt_flow plus seeded noise and reporting errors per the model.
FlowBundle degraded_flow(const SceneSpec& scene, int i, int j, const DegradationModel& model);

// Exact per-frame positions and visibility for query points given in frame 1.
std::vector<TrackRecord> gt_tracks(const SceneSpec& scene, const std::vector<Point>& queries);

// Flow provider backed by the analytic scene, optionally degraded.
class OracleProvider final : public FlowProvider {
 public:
  explicit OracleProvider(SceneSpec scene, std::optional<DegradationModel> model = {});

  ImageExtent extent() const override { return scene_.extent; }
  int frame_count() const override { return scene_.frame_count; }
  FlowBundle provide(const FlowRequest& request) const override;

  const SceneSpec& scene() const { return scene_; }

 private:
  SceneSpec scene_;
  std::optional<DegradationModel> model_;
};

// Human-writable scene description; see README for the grammar.
SceneSpec parse_scene(const std::string& text);
SceneSpec read_scene_file(const std::string& path);

// Convenience builders used by tests and fixtures.
std::vector<RigidMotion> linear_motion(int frame_count, Point velocity,
                                       double spin = 0.0, double growth = 1.0);
std::vector<AffineTransform> repeated_affine_step(int frame_count, const AffineTransform& step);

// Query grid: integer points every `stride` pixels, offset by stride / 2.
std::vector<Point> grid_queries(ImageExtent extent, int stride);

}  // namespace mft
