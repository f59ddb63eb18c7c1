#include "mft/synth.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>

#include "mft/rng.hpp"

namespace mft {

namespace {

constexpr double kMinDeterminant = 1e-12;

// Stream tags separating the independent noise planes of one frame pair.
constexpr std::uint64_t kFlowNoiseStream = 0xF10A7ull;
constexpr std::uint64_t kOcclusionFlipStream = 0x0CC1ull;

void require_frame_pair(const SceneSpec& scene, int i, int j) {
  if (i < 1 || j <= i || j > scene.frame_count) {
    raise(ErrorCode::InvalidFrames,
          "need 1 <= i < j <= " + std::to_string(scene.frame_count) + ", got (" +
              std::to_string(i) + ", " + std::to_string(j) + ")");
  }
}

}  // namespace

AffineTransform AffineTransform::inverse() const {
  const double det = determinant();
  if (std::abs(det) < kMinDeterminant) {
    raise(ErrorCode::BadConfig, "affine transform is not invertible");
  }
  AffineTransform inv;
  inv.a11 = a22 / det;
  inv.a12 = -a12 / det;
  inv.a21 = -a21 / det;
  inv.a22 = a11 / det;
  inv.a13 = -(inv.a11 * a13 + inv.a12 * a23);
  inv.a23 = -(inv.a21 * a13 + inv.a22 * a23);
  return inv;
}

AffineTransform AffineTransform::compose(const AffineTransform& other) const {
  AffineTransform out;
  out.a11 = a11 * other.a11 + a12 * other.a21;
  out.a12 = a11 * other.a12 + a12 * other.a22;
  out.a13 = a11 * other.a13 + a12 * other.a23 + a13;
  out.a21 = a21 * other.a11 + a22 * other.a21;
  out.a22 = a21 * other.a12 + a22 * other.a22;
  out.a23 = a21 * other.a13 + a22 * other.a23 + a23;
  return out;
}

bool ObjectSpec::contains_reference(Point r) const {
  const double dx = r.x - center.x;
  const double dy = r.y - center.y;
  if (shape == ShapeKind::Rectangle) {
    return std::abs(dx) <= half_width && std::abs(dy) <= half_height;
  }
  const double nx = dx / half_width;
  const double ny = dy / half_height;
  return nx * nx + ny * ny <= 1.0;
}

Point ObjectSpec::to_frame(int frame, Point reference) const {
  const RigidMotion& m = motion[static_cast<std::size_t>(frame - 1)];
  const double c = std::cos(m.rotation);
  const double s = std::sin(m.rotation);
  const double dx = reference.x - center.x;
  const double dy = reference.y - center.y;
  return Point{center.x + m.translation.x + m.scale * (c * dx - s * dy),
               center.y + m.translation.y + m.scale * (s * dx + c * dy)};
}

Point ObjectSpec::to_reference(int frame, Point in_frame) const {
  const RigidMotion& m = motion[static_cast<std::size_t>(frame - 1)];
  const double c = std::cos(m.rotation);
  const double s = std::sin(m.rotation);
  const double dx = (in_frame.x - center.x - m.translation.x) / m.scale;
  const double dy = (in_frame.y - center.y - m.translation.y) / m.scale;
  return Point{center.x + (c * dx + s * dy), center.y + (-s * dx + c * dy)};
}

void SceneSpec::validate() const {
  if (!extent.valid()) {
    raise(ErrorCode::BadConfig, "scene extent must be at least 1x1");
  }
  if (frame_count < 1) {
    raise(ErrorCode::BadConfig, "scene needs at least one frame");
  }
  if (background.size() != static_cast<std::size_t>(frame_count)) {
    raise(ErrorCode::BadConfig, "background motion must list one transform per frame");
  }
  const AffineTransform& first = background.front();
  if (first.a11 != 1.0 || first.a12 != 0.0 || first.a13 != 0.0 || first.a21 != 0.0 ||
      first.a22 != 1.0 || first.a23 != 0.0) {
    raise(ErrorCode::BadConfig, "background motion at frame 1 must be the identity");
  }
  for (const AffineTransform& t : background) {
    if (std::abs(t.determinant()) < kMinDeterminant) {
      raise(ErrorCode::BadConfig, "background transform is not invertible");
    }
  }
  for (const ObjectSpec& object : objects) {
    if (!(object.half_width > 0.0) || !(object.half_height > 0.0)) {
      raise(ErrorCode::BadConfig, "object shapes need positive area");
    }
    if (object.motion.size() != static_cast<std::size_t>(frame_count)) {
      raise(ErrorCode::BadConfig, "object motion must list one entry per frame");
    }
    const RigidMotion& m0 = object.motion.front();
    if (m0.translation.x != 0.0 || m0.translation.y != 0.0 || m0.rotation != 0.0 ||
        m0.scale != 1.0) {
      raise(ErrorCode::BadConfig, "object motion at frame 1 must be the identity");
    }
    for (const RigidMotion& m : object.motion) {
      if (!(m.scale > 0.0) || !std::isfinite(m.rotation) ||
          !std::isfinite(m.translation.x) || !std::isfinite(m.translation.y)) {
        raise(ErrorCode::BadConfig, "object motion entries must be finite with scale > 0");
      }
    }
  }
}

void DegradationModel::validate() const {
  if (noise_base < 0.0 || noise_per_frame < 0.0) {
    raise(ErrorCode::BadConfig, "noise scales must be nonnegative");
  }
  if (false_occlusion_rate < 0.0 || false_occlusion_rate > 1.0 ||
      missed_occlusion_rate < 0.0 || missed_occlusion_rate > 1.0) {
    raise(ErrorCode::BadConfig, "occlusion error rates must lie in [0, 1]");
  }
  if (miscalibrated_value < 0.0) {
    raise(ErrorCode::BadConfig, "miscalibrated variance must be nonnegative");
  }
}

namespace {

// Index of the nearest object covering `p` in `frame`, or -1 for background.
int owner_at(const SceneSpec& scene, int frame, Point p) {
  for (int k = static_cast<int>(scene.objects.size()) - 1; k >= 0; --k) {
    const ObjectSpec& object = scene.objects[static_cast<std::size_t>(k)];
    if (object.contains_reference(object.to_reference(frame, p))) return k;
  }
  return -1;
}

Point owner_to_reference(const SceneSpec& scene, int owner, int frame, Point p) {
  if (owner < 0) {
    return scene.background[static_cast<std::size_t>(frame - 1)].inverse().apply(p);
  }
  return scene.objects[static_cast<std::size_t>(owner)].to_reference(frame, p);
}

Point owner_to_frame(const SceneSpec& scene, int owner, int frame, Point r) {
  if (owner < 0) {
    return scene.background[static_cast<std::size_t>(frame - 1)].apply(r);
  }
  return scene.objects[static_cast<std::size_t>(owner)].to_frame(frame, r);
}

// A surface point owned by `owner` sitting at `target` in frame j is occluded
// there when it left the image or a nearer object covers it.
bool occluded_at(const SceneSpec& scene, int owner, int j, Point target) {
  if (!in_bounds(target, scene.extent)) return true;
  for (int k = static_cast<int>(scene.objects.size()) - 1; k > owner; --k) {
    const ObjectSpec& object = scene.objects[static_cast<std::size_t>(k)];
    if (object.contains_reference(object.to_reference(j, target))) return true;
  }
  return false;
}

}  // namespace

FlowBundle gt_flow(const SceneSpec& scene, int i, int j) {
  scene.validate();
  require_frame_pair(scene, i, j);
  const ImageExtent extent = scene.extent;
  const std::size_t n = extent.pixel_count();
  std::vector<float> u(n), v(n), occlusion(n);

  // Per-owner inverse of frame i is reused across pixels via owner_to_reference;
  // background inversion is hoisted since it dominates.
  const AffineTransform background_inverse =
      scene.background[static_cast<std::size_t>(i - 1)].inverse();

  std::size_t idx = 0;
  for (int row = 0; row < extent.height; ++row) {
    for (int col = 0; col < extent.width; ++col, ++idx) {
      const Point q{static_cast<double>(col), static_cast<double>(row)};
      const int owner = owner_at(scene, i, q);
      const Point reference = owner < 0 ? background_inverse.apply(q)
                                        : owner_to_reference(scene, owner, i, q);
      const Point target = owner_to_frame(scene, owner, j, reference);
      u[idx] = static_cast<float>(target.x - q.x);
      v[idx] = static_cast<float>(target.y - q.y);
      occlusion[idx] = occluded_at(scene, owner, j, target) ? 1.0f : 0.0f;
    }
  }
  return FlowBundle(FlowField(extent, std::move(u), std::move(v)),
                    ScalarField::constant(extent, FieldRole::Variance, 0.0f),
                    ScalarField(extent, FieldRole::Occlusion, std::move(occlusion)));
}

FlowBundle degraded_flow(const SceneSpec& scene, int i, int j, const DegradationModel& model) {
  model.validate();
  FlowBundle exact = gt_flow(scene, i, j);
  const ImageExtent extent = exact.extent();
  const std::size_t n = extent.pixel_count();

  const double noise_scale = model.noise_base + model.noise_per_frame * (j - i);

  std::vector<float> u(exact.flow.u().begin(), exact.flow.u().end());
  std::vector<float> v(exact.flow.v().begin(), exact.flow.v().end());
  if (noise_scale > 0.0) {
    SplitMix64 rng(derive_stream_key(model.seed, static_cast<std::uint64_t>(i),
                                     static_cast<std::uint64_t>(j), kFlowNoiseStream));
    for (std::size_t p = 0; p < n; ++p) {
      const auto [gx, gy] = rng.next_gaussian_pair();
      u[p] = static_cast<float>(static_cast<double>(u[p]) + noise_scale * gx);
      v[p] = static_cast<float>(static_cast<double>(v[p]) + noise_scale * gy);
    }
  }

  std::vector<float> occlusion(exact.occlusion.values().begin(), exact.occlusion.values().end());
  if (model.false_occlusion_rate > 0.0 || model.missed_occlusion_rate > 0.0) {
    SplitMix64 rng(derive_stream_key(model.seed, static_cast<std::uint64_t>(i),
                                     static_cast<std::uint64_t>(j), kOcclusionFlipStream));
    for (std::size_t p = 0; p < n; ++p) {
      const double roll = rng.next_unit();
      if (occlusion[p] > 0.5f) {
        if (roll < model.missed_occlusion_rate) occlusion[p] = 0.0f;
      } else {
        if (roll < model.false_occlusion_rate) occlusion[p] = 1.0f;
      }
    }
  }

  const float reported =
      model.variance_report == DegradationModel::VarianceReport::Honest
          ? static_cast<float>(noise_scale * noise_scale)
          : static_cast<float>(model.miscalibrated_value);

  return FlowBundle(FlowField(extent, std::move(u), std::move(v)),
                    ScalarField::constant(extent, FieldRole::Variance, reported),
                    ScalarField(extent, FieldRole::Occlusion, std::move(occlusion)));
}

std::vector<TrackRecord> gt_tracks(const SceneSpec& scene, const std::vector<Point>& queries) {
  scene.validate();
  std::vector<TrackRecord> records;
  records.reserve(queries.size());
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const Point query = queries[q];
    if (!in_bounds(query, scene.extent)) {
      raise(ErrorCode::OutOfBounds, "query point outside frame 1 bounds");
    }
    const int owner = owner_at(scene, 1, query);
    const Point reference = owner_to_reference(scene, owner, 1, query);

    TrackRecord record;
    record.point_id = static_cast<int>(q);
    record.query = query;
    record.position.reserve(static_cast<std::size_t>(scene.frame_count));
    record.visible.reserve(static_cast<std::size_t>(scene.frame_count));
    for (int frame = 1; frame <= scene.frame_count; ++frame) {
      const Point at = owner_to_frame(scene, owner, frame, reference);
      record.position.push_back(at);
      record.visible.push_back(occluded_at(scene, owner, frame, at) ? 0 : 1);
    }
    record.variance.assign(record.position.size(), 0.0);
    record.source.assign(record.position.size(), 'G');
    record.gt_position = record.position;
    record.gt_visible = record.visible;
    records.push_back(std::move(record));
  }
  return records;
}

OracleProvider::OracleProvider(SceneSpec scene, std::optional<DegradationModel> model)
    : scene_(std::move(scene)), model_(std::move(model)) {
  scene_.validate();
  if (model_) model_->validate();
}

FlowBundle OracleProvider::provide(const FlowRequest& request) const {
  validate_request(request);
  if (model_) {
    return degraded_flow(scene_, request.source_frame, request.target_frame, *model_);
  }
  return gt_flow(scene_, request.source_frame, request.target_frame);
}

std::vector<RigidMotion> linear_motion(int frame_count, Point velocity, double spin,
                                       double growth) {
  std::vector<RigidMotion> motion(static_cast<std::size_t>(frame_count));
  for (int frame = 1; frame <= frame_count; ++frame) {
    RigidMotion& m = motion[static_cast<std::size_t>(frame - 1)];
    const double t = static_cast<double>(frame - 1);
    m.translation = Point{velocity.x * t, velocity.y * t};
    m.rotation = spin * t;
    m.scale = std::pow(growth, t);
  }
  return motion;
}

std::vector<AffineTransform> repeated_affine_step(int frame_count, const AffineTransform& step) {
  std::vector<AffineTransform> out;
  out.reserve(static_cast<std::size_t>(frame_count));
  out.push_back(AffineTransform::identity());
  for (int frame = 2; frame <= frame_count; ++frame) {
    out.push_back(step.compose(out.back()));
  }
  return out;
}

std::vector<Point> grid_queries(ImageExtent extent, int stride) {
  if (stride < 1) {
    raise(ErrorCode::BadConfig, "query grid stride must be positive");
  }
  std::vector<Point> queries;
  for (int y = stride / 2; y <= extent.height - 1; y += stride) {
    for (int x = stride / 2; x <= extent.width - 1; x += stride) {
      queries.push_back(Point{static_cast<double>(x), static_cast<double>(y)});
    }
  }
  return queries;
}

namespace {

AffineTransform parse_affine_row(std::istringstream& in, const std::string& line) {
  AffineTransform t;
  if (!(in >> t.a11 >> t.a12 >> t.a13 >> t.a21 >> t.a22 >> t.a23)) {
    raise(ErrorCode::BadConfig, "expected six affine coefficients in: " + line);
  }
  return t;
}

}  // namespace

SceneSpec parse_scene(const std::string& text) {
  SceneSpec scene;
  scene.extent = ImageExtent{0, 0};
  scene.frame_count = 0;

  std::optional<AffineTransform> background_step;
  std::vector<std::pair<int, AffineTransform>> background_rows;
  struct PendingObject {
    ShapeKind shape;
    Point center;
    double half_width, half_height;
    Point velocity;
    double spin = 0.0;
    double growth = 1.0;
  };
  std::vector<PendingObject> pending;

  std::istringstream stream(text);
  std::string line;
  while (std::getline(stream, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream in(line);
    std::string keyword;
    if (!(in >> keyword)) continue;

    if (keyword == "extent") {
      if (!(in >> scene.extent.width >> scene.extent.height)) {
        raise(ErrorCode::BadConfig, "extent needs width and height");
      }
    } else if (keyword == "frames") {
      if (!(in >> scene.frame_count)) {
        raise(ErrorCode::BadConfig, "frames needs a count");
      }
    } else if (keyword == "background") {
      std::string mode;
      if (!(in >> mode)) raise(ErrorCode::BadConfig, "background needs a mode");
      if (mode == "identity") {
        background_step = AffineTransform::identity();
      } else if (mode == "step") {
        background_step = parse_affine_row(in, line);
      } else if (mode == "frame") {
        int frame = 0;
        if (!(in >> frame)) raise(ErrorCode::BadConfig, "background frame needs an index");
        background_rows.emplace_back(frame, parse_affine_row(in, line));
      } else {
        raise(ErrorCode::BadConfig, "unknown background mode '" + mode + "'");
      }
    } else if (keyword == "object") {
      PendingObject object;
      std::string shape;
      if (!(in >> shape >> object.center.x >> object.center.y >> object.half_width >>
            object.half_height)) {
        raise(ErrorCode::BadConfig, "object needs: shape cx cy half_w half_h");
      }
      if (shape == "rect") {
        object.shape = ShapeKind::Rectangle;
      } else if (shape == "ellipse") {
        object.shape = ShapeKind::Ellipse;
      } else {
        raise(ErrorCode::BadConfig, "unknown object shape '" + shape + "'");
      }
      std::string option;
      while (in >> option) {
        if (option == "velocity") {
          if (!(in >> object.velocity.x >> object.velocity.y)) {
            raise(ErrorCode::BadConfig, "velocity needs vx vy");
          }
        } else if (option == "spin") {
          if (!(in >> object.spin)) raise(ErrorCode::BadConfig, "spin needs a rate");
        } else if (option == "growth") {
          if (!(in >> object.growth)) raise(ErrorCode::BadConfig, "growth needs a factor");
        } else {
          raise(ErrorCode::BadConfig, "unknown object option '" + option + "'");
        }
      }
      pending.push_back(object);
    } else {
      raise(ErrorCode::BadConfig, "unknown scene directive '" + keyword + "'");
    }
  }

  if (!scene.extent.valid()) raise(ErrorCode::BadConfig, "scene is missing a valid extent");
  if (scene.frame_count < 1) raise(ErrorCode::BadConfig, "scene is missing a frame count");

  if (!background_rows.empty()) {
    if (background_step.has_value()) {
      raise(ErrorCode::BadConfig, "background step and explicit frames are exclusive");
    }
    scene.background.assign(static_cast<std::size_t>(scene.frame_count),
                            AffineTransform::identity());
    std::vector<bool> seen(static_cast<std::size_t>(scene.frame_count), false);
    for (const auto& [frame, transform] : background_rows) {
      if (frame < 1 || frame > scene.frame_count) {
        raise(ErrorCode::BadConfig, "background frame index out of range");
      }
      scene.background[static_cast<std::size_t>(frame - 1)] = transform;
      seen[static_cast<std::size_t>(frame - 1)] = true;
    }
    for (bool s : seen) {
      if (!s) raise(ErrorCode::BadConfig, "explicit background rows must cover every frame");
    }
  } else {
    scene.background = repeated_affine_step(
        scene.frame_count, background_step.value_or(AffineTransform::identity()));
  }

  for (const PendingObject& p : pending) {
    ObjectSpec object;
    object.shape = p.shape;
    object.center = p.center;
    object.half_width = p.half_width;
    object.half_height = p.half_height;
    object.motion = linear_motion(scene.frame_count, p.velocity, p.spin, p.growth);
    scene.objects.push_back(std::move(object));
  }

  scene.validate();
  return scene;
}

SceneSpec read_scene_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    raise(ErrorCode::IoError, "cannot open scene file " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scene(buffer.str());
}

}  // namespace mft
