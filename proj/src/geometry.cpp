#include "mft/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mft {

namespace {

constexpr double kSampleTolerance = 1e-6;

void require_valid_extent(ImageExtent extent) {
  if (!extent.valid()) {
    raise(ErrorCode::BadConfig, "image extent must be at least 1x1");
  }
}

template <typename T>
double bilinear_unchecked(std::span<const T> plane, ImageExtent extent, double x, double y) {
  int x0 = static_cast<int>(std::floor(x));
  int y0 = static_cast<int>(std::floor(y));
  double fx = x - x0;
  double fy = y - y0;
  if (x0 < 0) {
    x0 = 0;
    fx = 0.0;
  } else if (x0 > extent.width - 1) {
    x0 = extent.width - 1;
    fx = 0.0;
  }
  if (y0 < 0) {
    y0 = 0;
    fy = 0.0;
  } else if (y0 > extent.height - 1) {
    y0 = extent.height - 1;
    fy = 0.0;
  }
  const int x1 = std::min(x0 + 1, extent.width - 1);
  const int y1 = std::min(y0 + 1, extent.height - 1);

  const double w00 = (1.0 - fx) * (1.0 - fy);
  const double w10 = fx * (1.0 - fy);
  const double w01 = (1.0 - fx) * fy;
  const double w11 = fx * fy;

  const auto at = [&](int xx, int yy) {
    return static_cast<double>(plane[static_cast<std::size_t>(yy) * extent.width + xx]);
  };

  // Zero-weight corners are skipped so lattice points reproduce the stored
  // value exactly and so 0 * inf cannot poison the result.
  double acc = 0.0;
  if (w00 != 0.0) acc += w00 * at(x0, y0);
  if (w10 != 0.0) acc += w10 * at(x1, y0);
  if (w01 != 0.0) acc += w01 * at(x0, y1);
  if (w11 != 0.0) acc += w11 * at(x1, y1);
  return acc;
}

template <typename T>
double bilinear_strict(std::span<const T> plane, ImageExtent extent, Point p) {
  require_valid_extent(extent);
  if (plane.size() != extent.pixel_count()) {
    raise(ErrorCode::ShapeMismatch, "plane size does not match extent");
  }
  if (p.x < -kSampleTolerance || p.x > extent.width - 1 + kSampleTolerance ||
      p.y < -kSampleTolerance || p.y > extent.height - 1 + kSampleTolerance) {
    raise(ErrorCode::OutOfBounds,
          "sample point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
              ") outside lattice hull of " + std::to_string(extent.width) + "x" +
              std::to_string(extent.height) + " field");
  }
  const double x = std::clamp(p.x, 0.0, static_cast<double>(extent.width - 1));
  const double y = std::clamp(p.y, 0.0, static_cast<double>(extent.height - 1));
  return bilinear_unchecked(plane, extent, x, y);
}

template <typename T>
double bilinear_clamped(std::span<const T> plane, ImageExtent extent, Point p) {
  const double x = std::clamp(p.x, 0.0, static_cast<double>(extent.width - 1));
  const double y = std::clamp(p.y, 0.0, static_cast<double>(extent.height - 1));
  return bilinear_unchecked(plane, extent, x, y);
}

}  // namespace

const char* field_role_name(FieldRole role) {
  switch (role) {
    case FieldRole::Variance: return "variance";
    case FieldRole::Certainty: return "certainty";
    case FieldRole::Occlusion: return "occlusion";
  }
  return "unknown";
}

ScalarField::ScalarField(ImageExtent extent, FieldRole role, std::vector<float> values)
    : extent_(extent), role_(role), values_(std::move(values)) {
  require_valid_extent(extent_);
  if (values_.size() != extent_.pixel_count()) {
    raise(ErrorCode::ShapeMismatch, "scalar field value count does not match extent");
  }
}

ScalarField ScalarField::constant(ImageExtent extent, FieldRole role, float value) {
  require_valid_extent(extent);
  return ScalarField(extent, role, std::vector<float>(extent.pixel_count(), value));
}

FlowField::FlowField(ImageExtent extent, std::vector<float> u, std::vector<float> v)
    : extent_(extent), u_(std::move(u)), v_(std::move(v)) {
  require_valid_extent(extent_);
  if (u_.size() != extent_.pixel_count() || v_.size() != extent_.pixel_count()) {
    raise(ErrorCode::ShapeMismatch, "flow channel size does not match extent");
  }
}

FlowField FlowField::constant(ImageExtent extent, float u, float v) {
  require_valid_extent(extent);
  return FlowField(extent, std::vector<float>(extent.pixel_count(), u),
                   std::vector<float>(extent.pixel_count(), v));
}

FlowBundle::FlowBundle(FlowField flow_in, ScalarField variance_in, ScalarField occlusion_in)
    : flow(std::move(flow_in)),
      variance(std::move(variance_in)),
      occlusion(std::move(occlusion_in)) {
  if (variance.role() != FieldRole::Variance) {
    raise(ErrorCode::RoleMismatch, "bundle variance field has role " +
                                       std::string(field_role_name(variance.role())));
  }
  if (occlusion.role() != FieldRole::Occlusion) {
    raise(ErrorCode::RoleMismatch, "bundle occlusion field has role " +
                                       std::string(field_role_name(occlusion.role())));
  }
  if (!(variance.extent() == flow.extent()) || !(occlusion.extent() == flow.extent())) {
    raise(ErrorCode::ExtentMismatch, "bundle fields do not share one extent");
  }
}

bool in_bounds(Point p, ImageExtent extent) {
  return p.x >= 0.0 && p.x <= extent.width - 1 && p.y >= 0.0 && p.y <= extent.height - 1;
}

bool in_image_area(Point p, ImageExtent extent) {
  return p.x >= -0.5 && p.x < extent.width - 0.5 && p.y >= -0.5 && p.y < extent.height - 0.5;
}

double sample_bilinear(std::span<const float> plane, ImageExtent extent, Point p) {
  return bilinear_strict(plane, extent, p);
}

double sample_bilinear(std::span<const double> plane, ImageExtent extent, Point p) {
  return bilinear_strict(plane, extent, p);
}

double sample_bilinear(const ScalarField& field, Point p) {
  return bilinear_strict(field.values(), field.extent(), p);
}

Point sample_flow(const FlowField& flow, Point p) {
  return Point{bilinear_strict(flow.u(), flow.extent(), p),
               bilinear_strict(flow.v(), flow.extent(), p)};
}

double sample_bilinear_clamped(std::span<const float> plane, ImageExtent extent, Point p) {
  return bilinear_clamped(plane, extent, p);
}

double sample_bilinear_clamped(std::span<const double> plane, ImageExtent extent, Point p) {
  return bilinear_clamped(plane, extent, p);
}

AdvanceResult advance_point(Point p, const FlowField& flow) {
  if (!in_image_area(p, flow.extent())) {
    return AdvanceResult{p, true};
  }
  const double u = bilinear_clamped(flow.u(), flow.extent(), p);
  const double v = bilinear_clamped(flow.v(), flow.extent(), p);
  return AdvanceResult{Point{p.x + u, p.y + v}, false};
}

}  // namespace mft
