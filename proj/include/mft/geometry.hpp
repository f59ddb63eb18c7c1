#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "mft/errors.hpp"

namespace mft {

// Pixel grid dimensions. Pixel centers sit at integer coordinates with the
// origin at the center of pixel (0, 0), x = column, y = row, top-left first.
struct ImageExtent {
  int width = 0;
  int height = 0;

  bool valid() const { return width >= 1 && height >= 1; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  bool operator==(const ImageExtent&) const = default;
};

// Sub-pixel image location. May lie outside the image.
struct Point {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point&) const = default;
};

enum class FieldRole { Variance, Certainty, Occlusion };

const char* field_role_name(FieldRole role);

// Dense single-channel grid (flow variance, matcher certainty, or occlusion
// score depending on role). Immutable after construction.
class ScalarField {
 public:
  ScalarField(ImageExtent extent, FieldRole role, std::vector<float> values);

  static ScalarField constant(ImageExtent extent, FieldRole role, float value);

  ImageExtent extent() const { return extent_; }
  FieldRole role() const { return role_; }
  std::span<const float> values() const { return values_; }
  float at(int x, int y) const {
    return values_[static_cast<std::size_t>(y) * extent_.width + x];
  }

 private:
  ImageExtent extent_;
  FieldRole role_;
  std::vector<float> values_;
};

// Dense 2-channel displacement grid mapping frame i pixels to frame j
// positions. Immutable after construction.
class FlowField {
 public:
  FlowField(ImageExtent extent, std::vector<float> u, std::vector<float> v);

  static FlowField constant(ImageExtent extent, float u, float v);
  static FlowField zero(ImageExtent extent) { return constant(extent, 0.0f, 0.0f); }

  ImageExtent extent() const { return extent_; }
  std::span<const float> u() const { return u_; }
  std::span<const float> v() const { return v_; }
  std::pair<float, float> at(int x, int y) const {
    const std::size_t i = static_cast<std::size_t>(y) * extent_.width + x;
    return {u_[i], v_[i]};
  }

 private:
  ImageExtent extent_;
  std::vector<float> u_;
  std::vector<float> v_;
};

// The triple a flow provider returns for one frame pair: displacement plus
// per-pixel variance and occlusion score on a shared extent.
struct FlowBundle {
  FlowBundle(FlowField flow_in, ScalarField variance_in, ScalarField occlusion_in);

  ImageExtent extent() const { return flow.extent(); }

  FlowField flow;
  ScalarField variance;
  ScalarField occlusion;
};

// True iff p lies on the closed lattice hull [0, w-1] x [0, h-1].
bool in_bounds(Point p, ImageExtent extent);

// True iff p lies inside the pixel rectangle [-0.5, w-0.5) x [-0.5, h-0.5).
// This is the domain advance_point accepts; the strip between the two domains
// samples with clamp-to-edge semantics.
bool in_image_area(Point p, ImageExtent extent);

// Bilinear interpolation of the four surrounding pixel centers. Exact at
// integer coordinates. p must lie on the lattice hull up to a 1e-6 clamping
// tolerance; anything further out raises OutOfBounds.
double sample_bilinear(std::span<const float> plane, ImageExtent extent, Point p);
double sample_bilinear(std::span<const double> plane, ImageExtent extent, Point p);
double sample_bilinear(const ScalarField& field, Point p);

// Samples both flow channels at p (strict domain, as sample_bilinear).
Point sample_flow(const FlowField& flow, Point p);

// Clamp-to-edge variants used on points known to be inside the image area
// but possibly in the half-pixel strip outside the lattice hull.
double sample_bilinear_clamped(std::span<const float> plane, ImageExtent extent, Point p);
double sample_bilinear_clamped(std::span<const double> plane, ImageExtent extent, Point p);

struct AdvanceResult {
  Point point;
  bool out_of_bounds = false;
};

// Moves p by the flow sampled at p: returns p + flow(p). If p is outside the
// image area the point is returned unchanged with out_of_bounds set; the
// caller decides occlusion handling.
AdvanceResult advance_point(Point p, const FlowField& flow);

}  // namespace mft
