// Copyright The amrender Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "amrender/geometry.hpp"

namespace amrender {

/// Orthographic view of a slab of the volume.
///
/// The image plane spans `extent` horizontally and extent * ny / nx vertically,
/// centered on `center`; the slab extends depth / 2 in front of and behind the
/// plane along `view`. Pixels are square with side extent / nx. Pixel row 0 is
/// at the bottom (most negative v).
struct Camera {
  Vec3 center{0.5, 0.5, 0.5};
  Vec3 view{0.0, 0.0, 1.0};
  Vec3 up{0.0, 1.0, 0.0};
  double extent = 1.0;
  double depth = 1.0;
  int nx = 256;
  int ny = 256;

  /// Throws ArgumentError.
  void validate() const;

  /// normalize(up x view)
  Vec3 right() const;
  /// view x right; `up` with its view component removed.
  Vec3 true_up() const;
  double pixel_footprint() const { return extent / nx; }
  double vertical_extent() const { return extent * ny / nx; }

  bool operator==(const Camera&) const = default;
};

/// Camera looking at the whole box along +z.
Camera full_box_camera(double box_len, int nx, int ny);

/// Image-plane coordinates: u along right, v along true up, w along view, all
/// relative to the camera center.
struct ProjectedPoint {
  double u = 0.0;
  double v = 0.0;
  double w = 0.0;
};

struct PixelIndex {
  long px = 0;
  long py = 0;

  bool inside(const Camera& cam) const { return px >= 0 && py >= 0 && px < cam.nx && py < cam.ny; }
};

/// Smallest level whose cells are no wider than a pixel, clamped to
/// [levelmin, levelmax].
int level_cap(const Camera& cam, double box_len, int levelmin, int levelmax);

ProjectedPoint project(const Camera& cam, const Vec3& p);
Vec3 unproject(const Camera& cam, const ProjectedPoint& q);
/// May be out of range for points outside the frame.
PixelIndex pixel_of(const Camera& cam, double u, double v);
/// (u, v) of the center of pixel (px, py).
ProjectedPoint pixel_center(const Camera& cam, long px, long py);

/// Ray through the pixel center, starting on the front clipping plane,
/// direction = view, valid for t in [0, depth]. Throws DomainError for
/// out-of-range pixels.
Ray pixel_ray(const Camera& cam, long px, long py);

}  // namespace amrender
