// Copyright The amrender Authors
// SPDX-License-Identifier: Apache-2.0

#include "amrender/camera.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "amrender/errors.hpp"

namespace amrender {

void Camera::validate() const {
  const auto finite = [](const Vec3& v) { return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z); };
  if (!finite(center) || !finite(view) || !finite(up)) throw ArgumentError("camera: non-finite vector");
  if (std::abs(norm(view) - 1.0) > 1e-9) throw ArgumentError("camera: view must be a unit vector");
  if (std::abs(norm(up) - 1.0) > 1e-9) throw ArgumentError("camera: up must be a unit vector");
  if (!(norm(cross(up, view)) > 1e-12)) throw ArgumentError("camera: up is parallel to view");
  if (!(extent > 0.0) || !std::isfinite(extent)) throw ArgumentError("camera: extent must be positive");
  if (!(depth > 0.0) || !std::isfinite(depth)) throw ArgumentError("camera: depth must be positive");
  if (nx < 1 || ny < 1) throw ArgumentError("camera: image size must be at least 1x1");
}

Vec3 Camera::right() const { return normalized(cross(up, view)); }

Vec3 Camera::true_up() const { return cross(view, right()); }

Camera full_box_camera(double box_len, int nx, int ny) {
  Camera cam;
  cam.center = {0.5 * box_len, 0.5 * box_len, 0.5 * box_len};
  cam.extent = box_len;
  cam.depth = box_len;
  cam.nx = nx;
  cam.ny = ny;
  return cam;
}

int level_cap(const Camera& cam, double box_len, int levelmin, int levelmax) {
  const double footprint = cam.pixel_footprint();
  int level = 0;
  while (level < levelmax && std::ldexp(box_len, -level) > footprint) ++level;
  return std::max(levelmin, level);
}

ProjectedPoint project(const Camera& cam, const Vec3& p) {
  const Vec3 d = p - cam.center;
  return {dot(d, cam.right()), dot(d, cam.true_up()), dot(d, cam.view)};
}

Vec3 unproject(const Camera& cam, const ProjectedPoint& q) {
  return cam.center + cam.right() * q.u + cam.true_up() * q.v + cam.view * q.w;
}

PixelIndex pixel_of(const Camera& cam, double u, double v) {
  const double fp = cam.pixel_footprint();
  return {static_cast<long>(std::floor((u + 0.5 * cam.extent) / fp)),
          static_cast<long>(std::floor((v + 0.5 * cam.vertical_extent()) / fp))};
}

ProjectedPoint pixel_center(const Camera& cam, long px, long py) {
  const double fp = cam.pixel_footprint();
  return {(static_cast<double>(px) + 0.5) * fp - 0.5 * cam.extent,
          (static_cast<double>(py) + 0.5) * fp - 0.5 * cam.vertical_extent(), 0.0};
}

Ray pixel_ray(const Camera& cam, long px, long py) {
  if (px < 0 || py < 0 || px >= cam.nx || py >= cam.ny) {
    throw DomainError("pixel (" + std::to_string(px) + ", " + std::to_string(py) + ") outside the image");
  }
  ProjectedPoint q = pixel_center(cam, px, py);
  q.w = -0.5 * cam.depth;
  return {unproject(cam, q), cam.view, 0.0, cam.depth};
}

}  // namespace amrender
