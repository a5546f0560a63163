// Copyright The amrender Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

#include "amrender/amr_tree.hpp"
#include "amrender/camera.hpp"
#include "amrender/geometry.hpp"
#include "amrender/image.hpp"

namespace amrender {

enum class RayMode {
  /// Sum of value * segment length over the cells crossed.
  kSum,
  /// Maximum value over cells crossed with positive length.
  kMip,
};

/// Slab-method intersection, clipped to the ray's [t_min, t_max].
///
/// Axes with a zero direction component use the half-open rule: the ray is
/// inside the slab iff lo <= origin < hi. Empty and zero-length intervals
/// are misses.
std::optional<Segment> ray_box_intersect(const Ray& ray, const Box& box);

/// Per-level node visit counters filled by the traversal.
struct TraversalStats {
  std::array<std::uint64_t, 32> visits_per_level{};

  std::uint64_t total() const;
  /// -1 when nothing was visited.
  int deepest_level() const;
  TraversalStats& operator+=(const TraversalStats& o);
};

struct RayResult {
  double value = 0.0;
  /// kMissLevel when the ray does not cross the box.
  int coarsest_level = kMissLevel;
};

/// Top-down descent: a node that is a leaf or sits at level_cap contributes;
/// otherwise the children crossed by the ray are visited in octant order.
/// Placeholder nodes of partial trees contribute nothing.
RayResult cast_ray(const AmrTree& tree, const Ray& ray, std::size_t field, int level_cap, RayMode mode,
                   TraversalStats* stats = nullptr);

struct RenderResult {
  ScalarMap map;
  LevelMap levels;
};

/// Pixel rectangle [x0, x1) x [y0, y1).
struct PixelRect {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  bool operator==(const PixelRect&) const = default;
};

/// Casts the rays of `rect` into a result of the rectangle's size.
RenderResult render_ray_rect(const AmrTree& tree, const Camera& cam, std::size_t field, int level_cap,
                             RayMode mode, const PixelRect& rect, TraversalStats* stats = nullptr);

/// One ray per pixel with level_cap taken from the camera.
RenderResult render_ray(const AmrTree& tree, const Camera& cam, std::string_view field, RayMode mode,
                        TraversalStats* stats = nullptr);

}  // namespace amrender
