// Copyright The amrender Authors
// SPDX-License-Identifier: Apache-2.0

#include "amrender/raycast.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "amrender/errors.hpp"

namespace amrender {

std::optional<Segment> ray_box_intersect(const Ray& ray, const Box& box) {
  double t_in = ray.t_min;
  double t_out = ray.t_max;
  for (int a = 0; a < 3; ++a) {
    const double o = ray.origin[a];
    const double d = ray.direction[a];
    if (d == 0.0) {
      if (o < box.lo[a] || o >= box.hi[a]) return std::nullopt;
      continue;
    }
    const double inv = 1.0 / d;
    double t0 = (box.lo[a] - o) * inv;
    double t1 = (box.hi[a] - o) * inv;
    if (t0 > t1) std::swap(t0, t1);
    t_in = std::max(t_in, t0);
    t_out = std::min(t_out, t1);
  }
  if (!(t_out > t_in)) return std::nullopt;
  return Segment{t_in, t_out};
}

std::uint64_t TraversalStats::total() const {
  std::uint64_t n = 0;
  for (auto v : visits_per_level) n += v;
  return n;
}

int TraversalStats::deepest_level() const {
  for (int l = static_cast<int>(visits_per_level.size()) - 1; l >= 0; --l) {
    if (visits_per_level[l] != 0) return l;
  }
  return -1;
}

TraversalStats& TraversalStats::operator+=(const TraversalStats& o) {
  for (std::size_t l = 0; l < visits_per_level.size(); ++l) visits_per_level[l] += o.visits_per_level[l];
  return *this;
}

namespace {

struct RayWalker {
  const AmrTree& tree;
  const Ray& ray;
  std::size_t field;
  int level_cap;
  RayMode mode;
  TraversalStats* stats;

  double sum = 0.0;
  double max = -std::numeric_limits<double>::infinity();
  int coarsest = std::numeric_limits<int>::max();

  void visit(NodeId id, const Segment& seg) {
    const AmrNode& n = tree.node(id);
    if (stats) ++stats->visits_per_level[static_cast<std::size_t>(n.coord.level)];
    if (n.is_leaf() || n.coord.level >= level_cap) {
      if (!n.present) return;
      const double v = tree.value(id, field);
      if (mode == RayMode::kSum) {
        sum += v * seg.length();
      } else {
        max = std::max(max, v);
      }
      coarsest = std::min(coarsest, n.coord.level);
      return;
    }
    for (int o = 0; o < 8; ++o) {
      const NodeId c = tree.child(id, o);
      if (auto s = ray_box_intersect(ray, tree.box(c))) visit(c, *s);
    }
  }
};

}  // namespace

RayResult cast_ray(const AmrTree& tree, const Ray& ray, std::size_t field, int level_cap, RayMode mode,
                   TraversalStats* stats) {
  if (level_cap < tree.levelmin()) throw ArgumentError("cast_ray: level_cap below levelmin");
  if (field >= tree.field_count()) throw ArgumentError("cast_ray: field index out of range");
  const auto root_seg = ray_box_intersect(ray, tree.box(tree.root()));
  if (!root_seg) return {};
  RayWalker w{tree, ray, field, level_cap, mode, stats};
  w.visit(tree.root(), *root_seg);
  if (w.coarsest == std::numeric_limits<int>::max()) return {};
  return {mode == RayMode::kSum ? w.sum : w.max, w.coarsest};
}

RenderResult render_ray_rect(const AmrTree& tree, const Camera& cam, std::size_t field, int level_cap,
                             RayMode mode, const PixelRect& rect, TraversalStats* stats) {
  if (rect.x0 < 0 || rect.y0 < 0 || rect.x1 > cam.nx || rect.y1 > cam.ny || rect.width() < 0 ||
      rect.height() < 0) {
    throw ArgumentError("render_ray_rect: rectangle outside the image");
  }
  RenderResult out{ScalarMap(rect.width(), rect.height()), LevelMap(rect.width(), rect.height(), kMissLevel)};
  for (int py = rect.y0; py < rect.y1; ++py) {
    for (int px = rect.x0; px < rect.x1; ++px) {
      const RayResult r = cast_ray(tree, pixel_ray(cam, px, py), field, level_cap, mode, stats);
      out.map(px - rect.x0, py - rect.y0) = r.value;
      out.levels(px - rect.x0, py - rect.y0) = r.coarsest_level;
    }
  }
  return out;
}

RenderResult render_ray(const AmrTree& tree, const Camera& cam, std::string_view field, RayMode mode,
                        TraversalStats* stats) {
  cam.validate();
  const std::size_t f = tree.field_index(field);
  const int cap = level_cap(cam, tree.box_len(), tree.levelmin(), tree.levelmax());
  return render_ray_rect(tree, cam, f, cap, mode, {0, 0, cam.nx, cam.ny}, stats);
}

}  // namespace amrender
