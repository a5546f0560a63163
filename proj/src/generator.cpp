// Copyright The amrender Authors
// SPDX-License-Identifier: Apache-2.0

#include "amrender/generator.hpp"

#include <cmath>

#include "amrender/errors.hpp"

namespace amrender {

void GeneratorParams::validate() const {
  if (levelmin < 0 || levelmin > levelmax || levelmax > 20) throw ArgumentError("generator: invalid level range");
  if (!(box_len > 0.0) || !std::isfinite(box_len)) throw ArgumentError("generator: box_len must be positive");
  if (!(r_d > 0.0 && r_d < 1.0)) throw ArgumentError("generator: r_d must be in (0, 1)");
  if (!(z_d > 0.0 && z_d < 1.0)) throw ArgumentError("generator: z_d must be in (0, 1)");
  if (!(background > 0.0) || !std::isfinite(background)) throw ArgumentError("generator: background must be positive");
  if (!(rho0 > background) || !std::isfinite(rho0)) throw ArgumentError("generator: rho0 must exceed background");
  if (std::isnan(m_ref) || m_ref < 0.0) throw ArgumentError("generator: m_ref must be non-negative");
}

double disk_density(const GeneratorParams& p, const Vec3& x) {
  const double half = 0.5 * p.box_len;
  const double dx = x.x - half;
  const double dy = x.y - half;
  const double r = std::sqrt(dx * dx + dy * dy);
  const double z = std::abs(x.z - half);
  return p.rho0 * std::exp(-r / (p.r_d * p.box_len)) * std::exp(-z / (p.z_d * p.box_len)) + p.background;
}

namespace {

void grow(const GeneratorParams& p, AmrTreeBuilder& b, NodeId id) {
  const CellCoord c = b.node(id).coord;
  const double rho = disk_density(p, cell_center(p.box_len, c));
  b.values(id)[0] = rho;
  if (c.level >= p.levelmax) return;
  const double dx = cell_size(p.box_len, c.level);
  if (c.level >= p.levelmin && !(rho * dx * dx * dx > p.m_ref)) return;
  b.refine(id);
  for (int o = 0; o < 8; ++o) grow(p, b, b.child(id, o));
}

}  // namespace

AmrTree generate_synthetic(const GeneratorParams& params) {
  params.validate();
  AmrTreeBuilder b(params.box_len, params.levelmin, params.levelmax, {{"density", true}});
  grow(params, b, b.root());
  b.restrict_conservative();
  return std::move(b).build();
}

}  // namespace amrender
