// Copyright The amrender Authors
// SPDX-License-Identifier: Apache-2.0

// Independent reference implementations used to freeze expected values.
// Nothing here calls the code path it is used to check.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <utility>
#include <random>
#include <string>
#include <vector>

#include "amrender/amr_tree.hpp"
#include "amrender/camera.hpp"
#include "amrender/image.hpp"
#include "amrender/splat.hpp"
#include "amrender/ucd.hpp"

namespace amrender::testing {

/// Tree refined at random: every cell below levelmin splits, cells between
/// levelmin and levelmax split with probability `p_refine`. Field "density" is
/// conservative with random positive leaf values; field "ones" is 1 everywhere.
AmrTree random_tree(std::uint64_t seed, int levelmin, int levelmax, double p_refine = 0.45);

/// Every cell refined down to `depth`; leaf value of "density" = `value(center)`.
AmrTree full_tree(int depth, double box_len = 1.0, double value = 1.0);

/// Deep structural equality: same header fields, DFS node sequence, leaf
/// flags and bit-identical values. Returns an empty string when equal.
std::string compare_trees(const AmrTree& a, const AmrTree& b);

/// All nodes with their children, collected by plain recursion.
struct OracleCell {
  CellCoord coord;
  NodeId id;
};
std::vector<OracleCell> recursive_cells_at_cap(const AmrTree& tree, int cap);

/// Linear scan over the capped cells testing half-open box containment; the
/// far faces at box_len are assigned to the last cell.
NodeId brute_force_query(const AmrTree& tree, const Vec3& p, int cap);

/// Parametric interval of the ray inside [0, len]^3 and [t_min, t_max], by
/// per-axis slab clipping. Empty for misses and zero-length overlaps.
std::optional<std::pair<double, double>> clip_to_cube(const Ray& ray, double len);

/// Midpoint Riemann walk over the part of the ray inside the box along the ray, looking cells up by linear scan of
/// the capped cells (through a lattice index, not tree descent).
struct RiemannResult {
  double sum = 0.0;
  double max = 0.0;
  int min_level = -1;
  bool hit = false;
};
class RiemannOracle {
 public:
  RiemannOracle(const AmrTree& tree, std::size_t field, int cap);
  RiemannResult integrate(const Ray& ray, int steps) const;

 private:
  const AmrTree& tree_;
  std::size_t field_;
  int cap_;
  // Finest-level lattice: each fine index maps to the capped cell covering it.
  int fine_level_;
  std::vector<NodeId> lattice_;
};

/// Membership-sampled length of ray ∩ box over [t_min, t_max].
double sampled_length(const Ray& ray, const Box& box, int samples);

/// Pixel-by-pixel scan: for every pixel, sum the points whose (u, v) fall in it.
ScalarMap naive_histogram(const std::vector<SplatPoint>& points, const Camera& cam);

/// Direct 2D convolution with the truncated normalized Gaussian, zero outside.
ScalarMap direct_convolution(const ScalarMap& map, double sigma);

/// For every pixel, a direct 2D Gaussian of that pixel's sigma with clamped
/// border indexing. sigma[i] <= 0 leaves the pixel unchanged.
ScalarMap direct_variable_blur(const ScalarMap& map, const std::vector<double>& sigma_per_pixel);

/// Minimal legacy-VTK unstructured grid reader.
DualMesh parse_vtk(const std::filesystem::path& path);

/// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

}  // namespace amrender::testing
