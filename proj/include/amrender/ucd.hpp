// Copyright The amrender Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "amrender/amr_tree.hpp"

namespace amrender {

/// Dual of the capped octree: cell centers become points, and every 2x2x2
/// block of same-level cells becomes a hexahedron. Blocks that straddle a
/// level jump produce nothing, leaving gaps at refinement boundaries.
struct DualMesh {
  std::vector<Vec3> points;
  std::vector<std::string> field_names;
  /// field_values[f][point]
  std::vector<std::vector<double>> field_values;
  /// VTK hexahedron corner order: bottom quad counter-clockwise, then top quad.
  std::vector<std::array<std::uint32_t, 8>> hexahedra;
};

/// Corner offsets (dx, dy, dz) in VTK hexahedron order.
inline constexpr std::array<std::array<int, 3>, 8> kHexCorners{{
    {0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1},
}};

/// Throws ArgumentError when level_cap < levelmin.
DualMesh build_dual_mesh(const AmrTree& tree, int level_cap);

/// Legacy ASCII VTK unstructured grid with one SCALARS block per selected
/// field (all fields when `fields` is empty). Returns false (and writes a
/// valid file) when the mesh has no cells. Throws IoError or UnknownFieldError.
bool write_vtk(const DualMesh& mesh, const std::filesystem::path& path, const std::vector<std::string>& fields = {});

}  // namespace amrender
