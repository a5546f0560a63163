// Copyright The amrender Authors
// SPDX-License-Identifier: Apache-2.0

#include "amrender/ucd.hpp"

#include <cstdio>
#include <fstream>
#include <memory>
#include <unordered_map>

#include "amrender/errors.hpp"

namespace amrender {

namespace {

struct CoordHash {
  std::size_t operator()(const CellCoord& c) const {
    std::uint64_t h = static_cast<std::uint64_t>(c.level) * 0x9e3779b97f4a7c15ull;
    h ^= c.ix + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    h ^= c.iy + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    h ^= c.iz + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

DualMesh build_dual_mesh(const AmrTree& tree, int level_cap) {
  if (level_cap < tree.levelmin()) throw ArgumentError("build_dual_mesh: level_cap below levelmin");
  DualMesh mesh;
  for (const auto& f : tree.fields()) mesh.field_names.push_back(f.name);
  mesh.field_values.resize(tree.field_count());

  std::vector<CellCoord> coords;
  std::unordered_map<CellCoord, std::uint32_t, CoordHash> index;
  for_each_cell_at_cap(tree, level_cap, [&](NodeId id) {
    const CellCoord& c = tree.node(id).coord;
    index.emplace(c, static_cast<std::uint32_t>(mesh.points.size()));
    coords.push_back(c);
    mesh.points.push_back(cell_center(tree.box_len(), c));
    for (std::size_t f = 0; f < tree.field_count(); ++f) mesh.field_values[f].push_back(tree.value(id, f));
  });

  for (const CellCoord& c : coords) {
    std::array<std::uint32_t, 8> hex{};
    bool complete = true;
    for (std::size_t k = 0; k < 8 && complete; ++k) {
      const CellCoord corner{c.level, c.ix + static_cast<std::uint32_t>(kHexCorners[k][0]),
                             c.iy + static_cast<std::uint32_t>(kHexCorners[k][1]),
                             c.iz + static_cast<std::uint32_t>(kHexCorners[k][2])};
      auto it = index.find(corner);
      if (it == index.end()) {
        complete = false;
      } else {
        hex[k] = it->second;
      }
    }
    if (complete) mesh.hexahedra.push_back(hex);
  }
  return mesh;
}

bool write_vtk(const DualMesh& mesh, const std::filesystem::path& path, const std::vector<std::string>& fields) {
  std::vector<std::size_t> selected;
  if (fields.empty()) {
    for (std::size_t f = 0; f < mesh.field_names.size(); ++f) selected.push_back(f);
  } else {
    for (const auto& name : fields) {
      std::size_t f = 0;
      while (f < mesh.field_names.size() && mesh.field_names[f] != name) ++f;
      if (f == mesh.field_names.size()) throw UnknownFieldError(name);
      selected.push_back(f);
    }
  }
  for (std::size_t f : selected) {
    if (mesh.field_names[f].find_first_of(" \t\r\n") != std::string::npos || mesh.field_names[f].empty()) {
      throw ArgumentError("write_vtk: field name '" + mesh.field_names[f] + "' is not a valid VTK identifier");
    }
  }

  std::unique_ptr<std::FILE, int (*)(std::FILE*)> out(std::fopen(path.c_str(), "w"), &std::fclose);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  std::FILE* fp = out.get();
  const std::size_t np = mesh.points.size();
  const std::size_t nc = mesh.hexahedra.size();
  std::fprintf(fp, "# vtk DataFile Version 3.0\n");
  std::fprintf(fp, "octree dual mesh\n");
  std::fprintf(fp, "ASCII\n");
  std::fprintf(fp, "DATASET UNSTRUCTURED_GRID\n");
  std::fprintf(fp, "POINTS %zu double\n", np);
  for (const Vec3& p : mesh.points) std::fprintf(fp, "%.17g %.17g %.17g\n", p.x, p.y, p.z);
  std::fprintf(fp, "CELLS %zu %zu\n", nc, nc * 9);
  for (const auto& h : mesh.hexahedra) {
    std::fprintf(fp, "8 %u %u %u %u %u %u %u %u\n", h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7]);
  }
  std::fprintf(fp, "CELL_TYPES %zu\n", nc);
  for (std::size_t i = 0; i < nc; ++i) std::fprintf(fp, "12\n");
  std::fprintf(fp, "POINT_DATA %zu\n", np);
  for (std::size_t f : selected) {
    std::fprintf(fp, "SCALARS %s double 1\n", mesh.field_names[f].c_str());
    std::fprintf(fp, "LOOKUP_TABLE default\n");
    for (double v : mesh.field_values[f]) std::fprintf(fp, "%.17g\n", v);
  }
  if (std::fflush(fp) != 0 || std::ferror(fp)) throw IoError("write failed: " + path.string());
  return nc > 0;
}

}  // namespace amrender
