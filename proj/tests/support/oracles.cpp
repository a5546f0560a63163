// Copyright The amrender Authors
// SPDX-License-Identifier: Apache-2.0

#include "oracles.hpp"

#include <algorithm>
#include <cstring>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace amrender::testing {

namespace {

void random_grow(AmrTreeBuilder& b, NodeId id, int levelmin, int levelmax, double p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int level = b.node(id).coord.level;
  b.values(id)[0] = 0.5 + 9.5 * u(rng);
  b.values(id)[1] = 1.0;
  if (level >= levelmax) return;
  if (level >= levelmin && u(rng) >= p) return;
  b.refine(id);
  for (int o = 0; o < 8; ++o) random_grow(b, b.child(id, o), levelmin, levelmax, p, rng);
}

void collect(const AmrTree& t, NodeId id, int cap, std::vector<OracleCell>& out) {
  const AmrNode& n = t.node(id);
  if (n.is_leaf() || n.coord.level == cap) {
    out.push_back({n.coord, id});
    return;
  }
  for (int o = 0; o < 8; ++o) collect(t, n.first_child + static_cast<NodeId>(o), cap, out);
}

double gauss(int dx, int dy, double sigma) { return std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma)); }

int radius_for(double sigma) { return std::max(1, static_cast<int>(std::ceil(4.0 * sigma))); }

}  // namespace

AmrTree random_tree(std::uint64_t seed, int levelmin, int levelmax, double p_refine) {
  std::mt19937_64 rng(seed);
  AmrTreeBuilder b(1.0, levelmin, levelmax, {{"density", true}, {"ones", true}});
  random_grow(b, b.root(), levelmin, levelmax, p_refine, rng);
  b.restrict_conservative();
  return std::move(b).build();
}

AmrTree full_tree(int depth, double box_len, double value) {
  AmrTreeBuilder b(box_len, depth, depth, {{"density", true}});
  std::vector<NodeId> frontier{b.root()};
  b.values(b.root())[0] = value;
  for (int l = 0; l < depth; ++l) {
    std::vector<NodeId> next;
    for (NodeId id : frontier) {
      b.refine(id);
      for (int o = 0; o < 8; ++o) next.push_back(b.child(id, o));
    }
    frontier = std::move(next);
  }
  return std::move(b).build();
}

std::string compare_trees(const AmrTree& a, const AmrTree& b) {
  if (a.box_len() != b.box_len()) return "box_len differs";
  if (a.levelmin() != b.levelmin() || a.levelmax() != b.levelmax()) return "level range differs";
  if (a.fields() != b.fields()) return "field descriptors differ";
  if (a.node_count() != b.node_count()) {
    return "node count " + std::to_string(a.node_count()) + " vs " + std::to_string(b.node_count());
  }
  // Explicit recursion in octant order, independent of dfs_order().
  std::vector<std::pair<NodeId, NodeId>> stack{{a.root(), b.root()}};
  while (!stack.empty()) {
    auto [ia, ib] = stack.back();
    stack.pop_back();
    const AmrNode& na = a.node(ia);
    const AmrNode& nb = b.node(ib);
    if (!(na.coord == nb.coord)) return "coordinates differ";
    if (na.is_leaf() != nb.is_leaf()) return "leaf flag differs";
    if (na.present != nb.present) return "presence differs";
    for (std::size_t f = 0; f < a.field_count(); ++f) {
      const double va = a.value(ia, f);
      const double vb = b.value(ib, f);
      if (std::memcmp(&va, &vb, sizeof(double)) != 0) return "value differs";
    }
    if (!na.is_leaf()) {
      for (int o = 0; o < 8; ++o) stack.push_back({na.first_child + static_cast<NodeId>(o), nb.first_child + static_cast<NodeId>(o)});
    }
  }
  return {};
}

std::vector<OracleCell> recursive_cells_at_cap(const AmrTree& tree, int cap) {
  std::vector<OracleCell> out;
  collect(tree, tree.root(), cap, out);
  return out;
}

NodeId brute_force_query(const AmrTree& tree, const Vec3& p, int cap) {
  const double len = tree.box_len();
  for (const OracleCell& c : recursive_cells_at_cap(tree, cap)) {
    const double dx = len / std::pow(2.0, c.coord.level);
    const std::uint32_t idx[3] = {c.coord.ix, c.coord.iy, c.coord.iz};
    bool inside = true;
    for (int a = 0; a < 3 && inside; ++a) {
      const double lo = idx[a] * dx;
      const double hi = (idx[a] + 1) * dx;
      const bool last = idx[a] + 1 == (1u << c.coord.level);
      inside = p[a] >= lo && (p[a] < hi || (last && p[a] <= len));
    }
    if (inside) return c.id;
  }
  return kNoNode;
}

RiemannOracle::RiemannOracle(const AmrTree& tree, std::size_t field, int cap)
    : tree_(tree), field_(field), cap_(cap) {
  const std::vector<OracleCell> cells = recursive_cells_at_cap(tree, cap);
  fine_level_ = 0;
  for (const auto& c : cells) fine_level_ = std::max(fine_level_, c.coord.level);
  const std::size_t n = std::size_t{1} << fine_level_;
  lattice_.assign(n * n * n, kNoNode);
  for (const auto& c : cells) {
    const std::size_t span = std::size_t{1} << (fine_level_ - c.coord.level);
    for (std::size_t z = c.coord.iz * span; z < (c.coord.iz + 1) * span; ++z) {
      for (std::size_t y = c.coord.iy * span; y < (c.coord.iy + 1) * span; ++y) {
        for (std::size_t x = c.coord.ix * span; x < (c.coord.ix + 1) * span; ++x) {
          lattice_[(z * n + y) * n + x] = c.id;
        }
      }
    }
  }
}

std::optional<std::pair<double, double>> clip_to_cube(const Ray& ray, double len) {
  double lo = ray.t_min;
  double hi = ray.t_max;
  for (int a = 0; a < 3; ++a) {
    const double o = ray.origin[a];
    const double d = ray.direction[a];
    if (d == 0.0) {
      if (o < 0.0 || o >= len) return std::nullopt;
      continue;
    }
    double t0 = (0.0 - o) / d;
    double t1 = (len - o) / d;
    if (t0 > t1) std::swap(t0, t1);
    lo = std::max(lo, t0);
    hi = std::min(hi, t1);
  }
  if (!(hi > lo)) return std::nullopt;
  return std::make_pair(lo, hi);
}

RiemannResult RiemannOracle::integrate(const Ray& full, int steps) const {
  RiemannResult r;
  const double len = tree_.box_len();
  const auto span = clip_to_cube(full, len);
  if (!span) return r;
  r.max = -std::numeric_limits<double>::infinity();
  Ray ray = full;
  ray.t_min = span->first;
  ray.t_max = span->second;
  const std::size_t n = std::size_t{1} << fine_level_;
  const double dt = (ray.t_max - ray.t_min) / steps * norm(ray.direction);
  int min_level = std::numeric_limits<int>::max();
  for (int i = 0; i < steps; ++i) {
    const Vec3 p = ray.at(ray.t_min + (i + 0.5) * (ray.t_max - ray.t_min) / steps);
    std::size_t idx[3];
    bool inside = true;
    for (int a = 0; a < 3; ++a) {
      if (p[a] < 0.0 || p[a] > len) {
        inside = false;
        break;
      }
      idx[a] = std::min(n - 1, static_cast<std::size_t>(p[a] / len * static_cast<double>(n)));
    }
    if (!inside) continue;
    const NodeId id = lattice_[(idx[2] * n + idx[1]) * n + idx[0]];
    const double v = tree_.value(id, field_);
    r.sum += v * dt;
    r.max = std::max(r.max, v);
    min_level = std::min(min_level, tree_.node(id).coord.level);
    r.hit = true;
  }
  if (r.hit) {
    r.min_level = min_level;
  } else {
    r.max = 0.0;
  }
  (void)cap_;
  return r;
}

double sampled_length(const Ray& ray, const Box& box, int samples) {
  const double dt = (ray.t_max - ray.t_min) / samples;
  int inside = 0;
  for (int i = 0; i < samples; ++i) {
    const Vec3 p = ray.at(ray.t_min + (i + 0.5) * dt);
    bool in = true;
    for (int a = 0; a < 3; ++a) in = in && p[a] >= box.lo[a] && p[a] <= box.hi[a];
    inside += in ? 1 : 0;
  }
  return inside * dt;
}

ScalarMap naive_histogram(const std::vector<SplatPoint>& points, const Camera& cam) {
  ScalarMap map(cam.nx, cam.ny);
  const double fp = cam.extent / cam.nx;
  const double x0 = -0.5 * cam.extent;
  const double y0 = -0.5 * cam.extent * cam.ny / cam.nx;
  for (int py = 0; py < cam.ny; ++py) {
    for (int px = 0; px < cam.nx; ++px) {
      double acc = 0.0;
      for (const SplatPoint& p : points) {
        if (std::floor((p.u - x0) / fp) == px && std::floor((p.v - y0) / fp) == py) acc += p.weight;
      }
      map(px, py) = acc;
    }
  }
  return map;
}

ScalarMap direct_convolution(const ScalarMap& map, double sigma) {
  const int r = radius_for(sigma);
  double total = 0.0;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) total += gauss(dx, dy, sigma);
  }
  ScalarMap out(map.nx(), map.ny());
  for (int y = 0; y < map.ny(); ++y) {
    for (int x = 0; x < map.nx(); ++x) {
      double acc = 0.0;
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          const int sx = x - dx;
          const int sy = y - dy;
          if (sx < 0 || sy < 0 || sx >= map.nx() || sy >= map.ny()) continue;
          acc += gauss(dx, dy, sigma) / total * map(sx, sy);
        }
      }
      out(x, y) = acc;
    }
  }
  return out;
}

ScalarMap direct_variable_blur(const ScalarMap& map, const std::vector<double>& sigma_per_pixel) {
  ScalarMap out(map.nx(), map.ny());
  for (int y = 0; y < map.ny(); ++y) {
    for (int x = 0; x < map.nx(); ++x) {
      const double sigma = sigma_per_pixel[static_cast<std::size_t>(y) * map.nx() + x];
      if (!(sigma > 0.0)) {
        out(x, y) = map(x, y);
        continue;
      }
      const int r = radius_for(sigma);
      double total = 0.0;
      double acc = 0.0;
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          const double w = gauss(dx, dy, sigma);
          total += w;
          acc += w * map(std::clamp(x - dx, 0, map.nx() - 1), std::clamp(y - dy, 0, map.ny() - 1));
        }
      }
      out(x, y) = acc / total;
    }
  }
  return out;
}

DualMesh parse_vtk(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("parse_vtk: cannot open " + path.string());
  auto expect_line = [&](const std::string& want) {
    std::string line;
    std::getline(in, line);
    if (line != want) throw std::runtime_error("parse_vtk: expected '" + want + "', got '" + line + "'");
  };
  expect_line("# vtk DataFile Version 3.0");
  std::string title;
  std::getline(in, title);
  expect_line("ASCII");
  expect_line("DATASET UNSTRUCTURED_GRID");

  DualMesh mesh;
  std::string kw, type;
  std::size_t np = 0;
  in >> kw >> np >> type;
  if (kw != "POINTS" || type != "double") throw std::runtime_error("parse_vtk: bad POINTS line");
  mesh.points.resize(np);
  for (auto& p : mesh.points) in >> p.x >> p.y >> p.z;

  std::size_t nc = 0, total = 0;
  in >> kw >> nc >> total;
  if (kw != "CELLS" || total != 9 * nc) throw std::runtime_error("parse_vtk: bad CELLS line");
  mesh.hexahedra.resize(nc);
  for (auto& h : mesh.hexahedra) {
    int count = 0;
    in >> count;
    if (count != 8) throw std::runtime_error("parse_vtk: non-hexahedral cell");
    for (auto& i : h) in >> i;
  }
  std::size_t nt = 0;
  in >> kw >> nt;
  if (kw != "CELL_TYPES" || nt != nc) throw std::runtime_error("parse_vtk: bad CELL_TYPES line");
  for (std::size_t i = 0; i < nt; ++i) {
    int t = 0;
    in >> t;
    if (t != 12) throw std::runtime_error("parse_vtk: cell type is not 12");
  }
  std::size_t npd = 0;
  in >> kw >> npd;
  if (kw != "POINT_DATA" || npd != np) throw std::runtime_error("parse_vtk: bad POINT_DATA line");
  std::string name;
  int ncomp = 0;
  while (in >> kw) {
    if (kw != "SCALARS") throw std::runtime_error("parse_vtk: unexpected keyword " + kw);
    in >> name >> type >> ncomp;
    std::string lt, def;
    in >> lt >> def;
    if (type != "double" || ncomp != 1 || lt != "LOOKUP_TABLE") throw std::runtime_error("parse_vtk: bad SCALARS");
    mesh.field_names.push_back(name);
    std::vector<double> values(np);
    for (auto& v : values) in >> v;
    mesh.field_values.push_back(std::move(values));
  }
  return mesh;
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("amrender_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace amrender::testing
