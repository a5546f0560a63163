// Copyright The amrender Authors
// SPDX-License-Identifier: Apache-2.0

#include "amrender/amr_tree.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "amrender/errors.hpp"

namespace amrender {

CellCoord child_octant(const CellCoord& parent, int kx, int ky, int kz) {
  return {parent.level + 1, 2 * parent.ix + static_cast<std::uint32_t>(kx),
          2 * parent.iy + static_cast<std::uint32_t>(ky), 2 * parent.iz + static_cast<std::uint32_t>(kz)};
}

CellCoord child_octant(const CellCoord& parent, int octant) {
  return child_octant(parent, octant & 1, (octant >> 1) & 1, (octant >> 2) & 1);
}

double cell_size(double box_len, int level) { return std::ldexp(box_len, -level); }

Vec3 cell_center(double box_len, const CellCoord& c) {
  const double dx = cell_size(box_len, c.level);
  return {(c.ix + 0.5) * dx, (c.iy + 0.5) * dx, (c.iz + 0.5) * dx};
}

Box cell_box(double box_len, const CellCoord& c) {
  const double dx = cell_size(box_len, c.level);
  return {{c.ix * dx, c.iy * dx, c.iz * dx}, {(c.ix + 1) * dx, (c.iy + 1) * dx, (c.iz + 1) * dx}};
}

std::size_t AmrTree::field_index(std::string_view name) const {
  for (std::size_t i = 0; i < fields_.size(); ++i) {
    if (fields_[i].name == name) return i;
  }
  throw UnknownFieldError(std::string(name));
}

bool AmrTree::has_field(std::string_view name) const {
  return std::any_of(fields_.begin(), fields_.end(), [&](const auto& f) { return f.name == name; });
}

std::size_t AmrTree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(),
                                                [](const AmrNode& n) { return n.is_leaf() && n.present; }));
}

std::vector<NodeId> AmrTree::dfs_order() const {
  std::vector<NodeId> order;
  order.reserve(nodes_.size());
  std::vector<NodeId> stack{root()};
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    order.push_back(id);
    const AmrNode& n = nodes_[id];
    if (!n.is_leaf()) {
      for (int o = 7; o >= 0; --o) stack.push_back(child(id, o));
    }
  }
  return order;
}

namespace {

void copy_subtree(const AmrTree& src, NodeId src_id, AmrTreeBuilder& dst, NodeId dst_id, int max_level) {
  dst.set_values(dst_id, src.values(src_id));
  dst.set_domain(dst_id, src.node(src_id).domain);
  dst.set_present(dst_id, src.node(src_id).present);
  const AmrNode& n = src.node(src_id);
  if (n.is_leaf() || n.coord.level >= max_level) return;
  dst.refine(dst_id);
  for (int o = 0; o < 8; ++o) {
    copy_subtree(src, src.child(src_id, o), dst, dst.child(dst_id, o), max_level);
  }
}

}  // namespace

AmrTree AmrTree::truncated(int max_level) const {
  if (max_level < levelmin_) {
    throw ArgumentError("truncation level " + std::to_string(max_level) + " below levelmin " +
                        std::to_string(levelmin_));
  }
  AmrTreeBuilder b(box_len_, levelmin_, std::min(levelmax_, max_level), fields_, ndomains_);
  copy_subtree(*this, root(), b, b.root(), max_level);
  AmrTree out = std::move(b).build();
  out.complete_ = complete_;
  return out;
}

AmrTree AmrTree::with_field(const FieldDescriptor& desc,
                            const std::function<double(const AmrTree&, NodeId)>& leaf_value) const {
  if (has_field(desc.name)) throw ArgumentError("field '" + desc.name + "' already exists");
  AmrTree out;
  out.box_len_ = box_len_;
  out.levelmin_ = levelmin_;
  out.levelmax_ = levelmax_;
  out.ndomains_ = ndomains_;
  out.complete_ = complete_;
  out.fields_ = fields_;
  out.fields_.push_back(desc);
  out.nodes_ = nodes_;
  const std::size_t nf = fields_.size();
  out.values_.resize(nodes_.size() * (nf + 1));
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    std::copy_n(values_.begin() + static_cast<std::ptrdiff_t>(id * nf), nf,
                out.values_.begin() + static_cast<std::ptrdiff_t>(id * (nf + 1)));
  }
  auto slot = [&](NodeId id) -> double& { return out.values_[id * (nf + 1) + nf]; };
  // Reverse DFS order visits children before parents.
  const std::vector<NodeId> order = dfs_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const AmrNode& n = nodes_[*it];
    if (n.is_leaf() || !desc.conservative) {
      slot(*it) = leaf_value(*this, *it);
    } else {
      double sum = 0.0;
      for (int o = 0; o < 8; ++o) sum += slot(child(*it, o));
      slot(*it) = sum / 8.0;
    }
  }
  return out;
}

AmrTreeBuilder::AmrTreeBuilder(double box_len, int levelmin, int levelmax, std::vector<FieldDescriptor> fields,
                               std::uint32_t ndomains) {
  if (!(box_len > 0.0) || !std::isfinite(box_len)) throw ArgumentError("box_len must be positive and finite");
  if (levelmin < 0 || levelmin > levelmax || levelmax > 30) {
    throw ArgumentError("invalid level range [" + std::to_string(levelmin) + ", " + std::to_string(levelmax) + "]");
  }
  if (ndomains < 1) throw ArgumentError("ndomains must be at least 1");
  for (std::size_t i = 0; i < fields.size(); ++i) {
    for (std::size_t j = i + 1; j < fields.size(); ++j) {
      if (fields[i].name == fields[j].name) throw ArgumentError("duplicate field name '" + fields[i].name + "'");
    }
  }
  tree_.box_len_ = box_len;
  tree_.levelmin_ = levelmin;
  tree_.levelmax_ = levelmax;
  tree_.ndomains_ = ndomains;
  tree_.fields_ = std::move(fields);
  tree_.nodes_.push_back(AmrNode{});
  tree_.values_.assign(tree_.fields_.size(), 0.0);
}

void AmrTreeBuilder::refine(NodeId id) {
  auto& nodes = tree_.nodes_;
  if (!nodes[id].is_leaf()) throw ArgumentError("refine: node is already refined");
  if (nodes[id].coord.level >= 30) throw ArgumentError("refine: level limit reached");
  const std::size_t nf = tree_.fields_.size();
  const auto first = static_cast<NodeId>(nodes.size());
  const AmrNode parent = nodes[id];
  nodes[id].first_child = first;
  for (int o = 0; o < 8; ++o) {
    AmrNode c;
    c.coord = child_octant(parent.coord, o);
    c.domain = parent.domain;
    c.present = parent.present;
    nodes.push_back(c);
  }
  tree_.values_.resize(nodes.size() * nf);
  for (int o = 0; o < 8; ++o) {
    std::copy_n(tree_.values_.begin() + static_cast<std::ptrdiff_t>(id * nf), nf,
                tree_.values_.begin() + static_cast<std::ptrdiff_t>((first + o) * nf));
  }
}

void AmrTreeBuilder::set_values(NodeId id, std::span<const double> v) {
  if (v.size() != tree_.fields_.size()) throw ArgumentError("set_values: wrong number of field values");
  std::copy(v.begin(), v.end(), values(id).begin());
}

void AmrTreeBuilder::restrict_conservative() {
  const std::size_t nf = tree_.fields_.size();
  const std::vector<NodeId> order = tree_.dfs_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const AmrNode& n = tree_.nodes_[*it];
    if (n.is_leaf()) continue;
    for (std::size_t f = 0; f < nf; ++f) {
      if (!tree_.fields_[f].conservative) continue;
      double sum = 0.0;
      for (int o = 0; o < 8; ++o) sum += tree_.value(tree_.child(*it, o), f);
      tree_.values_[*it * nf + f] = sum / 8.0;
    }
  }
}

AmrTree AmrTreeBuilder::build() && {
  bool complete = true;
  for (const AmrNode& n : tree_.nodes_) {
    complete = complete && n.present;
    if (!n.present) continue;
    if (n.is_leaf() && n.coord.level < tree_.levelmin_) {
      throw StructuralError("leaf at level " + std::to_string(n.coord.level) + " below levelmin " +
                            std::to_string(tree_.levelmin_));
    }
    if (n.coord.level > tree_.levelmax_) {
      throw StructuralError("node at level " + std::to_string(n.coord.level) + " above levelmax " +
                            std::to_string(tree_.levelmax_));
    }
  }
  tree_.complete_ = complete;
  return std::move(tree_);
}

NodeId point_query(const AmrTree& tree, const Vec3& p, int level_cap) {
  if (level_cap < tree.levelmin()) throw ArgumentError("level_cap below levelmin");
  const double len = tree.box_len();
  for (int a = 0; a < 3; ++a) {
    if (!(p[a] >= 0.0 && p[a] <= len)) throw DomainError("point outside the box");
  }
  NodeId id = tree.root();
  for (;;) {
    const AmrNode& n = tree.node(id);
    if (n.is_leaf() || n.coord.level >= level_cap) return id;
    const int level = n.coord.level + 1;
    const auto cells = static_cast<double>(1u << level);
    int k[3];
    for (int a = 0; a < 3; ++a) {
      const double idx = std::min(std::floor(p[a] / len * cells), cells - 1.0);
      k[a] = static_cast<int>(static_cast<std::uint32_t>(idx) & 1u);
    }
    id = tree.child(id, octant_index(k[0], k[1], k[2]));
  }
}

std::vector<NodeId> cells_at_cap(const AmrTree& tree, int level_cap) {
  if (level_cap < tree.levelmin()) throw ArgumentError("level_cap below levelmin");
  std::vector<NodeId> out;
  for_each_cell_at_cap(tree, level_cap, [&](NodeId id) { out.push_back(id); });
  return out;
}

}  // namespace amrender
