// Copyright The amrender Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "amrender/geometry.hpp"

namespace amrender {

/// Integer cell address: at `level` the box is split into 2^level cells per axis.
struct CellCoord {
  int level = 0;
  std::uint32_t ix = 0;
  std::uint32_t iy = 0;
  std::uint32_t iz = 0;

  bool operator==(const CellCoord&) const = default;
};

/// Child index ordering used everywhere: z-major, index = 4*kz + 2*ky + kx.
constexpr int octant_index(int kx, int ky, int kz) { return 4 * kz + 2 * ky + kx; }

CellCoord child_octant(const CellCoord& parent, int kx, int ky, int kz);
CellCoord child_octant(const CellCoord& parent, int octant);

double cell_size(double box_len, int level);
Vec3 cell_center(double box_len, const CellCoord& c);
Box cell_box(double box_len, const CellCoord& c);

struct FieldDescriptor {
  std::string name;
  /// Interior values are the mean of their eight children.
  bool conservative = false;

  bool operator==(const FieldDescriptor&) const = default;
};

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = 0xffffffffu;

struct AmrNode {
  CellCoord coord;
  /// The eight children are stored contiguously starting here; kNoNode for leaves.
  NodeId first_child = kNoNode;
  std::uint32_t domain = 0;
  /// False only for structural placeholders in single-domain partial trees:
  /// such nodes carry no data and exist so the owned cells can be reached.
  bool present = true;

  bool is_leaf() const { return first_child == kNoNode; }
};

/// Pointer-free octree over the cube [0, box_len]^3 with values on every node.
///
/// Immutable once built (see AmrTreeBuilder) and safe to share between threads.
class AmrTree {
 public:
  double box_len() const { return box_len_; }
  int levelmin() const { return levelmin_; }
  int levelmax() const { return levelmax_; }
  std::uint32_t ndomains() const { return ndomains_; }

  const std::vector<FieldDescriptor>& fields() const { return fields_; }
  std::size_t field_count() const { return fields_.size(); }
  /// Throws UnknownFieldError.
  std::size_t field_index(std::string_view name) const;
  bool has_field(std::string_view name) const;

  NodeId root() const { return 0; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t leaf_count() const;
  /// False when the tree was read from a subset of domains.
  bool is_complete() const { return complete_; }

  const AmrNode& node(NodeId id) const { return nodes_[id]; }
  NodeId child(NodeId id, int octant) const { return nodes_[id].first_child + static_cast<NodeId>(octant); }
  std::span<const double> values(NodeId id) const {
    return {values_.data() + static_cast<std::size_t>(id) * fields_.size(), fields_.size()};
  }
  double value(NodeId id, std::size_t field) const {
    return values_[static_cast<std::size_t>(id) * fields_.size() + field];
  }

  double cell_size(NodeId id) const { return amrender::cell_size(box_len_, nodes_[id].coord.level); }
  Box box(NodeId id) const { return cell_box(box_len_, nodes_[id].coord); }
  Box bounds() const { return {{0, 0, 0}, {box_len_, box_len_, box_len_}}; }

  /// Node ids in depth-first order, children visited by ascending octant.
  std::vector<NodeId> dfs_order() const;

  /// Copy with every node deeper than `max_level` dropped; nodes at
  /// `max_level` become leaves.
  AmrTree truncated(int max_level) const;

  /// Copy with one extra field. `leaf_value` is evaluated on leaves; interior
  /// nodes get the child mean when `desc.conservative`, else `leaf_value` too.
  AmrTree with_field(const FieldDescriptor& desc,
                     const std::function<double(const AmrTree&, NodeId)>& leaf_value) const;

 private:
  friend class AmrTreeBuilder;

  double box_len_ = 1.0;
  int levelmin_ = 0;
  int levelmax_ = 0;
  std::uint32_t ndomains_ = 1;
  bool complete_ = true;
  std::vector<FieldDescriptor> fields_;
  std::vector<AmrNode> nodes_;
  std::vector<double> values_;
};

/// Mutable construction front-end for AmrTree. Starts with a single root leaf.
class AmrTreeBuilder {
 public:
  AmrTreeBuilder(double box_len, int levelmin, int levelmax, std::vector<FieldDescriptor> fields,
                 std::uint32_t ndomains = 1);

  NodeId root() const { return 0; }
  const AmrNode& node(NodeId id) const { return tree_.nodes_[id]; }
  std::size_t node_count() const { return tree_.nodes_.size(); }
  NodeId child(NodeId id, int octant) const { return tree_.child(id, octant); }

  /// Splits a leaf into eight children which inherit the parent's values and domain.
  void refine(NodeId id);
  std::span<double> values(NodeId id) {
    return {tree_.values_.data() + static_cast<std::size_t>(id) * tree_.fields_.size(),
            tree_.fields_.size()};
  }
  void set_values(NodeId id, std::span<const double> v);
  void set_domain(NodeId id, std::uint32_t domain) { tree_.nodes_[id].domain = domain; }
  void set_present(NodeId id, bool present) { tree_.nodes_[id].present = present; }
  void set_levelmax(int levelmax) { tree_.levelmax_ = levelmax; }

  /// Overwrites interior values of conservative fields with child means, bottom-up.
  void restrict_conservative();

  /// Validates level bounds and child completeness, then hands the tree over.
  /// Throws StructuralError on violations.
  AmrTree build() &&;

 private:
  AmrTree tree_;
};

/// Descends from the root to the node containing `p` that is a leaf or sits at
/// `level_cap`. Cells are half-open; the far faces at box_len belong to the
/// last cell. Throws DomainError outside [0, box_len]^3.
NodeId point_query(const AmrTree& tree, const Vec3& p, int level_cap);

/// Calls `fn(NodeId)` for every leaf with level <= level_cap and every interior
/// node at exactly level_cap, depth-first in octant order. Placeholders of a
/// partial tree are skipped.
template <class Fn>
void for_each_cell_at_cap(const AmrTree& tree, int level_cap, Fn&& fn) {
  std::vector<NodeId> stack{tree.root()};
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    const AmrNode& n = tree.node(id);
    if (n.is_leaf() || n.coord.level >= level_cap) {
      if (n.present) fn(id);
      continue;
    }
    for (int o = 7; o >= 0; --o) stack.push_back(tree.child(id, o));
  }
}

std::vector<NodeId> cells_at_cap(const AmrTree& tree, int level_cap);

}  // namespace amrender
