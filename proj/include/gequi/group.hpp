#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gequi/tensor.hpp"

namespace gequi {

// Coordinates are (x, y) = (column, row) everywhere in this library.
struct Index2 {
  int x = 0;
  int y = 0;
  bool operator==(const Index2&) const = default;
};

/// Square block of sampled indices, corners inclusive.
struct IndexPatch {
  Index2 top_left;
  Index2 bottom_right;
  bool operator==(const IndexPatch&) const = default;
  int cardinality() const { return (bottom_right.x - top_left.x + 1) * (bottom_right.y - top_left.y + 1); }
};

enum class GroupKind { Z2, P4, P4M };

int group_size(GroupKind kind);
std::string_view to_string(GroupKind kind);
GroupKind parse_group_kind(std::string_view name);

/// Element r^rotations * m^mirrored of the dihedral group of order 8. Acting on a
/// grid it mirrors first (if mirrored) and then rotates 90 degrees counterclockwise
/// `rotations` times.
struct GroupElement {
  int rotations = 0;
  bool mirrored = false;

  static constexpr GroupElement identity() { return {}; }
  bool operator==(const GroupElement&) const = default;
};

GroupElement compose(GroupElement a, GroupElement b);
GroupElement inverse(GroupElement a);
bool belongs_to(GroupElement g, GroupKind kind);

/// Elements in canonical slot order [e, r, r2, r3, m, mr, mr2, mr3], truncated to the group.
std::vector<GroupElement> elements(GroupKind kind);
int slot_of(GroupElement g);
GroupElement element_at_slot(int slot);

/// Names are products in left-to-right notation: "r2", "m", "mr3" (= m composed after r^3).
std::string to_string(GroupElement g);
GroupElement parse_element(std::string_view name);

/// 90 degree counterclockwise rotation of an index on an n x n grid: (x, y) -> (y, n-1-x).
Index2 rotate_index(int n, Index2 p);
/// Inverse of rotate_index, i.e. the clockwise quarter turn.
Index2 rotate_index_clockwise(int n, Index2 p);
/// Horizontal mirror: (x, y) -> (n-1-x, y).
Index2 mirror_index(int n, Index2 p);
/// Position of index p after acting with g on an n x n grid.
Index2 apply_index(GroupElement g, int n, Index2 p);

IndexPatch rotate_patch(int n, const IndexPatch& patch);
IndexPatch mirror_patch(int n, const IndexPatch& patch);

/// Spatial part of the action: the value at u moves to g.u. Group and channel axes untouched.
FeatureMap act_spatial(GroupElement g, const FeatureMap& fm);

/// perm[slot(h)] = slot(g h).
std::vector<int> group_permutation(GroupElement g, GroupKind kind);

/// Full action on a group-valued map: spatial transform plus group-axis permutation.
/// For Z2 this reduces to act_spatial.
FeatureMap act_full(GroupElement g, const FeatureMap& fm, GroupKind kind);

/// Spatially transforms every kernel of a filter bank (group axis untouched).
FilterBank act_spatial(GroupElement g, const FilterBank& bank);

}  // namespace gequi
