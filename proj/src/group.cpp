#include "gequi/group.hpp"

#include <string>

#include "gequi/errors.hpp"

namespace gequi {

namespace {

int mod4(int v) { return ((v % 4) + 4) % 4; }

void check_index(int n, Index2 p) {
  if (n < 1 || p.x < 0 || p.y < 0 || p.x >= n || p.y >= n) {
    throw IndexError("index (" + std::to_string(p.x) + ", " + std::to_string(p.y) + ") outside a " +
                     std::to_string(n) + "x" + std::to_string(n) + " grid");
  }
}

void check_patch(int n, const IndexPatch& patch) {
  const auto& [a, b] = patch;
  const bool inside = a.x >= 0 && a.y >= 0 && b.x < n && b.y < n;
  if (!inside || a.x > b.x || a.y > b.y) {
    throw PatchError("invalid patch [(" + std::to_string(a.x) + ", " + std::to_string(a.y) + "), (" +
                     std::to_string(b.x) + ", " + std::to_string(b.y) + ")] on a grid of side " +
                     std::to_string(n));
  }
}

}  // namespace

int group_size(GroupKind kind) {
  switch (kind) {
    case GroupKind::Z2:
      return 1;
    case GroupKind::P4:
      return 4;
    case GroupKind::P4M:
      return 8;
  }
  return 1;
}

std::string_view to_string(GroupKind kind) {
  switch (kind) {
    case GroupKind::Z2:
      return "z2";
    case GroupKind::P4:
      return "p4";
    case GroupKind::P4M:
      return "p4m";
  }
  return "z2";
}

GroupKind parse_group_kind(std::string_view name) {
  if (name == "z2") return GroupKind::Z2;
  if (name == "p4") return GroupKind::P4;
  if (name == "p4m") return GroupKind::P4M;
  throw ConfigError("unknown group '" + std::string(name) + "' (expected z2, p4 or p4m)");
}

GroupElement compose(GroupElement a, GroupElement b) {
  // m r = r^-1 m
  const int rot = a.mirrored ? a.rotations - b.rotations : a.rotations + b.rotations;
  return {mod4(rot), a.mirrored != b.mirrored};
}

GroupElement inverse(GroupElement a) {
  if (a.mirrored) return a;
  return {mod4(-a.rotations), false};
}

bool belongs_to(GroupElement g, GroupKind kind) {
  switch (kind) {
    case GroupKind::Z2:
      return g == GroupElement::identity();
    case GroupKind::P4:
      return !g.mirrored;
    case GroupKind::P4M:
      return true;
  }
  return false;
}

// Slot 4 + c holds m r^c, which in normal form is r^(-c) m.
int slot_of(GroupElement g) {
  if (!g.mirrored) return mod4(g.rotations);
  return 4 + mod4(-g.rotations);
}

GroupElement element_at_slot(int slot) {
  if (slot < 0 || slot >= 8) throw IndexError("group slot " + std::to_string(slot) + " out of range");
  if (slot < 4) return {slot, false};
  return {mod4(-(slot - 4)), true};
}

std::vector<GroupElement> elements(GroupKind kind) {
  std::vector<GroupElement> out;
  for (int slot = 0; slot < group_size(kind); ++slot) out.push_back(element_at_slot(slot));
  return out;
}

std::string to_string(GroupElement g) {
  const int slot = slot_of(g);
  const int power = slot % 4;
  std::string name = slot >= 4 ? "m" : "";
  if (power == 1) name += "r";
  if (power > 1) name += "r" + std::to_string(power);
  return name.empty() ? "e" : name;
}

GroupElement parse_element(std::string_view name) {
  for (int slot = 0; slot < 8; ++slot) {
    const GroupElement g = element_at_slot(slot);
    if (to_string(g) == name) return g;
  }
  if (name == "r1") return {1, false};
  if (name == "mr1") return element_at_slot(5);
  if (name == "r0" || name == "id") return {};
  throw ConfigError("unknown group element '" + std::string(name) + "'");
}

Index2 rotate_index(int n, Index2 p) {
  check_index(n, p);
  return {p.y, n - 1 - p.x};
}

Index2 rotate_index_clockwise(int n, Index2 p) {
  check_index(n, p);
  return {n - 1 - p.y, p.x};
}

Index2 mirror_index(int n, Index2 p) {
  check_index(n, p);
  return {n - 1 - p.x, p.y};
}

Index2 apply_index(GroupElement g, int n, Index2 p) {
  if (g.mirrored) p = mirror_index(n, p);
  for (int i = 0; i < mod4(g.rotations); ++i) p = rotate_index(n, p);
  check_index(n, p);
  return p;
}

IndexPatch rotate_patch(int n, const IndexPatch& patch) {
  check_patch(n, patch);
  const auto& [a, b] = patch;
  return {{a.y, n - 1 - b.x}, {b.y, n - 1 - a.x}};
}

IndexPatch mirror_patch(int n, const IndexPatch& patch) {
  check_patch(n, patch);
  const auto& [a, b] = patch;
  return {{n - 1 - b.x, a.y}, {n - 1 - a.x, b.y}};
}

FeatureMap act_spatial(GroupElement g, const FeatureMap& fm) {
  if (!fm.is_square()) throw ShapeError("act_spatial requires a square feature map");
  const int n = fm.height();
  // Precompute destination offsets once per pixel.
  std::vector<Index2> dest(static_cast<std::size_t>(n) * n);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) dest[static_cast<std::size_t>(y) * n + x] = apply_index(g, n, {x, y});

  FeatureMap out(fm.channels(), fm.group_size(), n, n);
  for (int c = 0; c < fm.channels(); ++c)
    for (int h = 0; h < fm.group_size(); ++h)
      for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
          const Index2 d = dest[static_cast<std::size_t>(y) * n + x];
          out.at(c, h, d.y, d.x) = fm.at(c, h, y, x);
        }
  return out;
}

std::vector<int> group_permutation(GroupElement g, GroupKind kind) {
  if (kind == GroupKind::Z2) throw UnsupportedKindError("the trivial group has no group axis to permute");
  if (!belongs_to(g, kind)) {
    throw UnsupportedKindError("element " + to_string(g) + " is not in " + std::string(to_string(kind)));
  }
  std::vector<int> perm;
  for (const GroupElement h : elements(kind)) perm.push_back(slot_of(compose(g, h)));
  return perm;
}

FeatureMap act_full(GroupElement g, const FeatureMap& fm, GroupKind kind) {
  if (fm.group_size() != group_size(kind)) {
    throw ShapeError("act_full: feature map has group size " + std::to_string(fm.group_size()) + ", " +
                     std::string(to_string(kind)) + " needs " + std::to_string(group_size(kind)));
  }
  if (kind == GroupKind::Z2) return act_spatial(g, fm);
  const std::vector<int> perm = group_permutation(g, kind);
  const FeatureMap moved = act_spatial(g, fm);
  FeatureMap out(fm.channels(), fm.group_size(), fm.height(), fm.width());
  for (int c = 0; c < fm.channels(); ++c)
    for (int h = 0; h < fm.group_size(); ++h)
      for (int y = 0; y < fm.height(); ++y)
        for (int x = 0; x < fm.width(); ++x) out.at(c, perm[h], y, x) = moved.at(c, h, y, x);
  return out;
}

FilterBank act_spatial(GroupElement g, const FilterBank& bank) {
  const int k = bank.k();
  FilterBank out(bank.out_channels(), bank.in_channels(), bank.in_group_size(), k);
  for (int y = 0; y < k; ++y)
    for (int x = 0; x < k; ++x) {
      const Index2 d = apply_index(g, k, {x, y});
      for (int o = 0; o < bank.out_channels(); ++o)
        for (int c = 0; c < bank.in_channels(); ++c)
          for (int h = 0; h < bank.in_group_size(); ++h) out.at(o, c, h, d.y, d.x) = bank.at(o, c, h, y, x);
    }
  return out;
}

}  // namespace gequi
