#include "gequi/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "gequi/errors.hpp"

namespace gequi {

IndexPatch index_patch(int x, int y, int k, int s) {
  return {{s * x, s * y}, {s * x + k - 1, s * y + k - 1}};
}

CommutationVerdict commutation(Symmetry symmetry, int i, int k, int s) {
  if (k < 1 || s < 1) throw ShapeError("commutation: need k >= 1 and s >= 1");
  if (k > i) {
    throw ShapeError("commutation: kernel " + std::to_string(k) + " larger than input " + std::to_string(i));
  }
  const int o = (i - k) / s + 1;
  for (int y = 0; y < o; ++y)
    for (int x = 0; x < o; ++x) {
      const Index2 out_index{x, y};
      const Index2 moved = symmetry == Symmetry::Rotation ? rotate_index(o, out_index) : mirror_index(o, out_index);
      const IndexPatch lhs = index_patch(moved.x, moved.y, k, s);
      const IndexPatch sampled = index_patch(x, y, k, s);
      const IndexPatch rhs = symmetry == Symmetry::Rotation ? rotate_patch(i, sampled) : mirror_patch(i, sampled);
      if (lhs != rhs) return {false, Counterexample{out_index, lhs, rhs}};
    }
  return {true, std::nullopt};
}

CommutationVerdict rotation_commutation(int i, int k, int s) { return commutation(Symmetry::Rotation, i, k, s); }

CommutationVerdict mirror_commutation(int i, int k, int s) { return commutation(Symmetry::Mirror, i, k, s); }

double equivariance_error(const FeatureMap& a, const FeatureMap& b) {
  if (!a.same_shape(b)) throw ShapeError("equivariance_error: feature maps differ in shape");
  const auto av = a.values();
  const auto bv = b.values();
  double sum = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) {
    const double d = av[i] - bv[i];
    sum += d * d;
  }
  return std::sqrt(sum) / static_cast<double>(av.size());
}

FeatureMap transform_output(GroupElement g, const FeatureMap& fm, GroupKind kind) {
  if (fm.group_size() == 1) return act_spatial(g, fm);
  return act_full(g, fm, kind);
}

std::vector<int> tracked_depths(const Network& net) {
  std::vector<int> depths;
  int side = net.input_size;
  int group = 1;
  for (std::size_t idx = 0; idx < net.layers.size(); ++idx) {
    const LayerSpec& spec = net.layers[idx].spec;
    if (spec.kind == LayerKind::Conv2d) break;
    if (spec.kind == LayerKind::Dense && (side != 1 || group != 1)) break;
    depths.push_back(static_cast<int>(idx));
    switch (spec.kind) {
      case LayerKind::GConvLift:
      case LayerKind::GConv:
        group = group_size(net.kind);
        side = (side + 2 * spec.p - spec.k) / spec.s + 1;
        break;
      case LayerKind::MaxPool:
        side = (side - spec.k) / spec.s + 1;
        break;
      case LayerKind::CosetMaxPool:
        group = 1;
        break;
      case LayerKind::GlobalAvgPool:
      case LayerKind::Dense:
        side = 1;
        break;
      default:
        break;
    }
  }
  return depths;
}

double EquivarianceProfile::max_error() const {
  double worst = 0.0;
  for (const auto& e : entries) worst = std::max(worst, e.error);
  return worst;
}

std::uint64_t input_seed(std::uint64_t seed) { return seed ^ 0x9e3779b97f4a7c15ULL; }

namespace {

void check_elements(const Network& net, const std::vector<GroupElement>& elements) {
  for (const GroupElement g : elements) {
    if (net.kind != GroupKind::Z2 && !belongs_to(g, net.kind)) {
      throw ConfigError("element " + to_string(g) + " is not in " + std::string(to_string(net.kind)));
    }
  }
}

}  // namespace

EquivarianceProfile profile_equivariance(const Network& net, const FeatureMap& input,
                                         const std::vector<GroupElement>& elements) {
  check_elements(net, elements);
  EquivarianceProfile profile;
  profile.network = net.name;
  const std::vector<int> depths = tracked_depths(net);
  if (net.layers.empty() || depths.empty()) return profile;

  const std::vector<FeatureMap> reference = forward(net, input);
  std::vector<std::vector<FeatureMap>> transformed;
  for (const GroupElement g : elements) transformed.push_back(forward(net, act_spatial(g, input)));

  for (const int d : depths)
    for (std::size_t e = 0; e < elements.size(); ++e) {
      const FeatureMap expected = transform_output(elements[e], reference[d], net.kind);
      profile.entries.push_back({d, elements[e], equivariance_error(transformed[e][d], expected)});
    }
  return profile;
}

EquivarianceProfile profile_equivariance(const ArchitectureSpec& arch, std::uint64_t seed,
                                         const std::vector<GroupElement>& elements, bool integer_mode) {
  const Network net = build_network(arch, seed, integer_mode);
  const FeatureMap x =
      random_feature_map(input_seed(seed), arch.input_channels, 1, arch.input_size, arch.input_size, integer_mode);
  EquivarianceProfile profile = profile_equivariance(net, x, elements);
  profile.seed = seed;
  profile.integer_mode = integer_mode;
  return profile;
}

double output_discrepancy(const Network& net, const FeatureMap& input, GroupElement g) {
  return max_abs_diff(forward(net, input).back(), forward(net, act_spatial(g, input)).back());
}

FeatureMap rotate_bilinear(const FeatureMap& fm, double angle_degrees) {
  if (!fm.is_square()) throw ShapeError("rotate_bilinear requires a square map");
  const int n = fm.height();
  double cos_a = 0.0;
  double sin_a = 0.0;
  const double quarter = angle_degrees / 90.0;
  if (quarter == std::floor(quarter)) {
    // Exact trigonometry on grid-aligned angles so they reduce to pure index permutations.
    constexpr int kCos[] = {1, 0, -1, 0};
    constexpr int kSin[] = {0, 1, 0, -1};
    const int q = static_cast<int>(std::fmod(std::fmod(quarter, 4.0) + 4.0, 4.0));
    cos_a = kCos[q];
    sin_a = kSin[q];
  } else {
    const double rad = angle_degrees * std::numbers::pi / 180.0;
    cos_a = std::cos(rad);
    sin_a = std::sin(rad);
  }

  const double center = (n - 1) / 2.0;
  FeatureMap out(fm.channels(), fm.group_size(), n, n);
  auto sample = [&](int c, int h, int x, int y) {
    if (x < 0 || y < 0 || x >= n || y >= n) return 0.0;
    return fm.at(c, h, y, x);
  };
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      // Inverse rotation of the target pixel center gives the source position.
      const double dx = x - center;
      const double dy = y - center;
      const double sx = cos_a * dx - sin_a * dy + center;
      const double sy = sin_a * dx + cos_a * dy + center;
      const double x0 = std::floor(sx);
      const double y0 = std::floor(sy);
      const double fx = sx - x0;
      const double fy = sy - y0;
      const int ix = static_cast<int>(x0);
      const int iy = static_cast<int>(y0);
      for (int c = 0; c < fm.channels(); ++c)
        for (int h = 0; h < fm.group_size(); ++h) {
          double v = (1.0 - fx) * (1.0 - fy) * sample(c, h, ix, iy);
          if (fx != 0.0) v += fx * (1.0 - fy) * sample(c, h, ix + 1, iy);
          if (fy != 0.0) v += (1.0 - fx) * fy * sample(c, h, ix, iy + 1);
          if (fx != 0.0 && fy != 0.0) v += fx * fy * sample(c, h, ix + 1, iy + 1);
          out.at(c, h, y, x) = v;
        }
    }
  return out;
}

void require_invariant_head(const Network& net) {
  int last_spatial = -1;
  int last_group_conv = -1;
  for (std::size_t idx = 0; idx < net.layers.size(); ++idx) {
    const LayerKind kind = net.layers[idx].spec.kind;
    if (has_spatial_kernel(kind)) last_spatial = static_cast<int>(idx);
    if (kind == LayerKind::GConv || kind == LayerKind::GConvLift) last_group_conv = static_cast<int>(idx);
  }
  bool pooled = false;
  bool coset_pooled = last_group_conv < 0;
  for (std::size_t idx = 0; idx < net.layers.size(); ++idx) {
    const LayerKind kind = net.layers[idx].spec.kind;
    if (kind == LayerKind::GlobalAvgPool && static_cast<int>(idx) > last_spatial) pooled = true;
    if (kind == LayerKind::CosetMaxPool && static_cast<int>(idx) > last_group_conv) coset_pooled = true;
  }
  if (!pooled || !coset_pooled) {
    throw ConfigError("network '" + net.name +
                      "' does not end in an invariant head (needs coset_maxpool and global_avg_pool "
                      "after the last convolution)");
  }
}

std::vector<SweepRow> invariance_sweep(const Network& net, const FeatureMap& input,
                                       const std::vector<double>& angles) {
  require_invariant_head(net);
  const FeatureMap reference = forward(net, circle_crop(input)).back();
  std::vector<SweepRow> rows;
  for (const double angle : angles) {
    const FeatureMap rotated = circle_crop(rotate_bilinear(input, angle));
    rows.push_back({angle, max_abs_diff(reference, forward(net, rotated).back())});
  }
  return rows;
}

std::vector<double> sweep_angles(double step) {
  if (!(step > 0.0) || !std::isfinite(step)) throw ConfigError("angle step must be a positive number");
  std::vector<double> angles;
  for (int i = 0;; ++i) {
    const double a = i * step;
    if (a >= 360.0) break;
    angles.push_back(a);
  }
  return angles;
}

}  // namespace gequi
