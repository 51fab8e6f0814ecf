#include <gtest/gtest.h>

#include <cmath>

#include "gequi/analyzer.hpp"
#include "gequi/config.hpp"
#include "gequi/errors.hpp"
#include "gequi/layers.hpp"
#include "gequi/metrics.hpp"

using namespace gequi;

namespace {

FeatureMap zero_pad(const FeatureMap& fm, int p) {
  FeatureMap out(fm.channels(), fm.group_size(), fm.height() + 2 * p, fm.width() + 2 * p);
  for (int c = 0; c < fm.channels(); ++c)
    for (int g = 0; g < fm.group_size(); ++g)
      for (int y = 0; y < fm.height(); ++y)
        for (int x = 0; x < fm.width(); ++x) out.at(c, g, y + p, x + p) = fm.at(c, g, y, x);
  return out;
}

// Direct group correlation: y(g, t) = sum_h sum_u f(h, s t + u - p) psi(g^-1 h, g^-1 u).
FeatureMap naive_gconv(const FeatureMap& fm, const FilterBank& w, int s, int p, GroupKind kind) {
  const int k = w.k();
  const int o = (fm.height() + 2 * p - k) / s + 1;
  const int groups = group_size(kind);
  FeatureMap out(w.out_channels(), groups, o, o);
  for (int gs = 0; gs < groups; ++gs) {
    const GroupElement g_inv = inverse(element_at_slot(gs));
    for (int oc = 0; oc < w.out_channels(); ++oc)
      for (int ty = 0; ty < o; ++ty)
        for (int tx = 0; tx < o; ++tx) {
          double acc = 0.0;
          for (int c = 0; c < fm.channels(); ++c)
            for (int h = 0; h < fm.group_size(); ++h)
              for (int uy = 0; uy < k; ++uy)
                for (int ux = 0; ux < k; ++ux) {
                  const int iy = s * ty + uy - p;
                  const int ix = s * tx + ux - p;
                  if (iy < 0 || ix < 0 || iy >= fm.height() || ix >= fm.width()) continue;
                  const Index2 src = apply_index(g_inv, k, {ux, uy});
                  const int filter_slot = fm.group_size() == 1 ? 0 : slot_of(compose(g_inv, element_at_slot(h)));
                  acc += fm.at(c, h, iy, ix) * w.at(oc, c, filter_slot, src.y, src.x);
                }
          out.at(oc, gs, ty, tx) = acc;
        }
  }
  return out;
}

FilterBank random_bank(std::uint64_t seed, int out, int in, int in_group, int k, bool integer = true) {
  ValueSource src(seed, integer);
  return random_filter_bank(src, out, in, in_group, k);
}

}  // namespace

TEST(Conv2dTest, OutputSizeFollowsFloorLaw) {
  const FeatureMap fm = random_feature_map(1, 1, 1, 5, 5, true);
  const FeatureMap out = conv2d(fm, random_bank(2, 1, 1, 1, 2), 2, 0);
  EXPECT_EQ(out.height(), 2);
  EXPECT_EQ(out.width(), 2);
  for (int i = 3; i <= 20; ++i)
    for (int k = 1; k <= 4; ++k)
      for (int s = 1; s <= 3; ++s)
        for (int p = 0; p <= 2; ++p) {
          if (i + 2 * p < k) continue;
          const FeatureMap r = conv2d(make_feature_map(1, 1, i, i, 1.0), FilterBank(1, 1, 1, k, 1.0), s, p);
          ASSERT_EQ(r.height(), (i + 2 * p - k) / s + 1);
          ASSERT_EQ(r.height(), output_size(i, k, s, p));
        }
}

TEST(Conv2dTest, IdentityAndSumExamples) {
  const FeatureMap fm = random_feature_map(3, 1, 1, 6, 6, false);
  EXPECT_EQ(conv2d(fm, FilterBank(1, 1, 1, 1, 1.0), 1, 0), fm);
  const FeatureMap nine = conv2d(make_feature_map(1, 1, 3, 3, 1.0), FilterBank(1, 1, 1, 3, 1.0), 1, 0);
  EXPECT_EQ(nine.size(), 1u);
  EXPECT_EQ(nine.at(0, 0, 0, 0), 9.0);
}

TEST(Conv2dTest, PaddingEqualsExplicitZeroBorder) {
  const FeatureMap fm = random_feature_map(4, 2, 4, 7, 7, true);
  const FilterBank w = random_bank(5, 3, 2, 4, 3);
  for (int p = 0; p <= 2; ++p)
    for (int s = 1; s <= 3; ++s) EXPECT_EQ(conv2d(fm, w, s, p), conv2d(zero_pad(fm, p), w, s, 0));
}

TEST(Conv2dTest, KernelLargerThanInput) {
  EXPECT_THROW(conv2d(make_feature_map(1, 1, 2, 2, 0.0), FilterBank(1, 1, 1, 3, 1.0), 1, 0), ShapeError);
  EXPECT_NO_THROW(conv2d(make_feature_map(1, 1, 2, 2, 0.0), FilterBank(1, 1, 1, 3, 1.0), 1, 1));
}

TEST(GConvLiftTest, IdentitySlotIsPlainConvolution) {
  const FeatureMap fm = random_feature_map(6, 1, 1, 9, 9, true);
  const FilterBank w = random_bank(7, 1, 1, 1, 3);
  const FeatureMap lifted = gconv_lift(fm, w, 1, 0, GroupKind::P4);
  const FeatureMap plain = conv2d(fm, w, 1, 0);
  ASSERT_EQ(lifted.group_size(), 4);
  for (int y = 0; y < plain.height(); ++y)
    for (int x = 0; x < plain.width(); ++x) EXPECT_EQ(lifted.at(0, 0, y, x), plain.at(0, 0, y, x));
}

TEST(GConvLiftTest, SymmetricFilterGivesEqualSlots) {
  const FeatureMap fm = random_feature_map(8, 1, 1, 9, 9, false);
  const FeatureMap lifted = gconv_lift(fm, FilterBank(1, 1, 1, 3, 0.5), 2, 1, GroupKind::P4M);
  for (int g = 1; g < 8; ++g)
    for (int y = 0; y < lifted.height(); ++y)
      for (int x = 0; x < lifted.width(); ++x) EXPECT_EQ(lifted.at(0, g, y, x), lifted.at(0, 0, y, x));
}

TEST(GConvLiftTest, RejectsGroupValuedInput) {
  EXPECT_THROW(gconv_lift(make_feature_map(1, 4, 5, 5, 0.0), FilterBank(1, 1, 1, 3), 1, 0, GroupKind::P4), ShapeError);
}

TEST(GConvTest, MatchesDirectFormula) {
  for (const GroupKind kind : {GroupKind::P4, GroupKind::P4M}) {
    const int groups = group_size(kind);
    const FeatureMap lifted_in = random_feature_map(9, 2, 1, 8, 8, true);
    const FilterBank lift_w = random_bank(10, 3, 2, 1, 3);
    EXPECT_EQ(gconv_lift(lifted_in, lift_w, 2, 1, kind), naive_gconv(lifted_in, lift_w, 2, 1, kind));
    const FeatureMap fm = random_feature_map(11, 2, groups, 8, 8, true);
    const FilterBank w = random_bank(12, 3, 2, groups, 3);
    EXPECT_EQ(gconv(fm, w, 1, 0, kind), naive_gconv(fm, w, 1, 0, kind));
    EXPECT_EQ(gconv(fm, w, 2, 1, kind), naive_gconv(fm, w, 2, 1, kind));
  }
}

TEST(GConvTest, DeltaKernelIsIdentity) {
  const FeatureMap fm = random_feature_map(13, 2, 4, 6, 6, false);
  FilterBank w(2, 2, 4, 3);
  for (int c = 0; c < 2; ++c) w.at(c, c, 0, 1, 1) = 1.0;
  EXPECT_EQ(gconv(fm, w, 1, 1, GroupKind::P4), fm);
}

TEST(GConvTest, GroupSizeMismatch) {
  EXPECT_THROW(gconv(make_feature_map(1, 1, 5, 5, 0.0), FilterBank(1, 1, 4, 3), 1, 0, GroupKind::P4), ShapeError);
  EXPECT_THROW(gconv(make_feature_map(1, 4, 5, 5, 0.0), FilterBank(1, 1, 4, 3), 1, 0, GroupKind::P4M), ShapeError);
}

// The layer-level statement of the index theorem: exact grids give exact equivariance.
TEST(GConvTest, ExactSizesAreExactlyEquivariant) {
  int checked = 0;
  for (const GroupKind kind : {GroupKind::P4, GroupKind::P4M})
    for (int i = 5; i <= 14; ++i)
      for (int k = 1; k <= 4; ++k)
        for (int s = 1; s <= 3; ++s)
          for (int p = 0; p <= 1; ++p) {
            if (i + 2 * p < k || !check_layer(i, k, s, p)) continue;
            const auto seed = static_cast<std::uint64_t>(i * 1000 + k * 100 + s * 10 + p);
            const FeatureMap x = random_feature_map(seed, 2, 1, i, i, true);
            const FilterBank lift_w = random_bank(seed + 1, 2, 2, 1, k);
            const FeatureMap xg = random_feature_map(seed + 2, 2, group_size(kind), i, i, true);
            const FilterBank w = random_bank(seed + 3, 2, 2, group_size(kind), k);
            for (const auto g : elements(kind)) {
              ASSERT_EQ(gconv_lift(act_spatial(g, x), lift_w, s, p, kind),
                        act_full(g, gconv_lift(x, lift_w, s, p, kind), kind));
              ASSERT_EQ(gconv(act_full(g, xg, kind), w, s, p, kind), act_full(g, gconv(xg, w, s, p, kind), kind));
            }
            ++checked;
          }
  EXPECT_GT(checked, 100);
}

TEST(GConvTest, ToyLayerExactAt33InexactAt32) {
  const GroupElement r{1, false};
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const FilterBank w = random_bank(seed, 1, 1, 4, 3);
    const FeatureMap x = random_feature_map(seed + 100, 1, 4, 33, 33, true);
    EXPECT_EQ(gconv(act_full(r, x, GroupKind::P4), w, 2, 1, GroupKind::P4),
              act_full(r, gconv(x, w, 2, 1, GroupKind::P4), GroupKind::P4));
  }
  bool broken = false;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const FilterBank w = random_bank(seed, 1, 1, 4, 3);
    const FeatureMap x = random_feature_map(seed + 100, 1, 4, 32, 32, true);
    const double err = equivariance_error(gconv(act_full(r, x, GroupKind::P4), w, 2, 1, GroupKind::P4),
                                          act_full(r, gconv(x, w, 2, 1, GroupKind::P4), GroupKind::P4));
    broken |= err > 0.0;
  }
  EXPECT_TRUE(broken);
}

TEST(MaxPoolTest, Examples) {
  EXPECT_EQ(maxpool(make_feature_map(2, 4, 6, 6, 3.0), 2, 2), make_feature_map(2, 4, 3, 3, 3.0));
  const FeatureMap fm(1, 1, 2, 2, std::vector<double>{1, 2, 3, 4});
  EXPECT_EQ(maxpool(fm, 2, 2), FeatureMap(1, 1, 1, 1, std::vector<double>{4}));
  EXPECT_THROW(maxpool(fm, 3, 1), ShapeError);
}

TEST(MaxPoolTest, FigureOneSettingIsNotEquivariant) {
  // 0..24 laid out row-major: every pooling window has a distinct maximum.
  FeatureMap x(1, 1, 5, 5);
  for (int i = 0; i < 25; ++i) x.values()[static_cast<std::size_t>(i)] = i;
  const GroupElement r{1, false};
  EXPECT_NE(maxpool(act_spatial(r, x), 2, 2), act_spatial(r, maxpool(x, 2, 2)));
  // With a 4x4 input the grid is aligned and the two orders agree.
  FeatureMap y(1, 1, 4, 4);
  for (int i = 0; i < 16; ++i) y.values()[static_cast<std::size_t>(i)] = i;
  EXPECT_EQ(maxpool(act_spatial(r, y), 2, 2), act_spatial(r, maxpool(y, 2, 2)));
}

TEST(CosetMaxPoolTest, Examples) {
  const FeatureMap fm = random_feature_map(1, 2, 1, 3, 3, false);
  FeatureMap same(2, 4, 3, 3);
  for (int c = 0; c < 2; ++c)
    for (int g = 0; g < 4; ++g)
      for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 3; ++x) same.at(c, g, y, x) = fm.at(c, 0, y, x);
  EXPECT_EQ(coset_maxpool(same), fm);
  const FeatureMap slots(1, 4, 1, 1, std::vector<double>{1, 2, 3, 4});
  EXPECT_EQ(coset_maxpool(slots).at(0, 0, 0, 0), 4.0);
  EXPECT_THROW(coset_maxpool(make_feature_map(1, 1, 2, 2, 0.0)), ShapeError);
}

TEST(GlobalAvgPoolTest, Examples) {
  EXPECT_EQ(global_avg_pool(make_feature_map(3, 4, 5, 5, 1.5)), make_feature_map(3, 4, 1, 1, 1.5));
  const FeatureMap fm(1, 1, 2, 2, std::vector<double>{1, 2, 3, 4});
  EXPECT_EQ(global_avg_pool(fm).at(0, 0, 0, 0), 2.5);
}

TEST(ReluTest, Examples) {
  const FeatureMap fm(1, 1, 1, 3, std::vector<double>{0.0, -3.0, 2.0});
  EXPECT_EQ(relu(fm), FeatureMap(1, 1, 1, 3, std::vector<double>{0.0, 0.0, 2.0}));
}

TEST(CircleCropTest, SmallMapsUnchanged) {
  const FeatureMap one(1, 1, 1, 1, std::vector<double>{5.0});
  EXPECT_EQ(circle_crop(one), one);
  const FeatureMap two(1, 1, 2, 2, std::vector<double>{1, 2, 3, 4});
  EXPECT_EQ(circle_crop(two), two);
  EXPECT_THROW(circle_crop(make_feature_map(1, 1, 2, 3, 1.0)), ShapeError);
}

TEST(CircleCropTest, MatchesEuclideanDiskPredicate) {
  for (int n = 1; n <= 40; ++n) {
    const FeatureMap cropped = circle_crop(make_feature_map(1, 1, n, n, 1.0));
    const double c = (n - 1) / 2.0;
    const double r = n / 2.0;
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) {
        const double d2 = (x - c) * (x - c) + (y - c) * (y - c);
        // Doubled coordinates are exact, so there is no rounding at the boundary.
        ASSERT_EQ(cropped.at(0, 0, y, x), d2 <= r * r ? 1.0 : 0.0) << "n=" << n << " x=" << x << " y=" << y;
      }
  }
  const FeatureMap five = circle_crop(make_feature_map(1, 1, 5, 5, 1.0));
  EXPECT_EQ(five.at(0, 0, 0, 0), 0.0);
  EXPECT_EQ(five.at(0, 0, 1, 0), 1.0);
}

TEST(CircleCropTest, IdempotentAndSymmetric) {
  for (int n : {3, 8, 13}) {
    const FeatureMap x = random_feature_map(static_cast<std::uint64_t>(n), 2, 8, n, n, true);
    EXPECT_EQ(circle_crop(circle_crop(x)), circle_crop(x));
    for (const auto g : elements(GroupKind::P4M)) {
      EXPECT_EQ(circle_crop(act_full(g, x, GroupKind::P4M)), act_full(g, circle_crop(x), GroupKind::P4M));
    }
  }
}

TEST(LayerCommutationTest, PointwiseAndPoolingLayersCommuteForAnySize) {
  for (int n : {4, 5, 7, 10}) {
    const FeatureMap x = random_feature_map(static_cast<std::uint64_t>(100 + n), 2, 8, n, n, true);
    for (const auto g : elements(GroupKind::P4M)) {
      const FeatureMap gx = act_full(g, x, GroupKind::P4M);
      EXPECT_EQ(relu(gx), act_full(g, relu(x), GroupKind::P4M));
      EXPECT_EQ(coset_maxpool(gx), act_spatial(g, coset_maxpool(x)));
      EXPECT_EQ(global_avg_pool(act_spatial(g, x)), global_avg_pool(x));
    }
  }
}

TEST(InferShapesTest, ChainsShapesAndReportsLayer) {
  ArchitectureSpec arch = *find_builtin("toy41");
  const auto shapes = infer_shapes(arch);
  ASSERT_EQ(shapes.size(), 4u);
  EXPECT_EQ(shapes[0], (MapShape{1, 4, 17}));
  EXPECT_EQ(shapes[3], (MapShape{2, 1, 1}));

  ArchitectureSpec bad{"bad", GroupKind::P4, 8, 1, {{LayerKind::GConvLift, 3, 1, 0, 2}, {LayerKind::GConvLift, 3, 1, 0, 2}}};
  try {
    infer_shapes(bad);
    FAIL() << "expected LayerError";
  } catch (const LayerError& e) {
    EXPECT_EQ(e.layer_index(), 1);
  }
  ArchitectureSpec underflow{"u", GroupKind::Z2, 4, 1, {{LayerKind::MaxPool, 2, 2, 0, 0}, {LayerKind::Conv2d, 3, 1, 0, 1}}};
  EXPECT_THROW(infer_shapes(underflow), LayerError);
}

TEST(ForwardTest, EmptyNetworkReturnsInput) {
  const Network net{"empty", GroupKind::Z2, 4, 1, {}};
  const FeatureMap x = random_feature_map(1, 1, 1, 4, 4, false);
  const auto acts = forward(net, x);
  ASSERT_EQ(acts.size(), 1u);
  EXPECT_EQ(acts[0], x);
}

TEST(ForwardTest, ToyNetworkYieldsTwoLogits) {
  const ArchitectureSpec arch = *find_builtin("toy41");
  const Network net = build_network(arch, 3, false);
  const auto acts = forward(net, random_feature_map(4, 1, 1, 33, 33, false));
  ASSERT_EQ(acts.size(), arch.layers.size());
  EXPECT_EQ(acts.back().size(), 2u);
  for (const auto& a : acts)
    for (double v : a.values()) EXPECT_TRUE(std::isfinite(v));
  EXPECT_EQ(acts, forward(net, random_feature_map(4, 1, 1, 33, 33, false)));
}

TEST(ForwardTest, ErrorsCarryLayerIndex) {
  Network net = build_network(*find_builtin("toy41"), 1, true);
  net.layers[3].dense->in_features = 7;
  try {
    forward(net, random_feature_map(1, 1, 1, 33, 33, true));
    FAIL() << "expected LayerError";
  } catch (const LayerError& e) {
    EXPECT_EQ(e.layer_index(), 3);
  }
  EXPECT_THROW(forward(net, random_feature_map(1, 1, 1, 32, 32, true)), ShapeError);
}

namespace {

ArchitectureSpec random_architecture(std::uint64_t seed, GroupKind kind, int& input_size) {
  ValueSource rng(seed, true);
  auto pick = [&](int lo, int hi) { return lo + static_cast<int>(std::abs(rng.next())) % (hi - lo + 1); };
  ArchitectureSpec arch{"random", kind, 0, 1, {}};
  arch.layers.push_back({LayerKind::GConvLift, pick(1, 3), pick(1, 2), pick(0, 1), 2});
  arch.layers.push_back({LayerKind::ReLU});
  arch.layers.push_back({LayerKind::MaxPool, 2, pick(1, 2), 0, 0});
  arch.layers.push_back({LayerKind::GConv, pick(1, 3), pick(1, 2), pick(0, 1), 2});
  arch.layers.push_back({LayerKind::GlobalAvgPool});
  arch.layers.push_back({LayerKind::CosetMaxPool});
  input_size = pick(13, 20);
  arch.input_size = input_size;
  return arch;
}

}  // namespace

TEST(ForwardTest, EquivarianceFollowsTheIndexCondition) {
  int exact_seen = 0;
  int inexact_seen = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const GroupKind kind = seed % 2 ? GroupKind::P4M : GroupKind::P4;
    int n = 0;
    const ArchitectureSpec arch = random_architecture(seed, kind, n);
    const AnalysisReport report = analyze(arch.layers, n);
    double worst = 0.0;
    for (std::uint64_t w = 0; w < (report.exact ? 3u : 10u); ++w) {
      worst = std::max(worst, profile_equivariance(arch, seed * 100 + w, elements(kind), true).max_error());
    }
    if (report.exact) {
      EXPECT_EQ(worst, 0.0) << "seed " << seed;
      ++exact_seen;
    } else {
      EXPECT_GT(worst, 0.0) << "seed " << seed;
      ++inexact_seen;
    }
  }
  EXPECT_GT(exact_seen, 3);
  EXPECT_GT(inexact_seen, 3);
}
