#include "gequi/layers.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "gequi/analyzer.hpp"
#include "gequi/errors.hpp"

namespace gequi {

namespace {

struct KindName {
  LayerKind kind;
  std::string_view name;
};

constexpr KindName kKindNames[] = {
    {LayerKind::GConvLift, "gconv_lift"},
    {LayerKind::GConv, "gconv"},
    {LayerKind::Conv2d, "conv2d"},
    {LayerKind::MaxPool, "maxpool"},
    {LayerKind::ReLU, "relu"},
    {LayerKind::CosetMaxPool, "coset_maxpool"},
    {LayerKind::GlobalAvgPool, "global_avg_pool"},
    {LayerKind::CircleCrop, "circle_crop"},
    {LayerKind::Dense, "dense"},
};

void require(bool ok, const std::string& message) {
  if (!ok) throw ShapeError(message);
}

}  // namespace

std::string_view to_string(LayerKind kind) {
  for (const auto& entry : kKindNames)
    if (entry.kind == kind) return entry.name;
  return "unknown";
}

LayerKind parse_layer_kind(std::string_view name) {
  for (const auto& entry : kKindNames)
    if (entry.name == name) return entry.kind;
  throw ConfigError("unknown layer kind '" + std::string(name) + "'");
}

bool has_spatial_kernel(LayerKind kind) {
  return kind == LayerKind::GConvLift || kind == LayerKind::GConv || kind == LayerKind::Conv2d ||
         kind == LayerKind::MaxPool;
}

bool has_weights(LayerKind kind) {
  return kind == LayerKind::GConvLift || kind == LayerKind::GConv || kind == LayerKind::Conv2d ||
         kind == LayerKind::Dense;
}

std::vector<MapShape> infer_shapes(const ArchitectureSpec& arch) {
  if (arch.input_size < 1) throw ShapeError("input size must be >= 1");
  if (arch.input_channels < 1) throw ShapeError("input channel count must be >= 1");
  const int group = group_size(arch.group);
  MapShape shape{arch.input_channels, 1, arch.input_size};
  std::vector<MapShape> shapes;
  for (std::size_t idx = 0; idx < arch.layers.size(); ++idx) {
    const LayerSpec& layer = arch.layers[idx];
    try {
      if (has_spatial_kernel(layer.kind)) {
        require(layer.k >= 1, "kernel size must be >= 1");
        require(layer.s >= 1, "stride must be >= 1");
        require(layer.p >= 0, "padding must be >= 0");
      }
      if (has_weights(layer.kind)) require(layer.out_channels >= 1, "out_channels must be >= 1");
      switch (layer.kind) {
        case LayerKind::GConvLift:
          require(arch.group != GroupKind::Z2, "gconv_lift needs a p4 or p4m network");
          require(shape.group_size == 1, "gconv_lift expects a map without group axis");
          shape = {layer.out_channels, group, output_size(shape.side, layer.k, layer.s, layer.p)};
          break;
        case LayerKind::GConv:
          require(arch.group != GroupKind::Z2, "gconv needs a p4 or p4m network");
          require(shape.group_size == group, "gconv expects a group-valued map (lift first)");
          shape = {layer.out_channels, group, output_size(shape.side, layer.k, layer.s, layer.p)};
          break;
        case LayerKind::Conv2d:
          shape = {layer.out_channels, 1, output_size(shape.side, layer.k, layer.s, layer.p)};
          break;
        case LayerKind::MaxPool:
          require(layer.p == 0, "maxpool does not support padding");
          shape.side = output_size(shape.side, layer.k, layer.s, 0);
          break;
        case LayerKind::ReLU:
        case LayerKind::CircleCrop:
          break;
        case LayerKind::CosetMaxPool:
          require(shape.group_size > 1, "coset_maxpool needs a group-valued map");
          shape.group_size = 1;
          break;
        case LayerKind::GlobalAvgPool:
          shape.side = 1;
          break;
        case LayerKind::Dense:
          shape = {layer.out_channels, 1, 1};
          break;
      }
    } catch (const Error& e) {
      throw LayerError(static_cast<int>(idx), e.what());
    }
    shapes.push_back(shape);
  }
  return shapes;
}

Network build_network(const ArchitectureSpec& arch, std::uint64_t seed, bool integer_weights) {
  const std::vector<MapShape> shapes = infer_shapes(arch);
  ValueSource source(seed, integer_weights);
  Network net{arch.name, arch.group, arch.input_size, arch.input_channels, {}};
  MapShape in{arch.input_channels, 1, arch.input_size};
  for (std::size_t idx = 0; idx < arch.layers.size(); ++idx) {
    Layer layer{arch.layers[idx], std::nullopt, std::nullopt};
    const LayerSpec& spec = layer.spec;
    if (spec.kind == LayerKind::GConvLift || spec.kind == LayerKind::GConv || spec.kind == LayerKind::Conv2d) {
      layer.filters = random_filter_bank(source, spec.out_channels, in.channels, in.group_size, spec.k);
    } else if (spec.kind == LayerKind::Dense) {
      DenseWeights w;
      w.out_features = spec.out_channels;
      w.in_features = in.channels * in.group_size * in.side * in.side;
      w.weights.resize(static_cast<std::size_t>(w.out_features) * w.in_features);
      for (double& v : w.weights) v = source.next();
      w.bias.resize(static_cast<std::size_t>(w.out_features));
      for (double& v : w.bias) v = source.next();
      layer.dense = std::move(w);
    }
    net.layers.push_back(std::move(layer));
    in = shapes[idx];
  }
  return net;
}

FeatureMap conv2d(const FeatureMap& fm, const FilterBank& filters, int s, int p) {
  require(s >= 1 && p >= 0, "conv2d: stride must be >= 1 and padding >= 0");
  require(filters.in_channels() == fm.channels(), "conv2d: filter input channels do not match the map");
  require(filters.in_group_size() == fm.group_size(), "conv2d: filter group size does not match the map");
  const int k = filters.k();
  require(fm.height() + 2 * p >= k && fm.width() + 2 * p >= k, "conv2d: kernel larger than padded input");
  const int out_h = (fm.height() + 2 * p - k) / s + 1;
  const int out_w = (fm.width() + 2 * p - k) / s + 1;
  FeatureMap out(filters.out_channels(), 1, out_h, out_w);
  for (int o = 0; o < filters.out_channels(); ++o)
    for (int oy = 0; oy < out_h; ++oy)
      for (int ox = 0; ox < out_w; ++ox) {
        double acc = 0.0;
        for (int c = 0; c < fm.channels(); ++c)
          for (int h = 0; h < fm.group_size(); ++h)
            for (int ky = 0; ky < k; ++ky) {
              const int iy = oy * s + ky - p;
              if (iy < 0 || iy >= fm.height()) continue;
              for (int kx = 0; kx < k; ++kx) {
                const int ix = ox * s + kx - p;
                if (ix < 0 || ix >= fm.width()) continue;
                acc += fm.at(c, h, iy, ix) * filters.at(o, c, h, ky, kx);
              }
            }
        out.at(o, 0, oy, ox) = acc;
      }
  return out;
}

FilterBank gconv_filters_for(GroupElement g, const FilterBank& filters, GroupKind kind) {
  const FilterBank moved = act_spatial(g, filters);
  if (filters.in_group_size() == 1) return moved;
  require(filters.in_group_size() == group_size(kind), "gconv: filter group size does not match the group");
  const GroupElement g_inv = inverse(g);
  const int k = filters.k();
  FilterBank out(filters.out_channels(), filters.in_channels(), filters.in_group_size(), k);
  for (int o = 0; o < filters.out_channels(); ++o)
    for (int c = 0; c < filters.in_channels(); ++c)
      for (int h = 0; h < filters.in_group_size(); ++h) {
        const int src = slot_of(compose(g_inv, element_at_slot(h)));
        for (int y = 0; y < k; ++y)
          for (int x = 0; x < k; ++x) out.at(o, c, h, y, x) = moved.at(o, c, src, y, x);
      }
  return out;
}

namespace {

FeatureMap group_correlate(const FeatureMap& fm, const FilterBank& filters, int s, int p, GroupKind kind) {
  const int group = group_size(kind);
  FeatureMap out;
  for (int slot = 0; slot < group; ++slot) {
    const FeatureMap plane = conv2d(fm, gconv_filters_for(element_at_slot(slot), filters, kind), s, p);
    if (slot == 0) out = FeatureMap(plane.channels(), group, plane.height(), plane.width());
    for (int o = 0; o < plane.channels(); ++o)
      for (int y = 0; y < plane.height(); ++y)
        for (int x = 0; x < plane.width(); ++x) out.at(o, slot, y, x) = plane.at(o, 0, y, x);
  }
  return out;
}

}  // namespace

FeatureMap gconv_lift(const FeatureMap& fm, const FilterBank& filters, int s, int p, GroupKind kind) {
  require(kind != GroupKind::Z2, "gconv_lift: needs p4 or p4m");
  require(fm.group_size() == 1, "gconv_lift: input must have group size 1");
  require(filters.in_group_size() == 1, "gconv_lift: filters must have group size 1");
  return group_correlate(fm, filters, s, p, kind);
}

FeatureMap gconv(const FeatureMap& fm, const FilterBank& filters, int s, int p, GroupKind kind) {
  require(kind != GroupKind::Z2, "gconv: needs p4 or p4m");
  require(fm.group_size() == group_size(kind), "gconv: input group size " + std::to_string(fm.group_size()) +
                                                   " does not match " + std::string(to_string(kind)));
  require(filters.in_group_size() == group_size(kind), "gconv: filter group size does not match the group");
  return group_correlate(fm, filters, s, p, kind);
}

FeatureMap maxpool(const FeatureMap& fm, int k, int s) {
  require(k >= 1 && s >= 1, "maxpool: kernel and stride must be >= 1");
  require(k <= fm.height() && k <= fm.width(), "maxpool: kernel larger than input");
  const int out_h = (fm.height() - k) / s + 1;
  const int out_w = (fm.width() - k) / s + 1;
  FeatureMap out(fm.channels(), fm.group_size(), out_h, out_w);
  for (int c = 0; c < fm.channels(); ++c)
    for (int h = 0; h < fm.group_size(); ++h)
      for (int oy = 0; oy < out_h; ++oy)
        for (int ox = 0; ox < out_w; ++ox) {
          double best = -std::numeric_limits<double>::infinity();
          for (int ky = 0; ky < k; ++ky)
            for (int kx = 0; kx < k; ++kx) best = std::max(best, fm.at(c, h, oy * s + ky, ox * s + kx));
          out.at(c, h, oy, ox) = best;
        }
  return out;
}

FeatureMap coset_maxpool(const FeatureMap& fm) {
  require(fm.group_size() > 1, "coset_maxpool: map has no group axis");
  FeatureMap out(fm.channels(), 1, fm.height(), fm.width());
  for (int c = 0; c < fm.channels(); ++c)
    for (int y = 0; y < fm.height(); ++y)
      for (int x = 0; x < fm.width(); ++x) {
        double best = fm.at(c, 0, y, x);
        for (int h = 1; h < fm.group_size(); ++h) best = std::max(best, fm.at(c, h, y, x));
        out.at(c, 0, y, x) = best;
      }
  return out;
}

FeatureMap global_avg_pool(const FeatureMap& fm) {
  FeatureMap out(fm.channels(), fm.group_size(), 1, 1);
  const double count = static_cast<double>(fm.height()) * fm.width();
  for (int c = 0; c < fm.channels(); ++c)
    for (int h = 0; h < fm.group_size(); ++h) {
      double sum = 0.0;
      for (int y = 0; y < fm.height(); ++y)
        for (int x = 0; x < fm.width(); ++x) sum += fm.at(c, h, y, x);
      out.at(c, h, 0, 0) = sum / count;
    }
  return out;
}

FeatureMap relu(const FeatureMap& fm) {
  FeatureMap out = fm;
  for (double& v : out.values()) v = std::max(0.0, v);
  return out;
}

FeatureMap circle_crop(const FeatureMap& fm) {
  require(fm.is_square(), "circle_crop: map must be square");
  const long n = fm.height();
  FeatureMap out = fm;
  // Scaled by 2 so the test stays in integers: (2x - (n-1))^2 + (2y - (n-1))^2 <= n^2.
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      const long dx = 2L * x - (n - 1);
      const long dy = 2L * y - (n - 1);
      if (dx * dx + dy * dy <= n * n) continue;
      for (int c = 0; c < fm.channels(); ++c)
        for (int h = 0; h < fm.group_size(); ++h) out.at(c, h, y, x) = 0.0;
    }
  return out;
}

FeatureMap dense(const FeatureMap& fm, const DenseWeights& weights) {
  require(static_cast<std::size_t>(weights.in_features) == fm.size(),
          "dense: expected " + std::to_string(weights.in_features) + " input features, got " +
              std::to_string(fm.size()));
  FeatureMap out(weights.out_features, 1, 1, 1);
  const auto in = fm.values();
  for (int o = 0; o < weights.out_features; ++o) {
    double acc = weights.bias.empty() ? 0.0 : weights.bias[static_cast<std::size_t>(o)];
    const std::size_t row = static_cast<std::size_t>(o) * weights.in_features;
    for (std::size_t i = 0; i < in.size(); ++i) acc += weights.weights[row + i] * in[i];
    out.at(o, 0, 0, 0) = acc;
  }
  return out;
}

FeatureMap apply_layer(const Layer& layer, const FeatureMap& fm, GroupKind kind) {
  const LayerSpec& spec = layer.spec;
  auto filters = [&]() -> const FilterBank& {
    if (!layer.filters) throw ShapeError(std::string(to_string(spec.kind)) + " layer has no weights");
    return *layer.filters;
  };
  switch (spec.kind) {
    case LayerKind::GConvLift:
      return gconv_lift(fm, filters(), spec.s, spec.p, kind);
    case LayerKind::GConv:
      return gconv(fm, filters(), spec.s, spec.p, kind);
    case LayerKind::Conv2d:
      return conv2d(fm, filters(), spec.s, spec.p);
    case LayerKind::MaxPool:
      return maxpool(fm, spec.k, spec.s);
    case LayerKind::ReLU:
      return relu(fm);
    case LayerKind::CosetMaxPool:
      return coset_maxpool(fm);
    case LayerKind::GlobalAvgPool:
      return global_avg_pool(fm);
    case LayerKind::CircleCrop:
      return circle_crop(fm);
    case LayerKind::Dense:
      if (!layer.dense) throw ShapeError("dense layer has no weights");
      return dense(fm, *layer.dense);
  }
  throw ShapeError("unhandled layer kind");
}

std::vector<FeatureMap> forward(const Network& net, const FeatureMap& input) {
  if (input.channels() != net.input_channels || input.group_size() != 1 || !input.is_square() ||
      input.height() != net.input_size) {
    throw ShapeError("forward: input must be " + std::to_string(net.input_channels) + "x1x" +
                     std::to_string(net.input_size) + "x" + std::to_string(net.input_size));
  }
  if (net.layers.empty()) return {input};
  std::vector<FeatureMap> activations;
  activations.reserve(net.layers.size());
  const FeatureMap* current = &input;
  for (std::size_t idx = 0; idx < net.layers.size(); ++idx) {
    try {
      activations.push_back(apply_layer(net.layers[idx], *current, net.kind));
    } catch (const LayerError&) {
      throw;
    } catch (const Error& e) {
      throw LayerError(static_cast<int>(idx), e.what());
    }
    current = &activations.back();
  }
  return activations;
}

}  // namespace gequi
