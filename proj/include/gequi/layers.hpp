#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gequi/group.hpp"
#include "gequi/tensor.hpp"

namespace gequi {

enum class LayerKind {
  GConvLift,
  GConv,
  Conv2d,
  MaxPool,
  ReLU,
  CosetMaxPool,
  GlobalAvgPool,
  CircleCrop,
  Dense,
};

std::string_view to_string(LayerKind kind);
LayerKind parse_layer_kind(std::string_view name);

/// Layers with a spatial kernel: the ones whose sampling grid can break equivariance.
bool has_spatial_kernel(LayerKind kind);
bool has_weights(LayerKind kind);

/// Declarative description of one layer. Fields that do not apply to a kind are ignored.
struct LayerSpec {
  LayerKind kind = LayerKind::ReLU;
  int k = 1;
  int s = 1;
  int p = 0;
  int out_channels = 0;

  bool operator==(const LayerSpec&) const = default;
};

struct ArchitectureSpec {
  std::string name;
  GroupKind group = GroupKind::Z2;
  int input_size = 0;
  int input_channels = 1;
  std::vector<LayerSpec> layers;

  bool operator==(const ArchitectureSpec&) const = default;
};

struct DenseWeights {
  int out_features = 0;
  int in_features = 0;
  std::vector<double> weights;  // row-major (out, in)
  std::vector<double> bias;
};

struct Layer {
  LayerSpec spec;
  std::optional<FilterBank> filters;
  std::optional<DenseWeights> dense;
};

struct Network {
  std::string name;
  GroupKind kind = GroupKind::Z2;
  int input_size = 0;
  int input_channels = 1;
  std::vector<Layer> layers;
};

/// Shape of an activation (channels, group slots, side).
struct MapShape {
  int channels = 0;
  int group_size = 0;
  int side = 0;
  bool operator==(const MapShape&) const = default;
};

/// Checks kinds, parameters and shape chaining; returns the output shape of every layer.
/// Throws LayerError carrying the failing layer index.
std::vector<MapShape> infer_shapes(const ArchitectureSpec& arch);

/// Draws every weight from a seeded source (integer mode: values in [-4, 4]).
Network build_network(const ArchitectureSpec& arch, std::uint64_t seed, bool integer_weights);

/// Plain cross-correlation with symmetric zero padding, summing over every input channel
/// and group slot. Output has group size 1 and side floor((i + 2p - k) / s) + 1.
FeatureMap conv2d(const FeatureMap& fm, const FilterBank& filters, int s, int p);

/// Lifting convolution: slot g of the output correlates with the filters transformed by g.
FeatureMap gconv_lift(const FeatureMap& fm, const FilterBank& filters, int s, int p, GroupKind kind);

/// Group convolution on group-valued maps. filters.in_group_size() must equal |kind|.
FeatureMap gconv(const FeatureMap& fm, const FilterBank& filters, int s, int p, GroupKind kind);

/// Filters used for output slot g of a group convolution: kernel (o, c, h) is filter
/// slot g^-1 h transformed spatially by g.
FilterBank gconv_filters_for(GroupElement g, const FilterBank& filters, GroupKind kind);

FeatureMap maxpool(const FeatureMap& fm, int k, int s);
FeatureMap coset_maxpool(const FeatureMap& fm);
/// Spatial mean; result has shape (channels, group_size, 1, 1).
FeatureMap global_avg_pool(const FeatureMap& fm);
FeatureMap relu(const FeatureMap& fm);
/// Zeroes every pixel whose center lies outside the inscribed disk
/// (center (n-1)/2, radius n/2, boundary kept).
FeatureMap circle_crop(const FeatureMap& fm);
/// Fully connected layer on the flattened map; result has shape (out, 1, 1, 1).
FeatureMap dense(const FeatureMap& fm, const DenseWeights& weights);

FeatureMap apply_layer(const Layer& layer, const FeatureMap& fm, GroupKind kind);

/// Activations after every layer, in order. An empty network returns just the input.
std::vector<FeatureMap> forward(const Network& net, const FeatureMap& input);

}  // namespace gequi
