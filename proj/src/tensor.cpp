#include "gequi/tensor.hpp"

#include <cmath>
#include <string>

#include "gequi/errors.hpp"

namespace gequi {

namespace {

void check_dims(int channels, int group_size, int height, int width) {
  if (channels < 1 || group_size < 1 || height < 1 || width < 1) {
    throw DimensionError("feature map dimensions must be >= 1, got (" + std::to_string(channels) + ", " +
                         std::to_string(group_size) + ", " + std::to_string(height) + ", " +
                         std::to_string(width) + ")");
  }
  if (group_size != 1 && group_size != 4 && group_size != 8) {
    throw DimensionError("group size must be 1, 4 or 8, got " + std::to_string(group_size));
  }
}

std::size_t volume(int a, int b, int c, int d) {
  return static_cast<std::size_t>(a) * b * c * d;
}

}  // namespace

FeatureMap::FeatureMap(int channels, int group_size, int height, int width, double fill)
    : channels_(channels), group_size_(group_size), height_(height), width_(width) {
  check_dims(channels, group_size, height, width);
  values_.assign(volume(channels, group_size, height, width), fill);
}

FeatureMap::FeatureMap(int channels, int group_size, int height, int width, std::vector<double> values)
    : channels_(channels), group_size_(group_size), height_(height), width_(width), values_(std::move(values)) {
  check_dims(channels, group_size, height, width);
  if (values_.size() != volume(channels, group_size, height, width)) {
    throw DimensionError("feature map value count " + std::to_string(values_.size()) +
                         " does not match its shape");
  }
}

bool FeatureMap::same_shape(const FeatureMap& other) const {
  return channels_ == other.channels_ && group_size_ == other.group_size_ && height_ == other.height_ &&
         width_ == other.width_;
}

FilterBank::FilterBank(int out_channels, int in_channels, int in_group_size, int k, double fill)
    : out_channels_(out_channels), in_channels_(in_channels), in_group_size_(in_group_size), k_(k) {
  if (out_channels < 1 || in_channels < 1 || in_group_size < 1 || k < 1) {
    throw DimensionError("filter bank dimensions must be >= 1");
  }
  values_.assign(volume(out_channels, in_channels, in_group_size, k) * k, fill);
}

FilterBank::FilterBank(int out_channels, int in_channels, int in_group_size, int k, std::vector<double> values)
    : out_channels_(out_channels),
      in_channels_(in_channels),
      in_group_size_(in_group_size),
      k_(k),
      values_(std::move(values)) {
  if (out_channels < 1 || in_channels < 1 || in_group_size < 1 || k < 1) {
    throw DimensionError("filter bank dimensions must be >= 1");
  }
  if (values_.size() != volume(out_channels, in_channels, in_group_size, k) * k) {
    throw DimensionError("filter bank value count does not match its shape");
  }
}

ValueSource::ValueSource(std::uint64_t seed, bool integer_valued)
    : engine_(seed), integer_valued_(integer_valued) {}

double ValueSource::next() {
  // Raw engine output is fixed by the standard; the distributions in <random> are not,
  // so the mapping to values is done here.
  const std::uint64_t bits = engine_();
  if (integer_valued_) {
    return static_cast<double>(static_cast<int>(bits % 9) - 4);
  }
  return std::ldexp(static_cast<double>(bits >> 11), -52) - 1.0;
}

FeatureMap make_feature_map(int channels, int group_size, int height, int width, double fill) {
  return FeatureMap(channels, group_size, height, width, fill);
}

FeatureMap random_feature_map(std::uint64_t seed, int channels, int group_size, int height, int width,
                              bool integer_valued) {
  FeatureMap fm(channels, group_size, height, width);
  ValueSource source(seed, integer_valued);
  for (double& v : fm.values()) v = source.next();
  return fm;
}

FilterBank random_filter_bank(ValueSource& source, int out_channels, int in_channels, int in_group_size,
                              int k) {
  FilterBank bank(out_channels, in_channels, in_group_size, k);
  for (double& v : bank.values()) v = source.next();
  return bank;
}

double max_abs_diff(const FeatureMap& a, const FeatureMap& b) {
  if (!a.same_shape(b)) throw ShapeError("max_abs_diff: feature maps differ in shape");
  double worst = 0.0;
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) worst = std::max(worst, std::abs(av[i] - bv[i]));
  return worst;
}

}  // namespace gequi
