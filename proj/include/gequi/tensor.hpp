#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace gequi {

/// Dense activation tensor indexed (channel, group slot, row, col), row-major.
/// Row 0 is the top of the map, col 0 the left edge.
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(int channels, int group_size, int height, int width, double fill = 0.0);
  FeatureMap(int channels, int group_size, int height, int width, std::vector<double> values);

  int channels() const { return channels_; }
  int group_size() const { return group_size_; }
  int height() const { return height_; }
  int width() const { return width_; }
  bool is_square() const { return height_ == width_; }
  std::size_t size() const { return values_.size(); }

  std::size_t offset(int c, int g, int row, int col) const {
    return ((static_cast<std::size_t>(c) * group_size_ + g) * height_ + row) * width_ + col;
  }
  double at(int c, int g, int row, int col) const { return values_[offset(c, g, row, col)]; }
  double& at(int c, int g, int row, int col) { return values_[offset(c, g, row, col)]; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  bool same_shape(const FeatureMap& other) const;
  bool operator==(const FeatureMap& other) const = default;

 private:
  int channels_ = 0;
  int group_size_ = 0;
  int height_ = 0;
  int width_ = 0;
  std::vector<double> values_;
};

/// Square filters indexed (out, in, in_group, row, col).
class FilterBank {
 public:
  FilterBank() = default;
  FilterBank(int out_channels, int in_channels, int in_group_size, int k, double fill = 0.0);
  FilterBank(int out_channels, int in_channels, int in_group_size, int k, std::vector<double> values);

  int out_channels() const { return out_channels_; }
  int in_channels() const { return in_channels_; }
  int in_group_size() const { return in_group_size_; }
  int k() const { return k_; }

  std::size_t offset(int o, int c, int g, int row, int col) const {
    return (((static_cast<std::size_t>(o) * in_channels_ + c) * in_group_size_ + g) * k_ + row) * k_ +
           col;
  }
  double at(int o, int c, int g, int row, int col) const { return values_[offset(o, c, g, row, col)]; }
  double& at(int o, int c, int g, int row, int col) { return values_[offset(o, c, g, row, col)]; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  bool operator==(const FilterBank& other) const = default;

 private:
  int out_channels_ = 0;
  int in_channels_ = 0;
  int in_group_size_ = 0;
  int k_ = 0;
  std::vector<double> values_;
};

/// Portable deterministic value source. Integer mode yields exact values in [-4, 4];
/// real mode yields uniform values in [-1, 1).
class ValueSource {
 public:
  ValueSource(std::uint64_t seed, bool integer_valued);
  double next();

 private:
  std::mt19937_64 engine_;
  bool integer_valued_;
};

FeatureMap make_feature_map(int channels, int group_size, int height, int width, double fill);

FeatureMap random_feature_map(std::uint64_t seed, int channels, int group_size, int height, int width,
                              bool integer_valued);

FilterBank random_filter_bank(ValueSource& source, int out_channels, int in_channels, int in_group_size,
                              int k);

/// Largest absolute elementwise difference. Throws ShapeError on mismatch.
double max_abs_diff(const FeatureMap& a, const FeatureMap& b);

}  // namespace gequi
