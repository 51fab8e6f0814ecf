#pragma once

#include <span>
#include <string>
#include <vector>

#include "gequi/layers.hpp"

namespace gequi {

/// Output side of a conv/pool layer: floor((i + 2p - k) / s) + 1.
/// Throws ShapeError when the kernel exceeds the padded input.
int output_size(int i, int k, int s, int p);

/// True iff (i + 2p - k) mod s == 0, i.e. rotating or mirroring the input does not
/// shift the sampling grid of this layer.
bool check_layer(int i, int k, int s, int p);

struct TraceRecord {
  int layer_index = 0;
  LayerKind kind = LayerKind::ReLU;
  int input_side = 0;
  int padded_side = 0;
  int output_side = 0;
  bool condition_ok = true;
  std::string reason;

  bool operator==(const TraceRecord&) const = default;
};

struct AnalysisReport {
  int input_size = 0;
  std::vector<TraceRecord> trace;
  bool exact = true;
  std::vector<int> violations;
  int search_lo = 0;
  int search_hi = 0;
  std::vector<int> suggested_sizes;

  bool operator==(const AnalysisReport&) const = default;
};

/// Sizes in [lo, hi] (clamped to >= 1) that keep every layer exact. Sizes that make
/// some layer underflow are skipped.
std::vector<int> suggest_input_sizes(std::span<const LayerSpec> layers, int lo, int hi);

/// Propagates the side length through the layers and tests every layer with a spatial
/// kernel. Suggestions are searched in [input_size - radius, input_size + radius].
/// Throws LayerError citing the layer where the size underflows.
AnalysisReport analyze(std::span<const LayerSpec> layers, int input_size, int search_radius = 4);

/// Rectangular inputs are not supported; throws ShapeError unless height == width.
AnalysisReport analyze(std::span<const LayerSpec> layers, int height, int width, int search_radius);

}  // namespace gequi
