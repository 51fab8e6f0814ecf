#include "gequi/analyzer.hpp"

#include <algorithm>
#include <string>

#include "gequi/errors.hpp"

namespace gequi {

int output_size(int i, int k, int s, int p) {
  if (k < 1 || s < 1 || p < 0) throw ShapeError("output_size: need k >= 1, s >= 1, p >= 0");
  if (i + 2 * p < k) {
    throw ShapeError("kernel " + std::to_string(k) + " exceeds padded input " + std::to_string(i + 2 * p));
  }
  return (i + 2 * p - k) / s + 1;
}

bool check_layer(int i, int k, int s, int p) {
  output_size(i, k, s, p);
  return (i + 2 * p - k) % s == 0;
}

namespace {

std::string_view pass_through_reason(LayerKind kind) {
  switch (kind) {
    case LayerKind::ReLU:
      return "pointwise";
    case LayerKind::CosetMaxPool:
      return "group-axis pooling";
    case LayerKind::GlobalAvgPool:
      return "global spatial pooling";
    case LayerKind::CircleCrop:
      return "symmetric mask";
    case LayerKind::Dense:
      return "no spatial grid";
    default:
      return "";
  }
}

struct Walk {
  std::vector<TraceRecord> trace;
  std::vector<int> violations;
};

Walk walk(std::span<const LayerSpec> layers, int input_size) {
  if (input_size < 1) throw ShapeError("input size must be >= 1");
  Walk out;
  int side = input_size;
  for (std::size_t idx = 0; idx < layers.size(); ++idx) {
    const LayerSpec& layer = layers[idx];
    TraceRecord rec;
    rec.layer_index = static_cast<int>(idx);
    rec.kind = layer.kind;
    rec.input_side = side;
    if (has_spatial_kernel(layer.kind)) {
      const int p = layer.kind == LayerKind::MaxPool ? 0 : layer.p;
      rec.padded_side = side + 2 * p;
      try {
        rec.output_side = output_size(side, layer.k, layer.s, p);
      } catch (const Error& e) {
        throw LayerError(rec.layer_index, e.what());
      }
      rec.condition_ok = (side + 2 * p - layer.k) % layer.s == 0;
      rec.reason = "(" + std::to_string(rec.padded_side) + " - " + std::to_string(layer.k) + ") mod " +
                   std::to_string(layer.s) + " = " + std::to_string((rec.padded_side - layer.k) % layer.s);
    } else {
      rec.padded_side = side;
      rec.output_side = layer.kind == LayerKind::GlobalAvgPool || layer.kind == LayerKind::Dense ? 1 : side;
      rec.condition_ok = true;
      rec.reason = std::string("always ok: ") + std::string(pass_through_reason(layer.kind));
    }
    if (!rec.condition_ok) out.violations.push_back(rec.layer_index);
    side = rec.output_side;
    out.trace.push_back(std::move(rec));
  }
  return out;
}

}  // namespace

std::vector<int> suggest_input_sizes(std::span<const LayerSpec> layers, int lo, int hi) {
  std::vector<int> sizes;
  for (int i = std::max(lo, 1); i <= hi; ++i) {
    try {
      if (walk(layers, i).violations.empty()) sizes.push_back(i);
    } catch (const Error&) {
      // underflows at this size
    }
  }
  return sizes;
}

AnalysisReport analyze(std::span<const LayerSpec> layers, int input_size, int search_radius) {
  Walk w = walk(layers, input_size);
  AnalysisReport report;
  report.input_size = input_size;
  report.trace = std::move(w.trace);
  report.violations = std::move(w.violations);
  report.exact = report.violations.empty();
  report.search_lo = std::max(1, input_size - search_radius);
  report.search_hi = input_size + search_radius;
  report.suggested_sizes = suggest_input_sizes(layers, report.search_lo, report.search_hi);
  return report;
}

AnalysisReport analyze(std::span<const LayerSpec> layers, int height, int width, int search_radius) {
  if (height != width) {
    throw ShapeError("only square inputs are supported, got " + std::to_string(height) + "x" +
                     std::to_string(width));
  }
  return analyze(layers, height, search_radius);
}

}  // namespace gequi
