#pragma once

#include <stdexcept>
#include <string>

namespace gequi {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class PatchError : public Error {
 public:
  using Error::Error;
};

// Raised when an operation is asked for a group it has no meaning on,
// e.g. a group-axis permutation for the trivial group.
class UnsupportedKindError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Wraps an error raised while evaluating or analyzing a specific layer.
class LayerError : public Error {
 public:
  LayerError(int layer_index, const std::string& what)
      : Error("layer " + std::to_string(layer_index) + ": " + what), layer_index_(layer_index) {}

  int layer_index() const { return layer_index_; }

 private:
  int layer_index_;
};

}  // namespace gequi
