#include "gequi/config.hpp"

#include <openssl/evp.h>

#include <array>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "gequi/errors.hpp"

namespace gequi {

using nlohmann::json;

namespace {

int read_int(const json& obj, const std::string& key, const std::string& path, int fallback, int minimum) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(path + "." + key + ": expected an integer");
  const auto value = v.get<long long>();
  if (value < minimum || value > 1'000'000) {
    throw ConfigError(path + "." + key + ": value " + std::to_string(value) + " out of range (minimum " +
                      std::to_string(minimum) + ")");
  }
  return static_cast<int>(value);
}

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed, const std::string& path) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) throw ConfigError(path + ": unknown field '" + key + "'");
  }
}

LayerSpec layer_from_json(const json& obj, const std::string& path) {
  if (!obj.is_object()) throw ConfigError(path + ": expected an object");
  reject_unknown_keys(obj, {"kind", "k", "s", "p", "out_channels"}, path);
  if (!obj.contains("kind") || !obj.at("kind").is_string()) throw ConfigError(path + ".kind: missing or not a string");
  LayerSpec layer;
  try {
    layer.kind = parse_layer_kind(obj.at("kind").get<std::string>());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ".kind: " + e.what());
  }
  // Fields that do not apply to the kind keep their defaults so the form is canonical.
  if (has_spatial_kernel(layer.kind)) {
    if (!obj.contains("k")) throw ConfigError(path + ".k: required for " + std::string(to_string(layer.kind)));
    layer.k = read_int(obj, "k", path, 1, 1);
    layer.s = read_int(obj, "s", path, 1, 1);
    layer.p = read_int(obj, "p", path, 0, 0);
  }
  if (has_weights(layer.kind)) {
    if (!obj.contains("out_channels")) {
      throw ConfigError(path + ".out_channels: required for " + std::string(to_string(layer.kind)));
    }
    layer.out_channels = read_int(obj, "out_channels", path, 0, 1);
  }
  return layer;
}

json layer_to_json(const LayerSpec& layer) {
  json obj = {{"kind", std::string(to_string(layer.kind))}};
  if (has_spatial_kernel(layer.kind)) {
    obj["k"] = layer.k;
    obj["s"] = layer.s;
    obj["p"] = layer.p;
  }
  if (has_weights(layer.kind)) obj["out_channels"] = layer.out_channels;
  return obj;
}

LayerSpec conv(LayerKind kind, int k, int s, int p, int out_channels) { return {kind, k, s, p, out_channels}; }
LayerSpec plain(LayerKind kind) { return {kind, 1, 1, 0, 0}; }

// Six 3x3 convolutions with a stride-2 max pool after the second, then a 4x4 convolution.
// The 4x4 layer is padded by 1 so that inputs 27 and 29 still reach it with side >= 4.
std::vector<LayerSpec> mnist_trunk(LayerKind first, LayerKind rest, int channels, bool relu_last) {
  std::vector<LayerSpec> layers;
  layers.push_back(conv(first, 3, 1, 0, channels));
  layers.push_back(plain(LayerKind::ReLU));
  layers.push_back(conv(rest, 3, 1, 0, channels));
  layers.push_back(plain(LayerKind::ReLU));
  layers.push_back(conv(LayerKind::MaxPool, 2, 2, 0, 0));
  for (int i = 0; i < 4; ++i) {
    layers.push_back(conv(rest, 3, 1, 0, channels));
    layers.push_back(plain(LayerKind::ReLU));
  }
  layers.push_back(conv(rest, 4, 1, 1, channels));
  if (relu_last) layers.push_back(plain(LayerKind::ReLU));
  return layers;
}

std::vector<Builtin> make_builtins() {
  std::vector<Builtin> out;

  ArchitectureSpec toy{"toy41", GroupKind::P4, 33, 1, {}};
  toy.layers = {conv(LayerKind::GConvLift, 3, 2, 1, 1), plain(LayerKind::GlobalAvgPool),
                plain(LayerKind::CosetMaxPool), conv(LayerKind::Dense, 1, 1, 0, 2)};
  out.push_back({toy, "single p4 lifting conv (k=3, s=2, p=1), global average pool, coset max pool, "
                      "dense(2); exact at odd inputs such as 33, approximate at 32"});

  ArchitectureSpec p4cnn{"p4cnn", GroupKind::P4, 28, 1, {}};
  p4cnn.layers = mnist_trunk(LayerKind::GConvLift, LayerKind::GConv, 10, false);
  p4cnn.layers.push_back(plain(LayerKind::GlobalAvgPool));
  p4cnn.layers.push_back(plain(LayerKind::CosetMaxPool));
  p4cnn.layers.push_back(conv(LayerKind::Dense, 1, 1, 0, 10));
  out.push_back({p4cnn, "p4 rotated-MNIST network, 10 channels per layer; exact at 28, approximate at 27 and 29"});

  ArchitectureSpec z2cnn{"z2cnn", GroupKind::Z2, 28, 1, {}};
  z2cnn.layers = mnist_trunk(LayerKind::Conv2d, LayerKind::Conv2d, 20, false);
  z2cnn.layers.push_back(plain(LayerKind::GlobalAvgPool));
  z2cnn.layers.push_back(conv(LayerKind::Dense, 1, 1, 0, 10));
  out.push_back({z2cnn, "plain CNN baseline with the same trunk, 20 channels per layer"});

  ArchitectureSpec fig1{"fig1-maxpool", GroupKind::Z2, 5, 1, {conv(LayerKind::MaxPool, 2, 2, 0, 0)}};
  out.push_back({fig1, "single 2x2 stride-2 max pool on a 5x5 input; not rotation equivariant"});
  return out;
}

}  // namespace

ArchitectureSpec config_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");
  reject_unknown_keys(doc, {"schema_version", "name", "group", "input_size", "input_channels", "layers"}, "config");
  const int version = read_int(doc, "schema_version", "config", kConfigSchemaVersion, 1);
  if (version != kConfigSchemaVersion) {
    throw ConfigError("config.schema_version: unsupported version " + std::to_string(version));
  }
  ArchitectureSpec arch;
  if (doc.contains("name")) {
    if (!doc.at("name").is_string()) throw ConfigError("config.name: expected a string");
    arch.name = doc.at("name").get<std::string>();
  }
  if (!doc.contains("group") || !doc.at("group").is_string()) throw ConfigError("config.group: missing or not a string");
  try {
    arch.group = parse_group_kind(doc.at("group").get<std::string>());
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("config.group: ") + e.what());
  }
  if (!doc.contains("input_size")) throw ConfigError("config.input_size: missing");
  const json& size = doc.at("input_size");
  if (size.is_array()) {
    if (size.size() != 2 || !size[0].is_number_integer() || !size[1].is_number_integer()) {
      throw ConfigError("config.input_size: expected an integer or [height, width]");
    }
    if (size[0].get<long long>() != size[1].get<long long>()) {
      throw ConfigError("config.input_size: rectangular inputs are not supported");
    }
    arch.input_size = read_int(json{{"input_size", size[0]}}, "input_size", "config", 0, 1);
  } else {
    arch.input_size = read_int(doc, "input_size", "config", 0, 1);
  }
  arch.input_channels = read_int(doc, "input_channels", "config", 1, 1);
  if (!doc.contains("layers") || !doc.at("layers").is_array()) throw ConfigError("config.layers: missing or not a list");
  const json& layers = doc.at("layers");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    arch.layers.push_back(layer_from_json(layers[i], "layers[" + std::to_string(i) + "]"));
  }
  return arch;
}

ArchitectureSpec parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return config_from_json(doc);
}

ArchitectureSpec load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    ArchitectureSpec arch = parse_config(buffer.str());
    if (arch.name.empty()) arch.name = std::filesystem::path(path).stem().string();
    return arch;
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

json config_to_json(const ArchitectureSpec& arch) {
  json layers = json::array();
  for (const LayerSpec& layer : arch.layers) layers.push_back(layer_to_json(layer));
  return {{"schema_version", kConfigSchemaVersion},
          {"name", arch.name},
          {"group", std::string(to_string(arch.group))},
          {"input_size", arch.input_size},
          {"input_channels", arch.input_channels},
          {"layers", layers}};
}

std::string serialize_config(const ArchitectureSpec& arch) { return config_to_json(arch).dump(2); }

std::string config_digest(const ArchitectureSpec& arch) {
  const std::string text = config_to_json(arch).dump();
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error("config_digest: SHA-256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[md[i] >> 4];
    hex += kHex[md[i] & 0xf];
  }
  return hex;
}

const std::vector<Builtin>& builtins() {
  static const std::vector<Builtin> all = make_builtins();
  return all;
}

std::optional<ArchitectureSpec> find_builtin(std::string_view name) {
  for (const Builtin& b : builtins())
    if (b.arch.name == name) return b.arch;
  return std::nullopt;
}

}  // namespace gequi
