#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gequi/layers.hpp"

namespace gequi {

inline constexpr int kConfigSchemaVersion = 1;

/// Parses an architecture document. Errors carry the JSON line/column or the offending
/// field path (e.g. "layers[3].kind").
ArchitectureSpec parse_config(std::string_view text);
ArchitectureSpec load_config(const std::string& path);

nlohmann::json config_to_json(const ArchitectureSpec& arch);
ArchitectureSpec config_from_json(const nlohmann::json& doc);
std::string serialize_config(const ArchitectureSpec& arch);

/// SHA-256 of the compact serialized config, lowercase hex.
std::string config_digest(const ArchitectureSpec& arch);

struct Builtin {
  ArchitectureSpec arch;
  std::string description;
};

/// toy41, p4cnn, z2cnn, fig1-maxpool.
const std::vector<Builtin>& builtins();
std::optional<ArchitectureSpec> find_builtin(std::string_view name);

}  // namespace gequi
