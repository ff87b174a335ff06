#pragma once

#include <filesystem>
#include <string_view>

#include <json.hpp>

#include "zpdes/activity_space.hpp"

namespace zpdes {

using Json = nlohmann::json;

/// Parses the `groups` / `primary_group` part of a space config. Other
/// top-level keys (e.g. `zpd`) are ignored here. Throws ConfigError on
/// schema errors; structural checks are left to validate_space.
ActivitySpace parse_space(const Json& config);
Json serialize_space(const ActivitySpace& space);

/// Reads a JSON file; throws ConfigError with the path on failure.
Json read_json_file(const std::filesystem::path& path);

/// Resolves "builtin:<file>" against the embedded data, anything else as a path.
Json load_json_source(std::string_view source);

namespace data {
/// Contents of a file shipped under data/, compiled in.
std::string_view embedded(std::string_view name);
}

} // namespace zpdes
