#pragma once

#include <string>

#include "pointseg/network.hpp"

namespace pointseg {

// Inverses of pool_mode_name / locse_variant_name. Throw ConfigError on an
// unknown name.
PoolMode pool_mode_from_name(const std::string& name);
LocSEVariant locse_variant_from_name(const std::string& name);

// Flat `key = value` text, one pair per line, '#' starting a comment; list
// values are comma separated. serialize_config emits every field with
// round-trip precision, so parse_config(serialize_config(cfg)) == cfg.
std::string serialize_config(const NetworkConfig& cfg);

// Fills a NetworkConfig starting from the defaults. Unknown keys, malformed
// values and repeated keys throw ConfigError naming the offending line; the
// result passes NetworkConfig::validate() before being returned.
NetworkConfig parse_config(const std::string& text);

// File wrappers. Unreadable or unwritable paths throw IoError.
NetworkConfig read_config_file(const std::string& path);
void write_config_file(const NetworkConfig& cfg, const std::string& path);

}  // namespace pointseg
