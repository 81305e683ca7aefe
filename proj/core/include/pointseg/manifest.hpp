#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace pointseg {

inline constexpr const char* kToolName = "pointseg";
inline constexpr const char* kToolVersion = "0.1.0";

// Record of one CLI run, written as JSON next to the outputs so every
// artifact traces back to the invocation that produced it.
struct RunManifest {
    std::string command;
    std::vector<std::string> arguments;  // argv after the program name
    std::string tool = kToolName;
    std::string version = kToolVersion;
    std::string started_at;   // UTC, ISO 8601
    std::string finished_at;  // UTC, ISO 8601
    std::uint64_t seed = 0;
    std::string config_text;  // flat config snapshot; empty when the command takes none
    std::vector<std::string> outputs;  // every file the run wrote, manifest excluded
    std::map<std::string, std::string> extra;  // command-specific details
};

// Current time as e.g. 2026-08-13T14:05:09Z.
std::string utc_timestamp();

// Pretty-printed JSON with stable key order.
std::string manifest_json(const RunManifest& manifest);

// Serializes to `path`; throws IoError when the file cannot be written.
void write_manifest(const RunManifest& manifest, const std::string& path);

}  // namespace pointseg
