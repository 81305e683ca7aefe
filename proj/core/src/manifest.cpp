#include "pointseg/manifest.hpp"

#include <ctime>
#include <fstream>

#include <json.hpp>

#include "pointseg/errors.hpp"

namespace pointseg {

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string manifest_json(const RunManifest& manifest) {
    nlohmann::ordered_json j;
    j["command"] = manifest.command;
    j["arguments"] = manifest.arguments;
    j["tool"] = manifest.tool;
    j["version"] = manifest.version;
    j["started_at"] = manifest.started_at;
    j["finished_at"] = manifest.finished_at;
    j["seed"] = manifest.seed;
    j["config"] = manifest.config_text;
    j["outputs"] = manifest.outputs;
    j["extra"] = manifest.extra;
    return j.dump(2) + "\n";
}

void write_manifest(const RunManifest& manifest, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << manifest_json(manifest);
    out.flush();
    if (!out) throw IoError("failed writing manifest " + path);
}

}  // namespace pointseg
