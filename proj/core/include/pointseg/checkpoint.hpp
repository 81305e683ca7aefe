#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pointseg/nn.hpp"

namespace pointseg {

// Self-describing parameter container: magic string, version byte, an
// embedded flat-text config snapshot, then per parameter its name, shape and
// raw little-endian 64-bit values. Round-trips are bit-exact.
struct CheckpointEntry {
    std::string name;
    std::vector<std::size_t> shape;
    std::vector<double> values;
};

struct Checkpoint {
    std::string config_text;
    std::vector<CheckpointEntry> entries;
};

std::vector<std::byte> serialize_checkpoint(const std::string& config_text,
                                            const ParamStore& params);

// Throws FormatError on bad magic, unsupported version, or truncation.
Checkpoint parse_checkpoint(std::span<const std::byte> bytes);

// Copies checkpoint values into an already-built store; the name sets and
// shapes must match exactly (throws DataError otherwise).
void load_into(const Checkpoint& checkpoint, ParamStore& params);

void write_checkpoint_file(const std::string& path, const std::string& config_text,
                           const ParamStore& params);
Checkpoint read_checkpoint_file(const std::string& path);

}  // namespace pointseg
