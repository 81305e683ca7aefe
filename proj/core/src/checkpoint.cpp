#include "pointseg/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "pointseg/errors.hpp"

namespace pointseg {

namespace {

constexpr char kMagic[8] = {'P', 'S', 'E', 'G', 'C', 'K', 'P', 'T'};
constexpr std::uint8_t kVersion = 1;

void append_u64(std::vector<std::byte>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xff));
}

void append_u32(std::vector<std::byte>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xff));
}

class Reader {
public:
    explicit Reader(std::span<const std::byte> bytes) : bytes_(bytes) {}

    std::span<const std::byte> take(std::size_t n) {
        if (n > bytes_.size() - pos_) throw FormatError("checkpoint: truncated payload");
        std::span<const std::byte> out = bytes_.subspan(pos_, n);
        pos_ += n;
        return out;
    }

    std::uint64_t u64() {
        auto b = take(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(std::to_integer<std::uint8_t>(b[i])) << (8 * i);
        return v;
    }

    std::uint32_t u32() {
        auto b = take(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(std::to_integer<std::uint8_t>(b[i])) << (8 * i);
        return v;
    }

    std::uint8_t u8() { return std::to_integer<std::uint8_t>(take(1)[0]); }

    std::string text(std::size_t n) {
        auto b = take(n);
        return std::string(reinterpret_cast<const char*>(b.data()), n);
    }

    bool done() const { return pos_ == bytes_.size(); }

private:
    std::span<const std::byte> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::byte> serialize_checkpoint(const std::string& config_text,
                                            const ParamStore& params) {
    std::vector<std::byte> out;
    out.reserve(64 + config_text.size() + params.value_count() * 8);
    for (char c : kMagic) out.push_back(static_cast<std::byte>(c));
    out.push_back(static_cast<std::byte>(kVersion));
    append_u32(out, static_cast<std::uint32_t>(config_text.size()));
    for (char c : config_text) out.push_back(static_cast<std::byte>(c));
    append_u64(out, params.count());
    for (const NamedParam& item : params.items()) {
        append_u32(out, static_cast<std::uint32_t>(item.name.size()));
        for (char c : item.name) out.push_back(static_cast<std::byte>(c));
        const auto& shape = item.tensor.shape();
        out.push_back(static_cast<std::byte>(shape.size()));
        for (std::size_t e : shape) append_u64(out, e);
        for (double v : item.tensor.values()) append_u64(out, std::bit_cast<std::uint64_t>(v));
    }
    return out;
}

Checkpoint parse_checkpoint(std::span<const std::byte> bytes) {
    Reader r(bytes);
    const std::string magic = r.text(8);
    if (std::memcmp(magic.data(), kMagic, 8) != 0) {
        throw FormatError("checkpoint: bad magic string");
    }
    const std::uint8_t version = r.u8();
    if (version != kVersion) {
        throw FormatError("checkpoint: unsupported version " + std::to_string(version));
    }

    Checkpoint ckpt;
    ckpt.config_text = r.text(r.u32());
    const std::uint64_t count = r.u64();
    ckpt.entries.reserve(count);
    for (std::uint64_t p = 0; p < count; ++p) {
        CheckpointEntry entry;
        entry.name = r.text(r.u32());
        const std::uint8_t rank = r.u8();
        std::size_t n = 1;
        for (std::uint8_t d = 0; d < rank; ++d) {
            entry.shape.push_back(static_cast<std::size_t>(r.u64()));
            n *= entry.shape.back();
        }
        entry.values.resize(n);
        for (std::size_t i = 0; i < n; ++i) entry.values[i] = std::bit_cast<double>(r.u64());
        ckpt.entries.push_back(std::move(entry));
    }
    if (!r.done()) throw FormatError("checkpoint: trailing bytes after the last parameter");
    return ckpt;
}

void load_into(const Checkpoint& checkpoint, ParamStore& params) {
    if (checkpoint.entries.size() != params.count()) {
        throw DataError("checkpoint holds " + std::to_string(checkpoint.entries.size()) +
                        " parameters but the network has " + std::to_string(params.count()));
    }
    for (const CheckpointEntry& entry : checkpoint.entries) {
        const NamedParam* item = params.find(entry.name);
        if (!item) throw DataError("checkpoint parameter " + entry.name + " unknown to the network");
        Tensor t = item->tensor;
        if (entry.shape != t.shape()) {
            throw DataError("checkpoint parameter " + entry.name + " has a mismatched shape");
        }
        auto dst = t.values_mut();
        std::copy(entry.values.begin(), entry.values.end(), dst.begin());
    }
}

void write_checkpoint_file(const std::string& path, const std::string& config_text,
                           const ParamStore& params) {
    const std::vector<std::byte> bytes = serialize_checkpoint(config_text, params);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + path);
}

Checkpoint read_checkpoint_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw IoError("cannot open " + path);
    const std::streamsize size = in.tellg();
    in.seekg(0);
    std::vector<std::byte> bytes(static_cast<std::size_t>(size));
    in.read(reinterpret_cast<char*>(bytes.data()), size);
    if (!in) throw IoError("short read from " + path);
    return parse_checkpoint(bytes);
}

}  // namespace pointseg
