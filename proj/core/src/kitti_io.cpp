#include "pointseg/kitti_io.hpp"

#include <bit>
#include <fstream>

#include "pointseg/errors.hpp"

namespace pointseg {

namespace {

float read_f32_le(const std::byte* p) {
    std::uint32_t u = std::to_integer<std::uint32_t>(p[0]) |
                      std::to_integer<std::uint32_t>(p[1]) << 8 |
                      std::to_integer<std::uint32_t>(p[2]) << 16 |
                      std::to_integer<std::uint32_t>(p[3]) << 24;
    return std::bit_cast<float>(u);
}

void write_u32_le(std::uint32_t u, std::vector<std::byte>& out) {
    out.push_back(static_cast<std::byte>(u & 0xff));
    out.push_back(static_cast<std::byte>((u >> 8) & 0xff));
    out.push_back(static_cast<std::byte>((u >> 16) & 0xff));
    out.push_back(static_cast<std::byte>((u >> 24) & 0xff));
}

std::uint32_t read_u32_le(const std::byte* p) {
    return std::to_integer<std::uint32_t>(p[0]) |
           std::to_integer<std::uint32_t>(p[1]) << 8 |
           std::to_integer<std::uint32_t>(p[2]) << 16 |
           std::to_integer<std::uint32_t>(p[3]) << 24;
}

std::vector<std::byte> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw IoError("cannot open '" + path + "'");
    const auto size = static_cast<std::size_t>(in.tellg());
    std::vector<std::byte> bytes(size);
    in.seekg(0);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size));
    if (!in) throw IoError("short read from '" + path + "'");
    return bytes;
}

void write_file_bytes(std::span<const std::byte> bytes, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to '" + path + "'");
}

}  // namespace

PointCloud parse_kitti_bin(std::span<const std::byte> bytes) {
    if (bytes.size() % 16 != 0) {
        throw FormatError("scan length " + std::to_string(bytes.size()) +
                          " is not a multiple of 16");
    }
    const std::size_t n = bytes.size() / 16;
    PointCloud cloud;
    cloud.attr_width = 1;
    cloud.positions.resize(n * 3);
    cloud.attributes.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::byte* rec = bytes.data() + 16 * i;
        cloud.positions[3 * i + 0] = read_f32_le(rec);
        cloud.positions[3 * i + 1] = read_f32_le(rec + 4);
        cloud.positions[3 * i + 2] = read_f32_le(rec + 8);
        cloud.attributes[i] = read_f32_le(rec + 12);
    }
    return cloud;
}

std::vector<std::byte> write_kitti_bin(const PointCloud& cloud) {
    if (cloud.attr_width > 1) {
        throw FormatError("KITTI scans cannot carry RGB attributes");
    }
    const std::size_t n = cloud.size();
    std::vector<std::byte> out;
    out.reserve(n * 16);
    for (std::size_t i = 0; i < n; ++i) {
        for (int d = 0; d < 3; ++d) {
            const auto f = static_cast<float>(cloud.positions[3 * i + static_cast<std::size_t>(d)]);
            write_u32_le(std::bit_cast<std::uint32_t>(f), out);
        }
        const float intensity =
            cloud.attr_width == 1 ? static_cast<float>(cloud.attributes[i]) : 0.0f;
        write_u32_le(std::bit_cast<std::uint32_t>(intensity), out);
    }
    return out;
}

std::vector<std::int32_t> parse_kitti_labels(std::span<const std::byte> bytes) {
    if (bytes.size() % 4 != 0) {
        throw FormatError("label file length " + std::to_string(bytes.size()) +
                          " is not a multiple of 4");
    }
    const std::size_t n = bytes.size() / 4;
    std::vector<std::int32_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        labels[i] = static_cast<std::int32_t>(read_u32_le(bytes.data() + 4 * i) & 0xffffu);
    }
    return labels;
}

std::vector<std::byte> write_kitti_labels(std::span<const std::int32_t> labels) {
    std::vector<std::byte> out;
    out.reserve(labels.size() * 4);
    for (std::int32_t label : labels) {
        if (label < 0 || label > 0xffff) {
            throw DataError("label " + std::to_string(label) + " does not fit in 16 bits");
        }
        write_u32_le(static_cast<std::uint32_t>(label), out);
    }
    return out;
}

PointCloud read_kitti_bin_file(const std::string& path) {
    return parse_kitti_bin(read_file_bytes(path));
}

void write_kitti_bin_file(const PointCloud& cloud, const std::string& path) {
    write_file_bytes(write_kitti_bin(cloud), path);
}

std::vector<std::int32_t> read_kitti_label_file(const std::string& path) {
    return parse_kitti_labels(read_file_bytes(path));
}

void write_kitti_label_file(std::span<const std::int32_t> labels, const std::string& path) {
    write_file_bytes(write_kitti_labels(labels), path);
}

}  // namespace pointseg
