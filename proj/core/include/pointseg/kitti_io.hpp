#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pointseg/cloud.hpp"

namespace pointseg {

// KITTI scan: packed little-endian float32 records (x, y, z, intensity).
// Throws FormatError when the byte length is not a multiple of 16.
PointCloud parse_kitti_bin(std::span<const std::byte> bytes);

// Inverse of parse_kitti_bin; positions/intensity round-trip bit-exactly.
std::vector<std::byte> write_kitti_bin(const PointCloud& cloud);

// KITTI label file: packed little-endian uint32, one per point; the lower
// 16 bits carry the semantic class.
std::vector<std::int32_t> parse_kitti_labels(std::span<const std::byte> bytes);
std::vector<std::byte> write_kitti_labels(std::span<const std::int32_t> labels);

PointCloud read_kitti_bin_file(const std::string& path);
void write_kitti_bin_file(const PointCloud& cloud, const std::string& path);
std::vector<std::int32_t> read_kitti_label_file(const std::string& path);
void write_kitti_label_file(std::span<const std::int32_t> labels, const std::string& path);

}  // namespace pointseg
