#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "pointseg/cloud.hpp"
#include "pointseg/errors.hpp"
#include "pointseg/kitti_io.hpp"
#include "pointseg/ply_io.hpp"

using namespace pointseg;

TEST_SUITE_BEGIN("io");

TEST_CASE("single vertex ply") {
    const std::string text =
        "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\n"
        "property float z\nend_header\n0 0 0\n";
    const PointCloud cloud = parse_ply(text);
    CHECK(cloud.size() == 1);
    CHECK(cloud.positions == std::vector<double>{0, 0, 0});
    CHECK(cloud.attr_width == 0);
}

TEST_CASE("8-bit color maps onto the unit interval") {
    const std::string text =
        "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\n"
        "property float z\nproperty uchar red\nproperty uchar green\nproperty uchar blue\n"
        "end_header\n1 2 3 255 0 0\n";
    const PointCloud cloud = parse_ply(text);
    CHECK(cloud.attr_width == 3);
    CHECK(cloud.attributes == std::vector<double>{1.0, 0.0, 0.0});
}

TEST_CASE("unknown vertex properties are skipped") {
    const std::string text =
        "ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\n"
        "property float z\nproperty float curvature\nend_header\n1 2 3 9\n4 5 6 9\n";
    const PointCloud cloud = parse_ply(text);
    CHECK(cloud.size() == 2);
    CHECK(cloud.positions == std::vector<double>{1, 2, 3, 4, 5, 6});
}

TEST_CASE("ply error cases") {
    CHECK_THROWS_AS(parse_ply("ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\n"
                              "property float y\nproperty float z\nend_header\n0 0 0\n1 1 1\n"),
                    ParseError);
    CHECK_THROWS_AS(parse_ply("ply\nformat binary_little_endian 1.0\nelement vertex 0\n"
                              "end_header\n"),
                    FormatError);
    CHECK_THROWS_AS(parse_ply("not a ply\n"), ParseError);
    CHECK_THROWS_AS(parse_ply("ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\n"
                              "property float y\nproperty float z\nend_header\n0 nan 0\n"),
                    DataError);
}

TEST_CASE("ply round trip within documented tolerances") {
    SceneSpec spec;
    spec.n_points = 128;
    spec.n_class = 3;
    PointCloud cloud = generate_scene(spec);
    cloud.labels.reset();
    cloud.attributes.assign(cloud.size() * 3, 0.0);
    cloud.attr_width = 3;
    for (std::size_t i = 0; i < cloud.attributes.size(); ++i) {
        cloud.attributes[i] = static_cast<double>(i % 256) / 255.0;
    }

    const PointCloud back = parse_ply(write_ply(cloud));
    REQUIRE(back.size() == cloud.size());
    REQUIRE(back.attr_width == 3);
    for (std::size_t i = 0; i < cloud.positions.size(); ++i) {
        CHECK(std::abs(back.positions[i] - cloud.positions[i]) <= 1e-6);
    }
    for (std::size_t i = 0; i < cloud.attributes.size(); ++i) {
        CHECK(std::abs(back.attributes[i] - cloud.attributes[i]) <= 1.0 / 255.0);
    }
}

namespace {

std::vector<std::byte> pack_floats(const std::vector<float>& values) {
    std::vector<std::byte> bytes(values.size() * 4);
    std::memcpy(bytes.data(), values.data(), bytes.size());
    return bytes;
}

}  // namespace

TEST_CASE("kitti record decode") {
    const std::vector<std::byte> bytes = pack_floats({1.0f, 2.0f, 3.0f, 0.5f});
    const PointCloud cloud = parse_kitti_bin(bytes);
    CHECK(cloud.size() == 1);
    CHECK(cloud.positions == std::vector<double>{1, 2, 3});
    CHECK(cloud.attr_width == 1);
    CHECK(cloud.attributes == std::vector<double>{0.5});
}

TEST_CASE("kitti empty and malformed inputs") {
    const PointCloud empty = parse_kitti_bin({});
    CHECK(empty.size() == 0);
    std::vector<std::byte> bad(17);
    CHECK_THROWS_AS(parse_kitti_bin(bad), FormatError);
}

TEST_CASE("kitti scan round trip is bit exact") {
    const std::vector<float> raw = {1.5f,   -2.25f, 3.75f, 0.125f, -0.0f, 100.5f,
                                    -7.25f, 1.0f,   0.25f, 0.5f,   0.75f, 0.875f};
    const std::vector<std::byte> bytes = pack_floats(raw);
    const PointCloud cloud = parse_kitti_bin(bytes);
    const std::vector<std::byte> again = write_kitti_bin(cloud);
    CHECK(bytes == again);
}

TEST_CASE("kitti labels use the low 16 bits") {
    // 0x00030001: instance id 3 in the high half, class 1 in the low half.
    const std::vector<std::byte> bytes = {std::byte{0x01}, std::byte{0x00}, std::byte{0x03},
                                          std::byte{0x00}};
    const std::vector<std::int32_t> labels = parse_kitti_labels(bytes);
    REQUIRE(labels.size() == 1);
    CHECK(labels[0] == 1);

    const std::vector<std::int32_t> plain = {0, 7, 65535};
    CHECK(parse_kitti_labels(write_kitti_labels(plain)) == plain);
}

TEST_SUITE_END();
