#include <doctest.h>

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "pointseg/checkpoint.hpp"
#include "pointseg/errors.hpp"
#include "pointseg/nn.hpp"
#include "pointseg/rng.hpp"

#include "oracles.hpp"

using namespace pointseg;

namespace {

ParamStore sample_store(std::uint64_t seed) {
    ParamStore store;
    Rng rng(seed);
    store.add_mlp("input", 3, 8, rng);
    store.add_mlp("head", 8, 4, rng);
    store.add("scale", Tensor::parameter({0.125, -7.5}, {2}));
    return store;
}

}  // namespace

TEST_SUITE_BEGIN("checkpoint");

TEST_CASE("serialize and parse round trip bit-exactly") {
    const ParamStore store = sample_store(42);
    const std::string config = "d_in = 3\nseed = 42\n";
    const std::vector<std::byte> bytes = serialize_checkpoint(config, store);
    const Checkpoint cp = parse_checkpoint(bytes);

    CHECK(cp.config_text == config);
    REQUIRE(cp.entries.size() == store.count());
    for (std::size_t i = 0; i < cp.entries.size(); ++i) {
        const CheckpointEntry& e = cp.entries[i];
        const NamedParam& p = store.items()[i];
        CHECK(e.name == p.name);
        CHECK(e.shape == p.tensor.shape());
        REQUIRE(e.values.size() == p.tensor.size());
        for (std::size_t j = 0; j < e.values.size(); ++j) {
            CHECK(e.values[j] == p.tensor.values()[j]);
        }
    }
}

TEST_CASE("serialization is deterministic") {
    const ParamStore store = sample_store(42);
    CHECK(serialize_checkpoint("x = 1\n", store) == serialize_checkpoint("x = 1\n", store));
}

TEST_CASE("corrupted payloads are rejected") {
    const ParamStore store = sample_store(7);
    std::vector<std::byte> bytes = serialize_checkpoint("k = 16\n", store);

    SUBCASE("bad magic") {
        bytes[0] = std::byte{0x00};
        CHECK_THROWS_AS(parse_checkpoint(bytes), FormatError);
    }
    SUBCASE("unsupported version") {
        // The version byte immediately follows the 8-byte magic.
        REQUIRE(bytes[8] == std::byte{1});
        bytes[8] = std::byte{99};
        CHECK_THROWS_AS(parse_checkpoint(bytes), FormatError);
    }
    SUBCASE("truncation anywhere is fatal") {
        for (std::size_t keep : {bytes.size() - 1, bytes.size() / 2, std::size_t{3}}) {
            CHECK_THROWS_AS(
                parse_checkpoint(std::span<const std::byte>(bytes.data(), keep)), FormatError);
        }
    }
    SUBCASE("trailing bytes are fatal") {
        bytes.push_back(std::byte{0});
        CHECK_THROWS_AS(parse_checkpoint(bytes), FormatError);
    }
    SUBCASE("empty input") {
        CHECK_THROWS_AS(parse_checkpoint(std::span<const std::byte>()), FormatError);
    }
}

TEST_CASE("load_into restores values and verifies structure") {
    const ParamStore saved = sample_store(100);
    const std::vector<std::byte> bytes = serialize_checkpoint("", saved);
    const Checkpoint cp = parse_checkpoint(bytes);

    SUBCASE("values land in a same-shaped store") {
        ParamStore fresh = sample_store(999);
        load_into(cp, fresh);
        for (std::size_t i = 0; i < fresh.count(); ++i) {
            for (std::size_t j = 0; j < fresh.items()[i].tensor.size(); ++j) {
                CHECK(fresh.items()[i].tensor.values()[j] == saved.items()[i].tensor.values()[j]);
            }
        }
    }
    SUBCASE("missing parameter") {
        ParamStore fresh;
        Rng rng(1);
        fresh.add_mlp("input", 3, 8, rng);
        CHECK_THROWS_AS(load_into(cp, fresh), DataError);
    }
    SUBCASE("name mismatch") {
        ParamStore fresh;
        Rng rng(1);
        fresh.add_mlp("other", 3, 8, rng);
        fresh.add_mlp("head", 8, 4, rng);
        fresh.add("scale", Tensor::parameter({0.0, 0.0}, {2}));
        CHECK_THROWS_AS(load_into(cp, fresh), DataError);
    }
    SUBCASE("shape mismatch") {
        ParamStore fresh;
        Rng rng(1);
        fresh.add_mlp("input", 3, 8, rng);
        fresh.add_mlp("head", 8, 4, rng);
        fresh.add("scale", Tensor::parameter({0.0, 0.0, 0.0}, {3}));
        CHECK_THROWS_AS(load_into(cp, fresh), DataError);
    }
}

TEST_CASE("file round trip") {
    namespace fs = std::filesystem;
    const fs::path path = fs::temp_directory_path() / "pointseg_test_checkpoint.bin";
    const ParamStore store = sample_store(5);
    write_checkpoint_file(path.string(), "units = 2\n", store);
    const Checkpoint cp = read_checkpoint_file(path.string());
    CHECK(cp.config_text == "units = 2\n");
    CHECK(cp.entries.size() == store.count());
    CHECK(cp.entries[0].values[0] == store.items()[0].tensor.values()[0]);
    fs::remove(path);

    CHECK_THROWS_AS(read_checkpoint_file("/nonexistent/dir/x.ckpt"), IoError);
}

TEST_SUITE_END();
