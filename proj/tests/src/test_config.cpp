#include <doctest.h>

#include <filesystem>
#include <string>
#include <vector>

#include "pointseg/config.hpp"
#include "pointseg/errors.hpp"

using namespace pointseg;

namespace {

bool same_config(const NetworkConfig& a, const NetworkConfig& b) {
    return a.d_in == b.d_in && a.n_class == b.n_class && a.input_width == b.input_width &&
           a.encoder_widths == b.encoder_widths && a.decimation == b.decimation && a.k == b.k &&
           a.units == b.units && a.pooling == b.pooling && a.locse_variant == b.locse_variant &&
           a.use_locse == b.use_locse && a.leaky_slope == b.leaky_slope &&
           a.head_widths == b.head_widths && a.dropout == b.dropout && a.seed == b.seed;
}

}  // namespace

TEST_SUITE_BEGIN("config");

TEST_CASE("serialize and parse round trip every field") {
    NetworkConfig cfg;
    cfg.d_in = 6;
    cfg.n_class = 13;
    cfg.input_width = 12;
    cfg.encoder_widths = {16, 64, 64};
    cfg.decimation = 0.2;
    cfg.k = 8;
    cfg.units = 3;
    cfg.pooling = PoolMode::mean;
    cfg.locse_variant = LocSEVariant::center_neighbor_dist;
    cfg.use_locse = true;
    cfg.leaky_slope = 0.1;
    cfg.head_widths = {48, 24, 12};
    cfg.dropout = 0.25;
    cfg.seed = 987654321;

    const NetworkConfig back = parse_config(serialize_config(cfg));
    CHECK(same_config(cfg, back));
    // Doubles are written with round-trip precision, so odd values survive.
    cfg.decimation = 0.30000000000000004;
    CHECK(parse_config(serialize_config(cfg)).decimation == 0.30000000000000004);
}

TEST_CASE("empty text yields the defaults") {
    const NetworkConfig cfg = parse_config("");
    const NetworkConfig defaults;
    CHECK(same_config(cfg, defaults));
}

TEST_CASE("comments whitespace and blank lines are tolerated") {
    const NetworkConfig cfg = parse_config(
        "# a full-line comment\n"
        "\n"
        "  n_class =  5   # trailing comment\n"
        "\tk\t=\t4\r\n"
        "pooling = max\n");
    CHECK(cfg.n_class == 5);
    CHECK(cfg.k == 4);
    CHECK(cfg.pooling == PoolMode::max);
}

TEST_CASE("malformed lines report their line number") {
    CHECK_THROWS_WITH_AS(parse_config("n_class = 4\nnosuch = 1\n"),
                         "config line 2: unknown key 'nosuch'", ConfigError);
    CHECK_THROWS_WITH_AS(parse_config("k = banana\n"),
                         "config line 1: k expects a non-negative integer, got 'banana'",
                         ConfigError);
    CHECK_THROWS_WITH_AS(parse_config("seed = 1\n\nseed = 2\n"),
                         "config line 3: repeated key 'seed'", ConfigError);
    CHECK_THROWS_AS(parse_config("just some words\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("= 3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("k =\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("encoder_widths = 16,,32\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("dropout = 0.5x\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("use_locse = yes\n"), ConfigError);
}

TEST_CASE("enum names round trip") {
    for (PoolMode m : {PoolMode::attentive, PoolMode::max, PoolMode::mean, PoolMode::sum}) {
        CHECK(pool_mode_from_name(pool_mode_name(m)) == m);
    }
    CHECK_THROWS_AS(pool_mode_from_name("average"), ConfigError);

    for (LocSEVariant v : {LocSEVariant::center_only, LocSEVariant::neighbor_only,
                           LocSEVariant::center_neighbor, LocSEVariant::center_neighbor_dist,
                           LocSEVariant::center_neighbor_rel, LocSEVariant::full}) {
        CHECK(locse_variant_from_name(locse_variant_name(v)) == v);
    }
    CHECK_THROWS_AS(locse_variant_from_name("everything"), ConfigError);
}

TEST_CASE("parsed configurations are validated") {
    CHECK_THROWS_AS(parse_config("n_class = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("d_in = 5\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("decimation = 1.5\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("units = 4\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("encoder_widths = 32,31\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("encoder_widths = 64,32\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("dropout = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("k = 0\n"), ConfigError);
}

TEST_CASE("config files round trip and missing files raise io errors") {
    namespace fs = std::filesystem;
    const fs::path path = fs::temp_directory_path() / "pointseg_test_config.cfg";
    NetworkConfig cfg;
    cfg.n_class = 7;
    cfg.encoder_widths = {16, 32};
    cfg.seed = 42;
    write_config_file(cfg, path.string());
    const NetworkConfig back = read_config_file(path.string());
    CHECK(same_config(cfg, back));
    fs::remove(path);

    CHECK_THROWS_AS(read_config_file("/nonexistent/dir/net.cfg"), IoError);
    CHECK_THROWS_AS(write_config_file(cfg, "/nonexistent/dir/net.cfg"), IoError);
}

TEST_SUITE_END();
