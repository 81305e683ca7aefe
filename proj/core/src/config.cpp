#include "pointseg/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>
#include <unordered_set>

#include "pointseg/errors.hpp"

namespace pointseg {

PoolMode pool_mode_from_name(const std::string& name) {
    if (name == "attentive") return PoolMode::attentive;
    if (name == "max") return PoolMode::max;
    if (name == "mean") return PoolMode::mean;
    if (name == "sum") return PoolMode::sum;
    throw ConfigError("unknown pooling mode '" + name +
                      "' (expected attentive, max, mean or sum)");
}

LocSEVariant locse_variant_from_name(const std::string& name) {
    for (LocSEVariant v : {LocSEVariant::center_only, LocSEVariant::neighbor_only,
                           LocSEVariant::center_neighbor, LocSEVariant::center_neighbor_dist,
                           LocSEVariant::center_neighbor_rel, LocSEVariant::full}) {
        if (name == locse_variant_name(v)) return v;
    }
    throw ConfigError("unknown spatial encoding variant '" + name + "'");
}

namespace {

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string join_sizes(const std::vector<std::size_t>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(values[i]);
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

[[noreturn]] void bad_line(std::size_t line_no, const std::string& what) {
    throw ConfigError("config line " + std::to_string(line_no) + ": " + what);
}

std::size_t parse_size(std::string_view v, std::size_t line_no, const std::string& key) {
    std::size_t out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) {
        bad_line(line_no, key + " expects a non-negative integer, got '" + std::string(v) + "'");
    }
    return out;
}

double parse_double(std::string_view v, std::size_t line_no, const std::string& key) {
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) {
        bad_line(line_no, key + " expects a number, got '" + std::string(v) + "'");
    }
    return out;
}

bool parse_bool(std::string_view v, std::size_t line_no, const std::string& key) {
    if (v == "true") return true;
    if (v == "false") return false;
    bad_line(line_no, key + " expects true or false, got '" + std::string(v) + "'");
}

std::vector<std::size_t> parse_size_list(std::string_view v, std::size_t line_no,
                                         const std::string& key) {
    std::vector<std::size_t> out;
    while (true) {
        const std::size_t comma = v.find(',');
        const std::string_view item = trim(v.substr(0, comma));
        if (item.empty()) bad_line(line_no, key + " has an empty list element");
        out.push_back(parse_size(item, line_no, key));
        if (comma == std::string_view::npos) break;
        v.remove_prefix(comma + 1);
    }
    return out;
}

}  // namespace

std::string serialize_config(const NetworkConfig& cfg) {
    std::ostringstream out;
    out << "d_in = " << cfg.d_in << '\n';
    out << "n_class = " << cfg.n_class << '\n';
    out << "input_width = " << cfg.input_width << '\n';
    out << "encoder_widths = " << join_sizes(cfg.encoder_widths) << '\n';
    out << "decimation = " << format_double(cfg.decimation) << '\n';
    out << "k = " << cfg.k << '\n';
    out << "units = " << cfg.units << '\n';
    out << "pooling = " << pool_mode_name(cfg.pooling) << '\n';
    out << "locse_variant = " << locse_variant_name(cfg.locse_variant) << '\n';
    out << "use_locse = " << (cfg.use_locse ? "true" : "false") << '\n';
    out << "leaky_slope = " << format_double(cfg.leaky_slope) << '\n';
    out << "head_widths = " << join_sizes(cfg.head_widths) << '\n';
    out << "dropout = " << format_double(cfg.dropout) << '\n';
    out << "seed = " << cfg.seed << '\n';
    return out.str();
}

NetworkConfig parse_config(const std::string& text) {
    NetworkConfig cfg;
    std::unordered_set<std::string> seen;
    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        const std::size_t hash = line.find('#');
        if (hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) bad_line(line_no, "expected 'key = value'");
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        if (key.empty()) bad_line(line_no, "missing key before '='");
        if (value.empty()) bad_line(line_no, "missing value for '" + key + "'");
        if (!seen.insert(key).second) bad_line(line_no, "repeated key '" + key + "'");

        if (key == "d_in") {
            cfg.d_in = parse_size(value, line_no, key);
        } else if (key == "n_class") {
            cfg.n_class = parse_size(value, line_no, key);
        } else if (key == "input_width") {
            cfg.input_width = parse_size(value, line_no, key);
        } else if (key == "encoder_widths") {
            cfg.encoder_widths = parse_size_list(value, line_no, key);
        } else if (key == "decimation") {
            cfg.decimation = parse_double(value, line_no, key);
        } else if (key == "k") {
            cfg.k = parse_size(value, line_no, key);
        } else if (key == "units") {
            cfg.units = parse_size(value, line_no, key);
        } else if (key == "pooling") {
            cfg.pooling = pool_mode_from_name(std::string(value));
        } else if (key == "locse_variant") {
            cfg.locse_variant = locse_variant_from_name(std::string(value));
        } else if (key == "use_locse") {
            cfg.use_locse = parse_bool(value, line_no, key);
        } else if (key == "leaky_slope") {
            cfg.leaky_slope = parse_double(value, line_no, key);
        } else if (key == "head_widths") {
            cfg.head_widths = parse_size_list(value, line_no, key);
        } else if (key == "dropout") {
            cfg.dropout = parse_double(value, line_no, key);
        } else if (key == "seed") {
            cfg.seed = parse_size(value, line_no, key);
        } else {
            bad_line(line_no, "unknown key '" + key + "'");
        }
    }
    cfg.validate();
    return cfg;
}

NetworkConfig read_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("failed reading config file " + path);
    return parse_config(buf.str());
}

void write_config_file(const NetworkConfig& cfg, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << serialize_config(cfg);
    out.flush();
    if (!out) throw IoError("failed writing config file " + path);
}

}  // namespace pointseg
