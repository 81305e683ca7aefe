#include "pointseg/ply_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "pointseg/errors.hpp"

namespace pointseg {

namespace {

struct Property {
    std::string name;
    bool is_list = false;
};

struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<Property> properties;
};

class LineReader {
public:
    explicit LineReader(std::string_view text) : text_(text) {}

    // Returns false at end of input. Strips trailing '\r'.
    bool next(std::string_view& line) {
        if (pos_ >= text_.size()) return false;
        std::size_t end = text_.find('\n', pos_);
        if (end == std::string_view::npos) end = text_.size();
        line = text_.substr(pos_, end - pos_);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        pos_ = end + 1;
        ++line_no_;
        return true;
    }

    std::size_t line_no() const { return line_no_; }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_no_ = 0;
};

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

double parse_double(std::string_view token, std::size_t line_no) {
    double value = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec == std::errc::result_out_of_range) {
        // Out-of-range magnitudes saturate to +/-inf and are caught by the
        // finiteness check downstream.
        value = token.front() == '-' ? -HUGE_VAL : HUGE_VAL;
    } else if (ec != std::errc() || ptr != last) {
        throw ParseError("line " + std::to_string(line_no) + ": bad number '" +
                         std::string(token) + "'");
    }
    return value;
}

[[noreturn]] void header_error(std::size_t line_no, const std::string& what) {
    throw ParseError("line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

PointCloud parse_ply(std::string_view text) {
    LineReader reader(text);
    std::string_view line;

    if (!reader.next(line) || split_ws(line) != std::vector<std::string_view>{"ply"}) {
        header_error(reader.line_no(), "expected 'ply' magic");
    }

    std::vector<Element> elements;
    bool saw_format = false;
    bool in_header = true;
    while (in_header) {
        if (!reader.next(line)) header_error(reader.line_no(), "header ended before end_header");
        auto tokens = split_ws(line);
        if (tokens.empty() || tokens[0] == "comment" || tokens[0] == "obj_info") continue;
        if (tokens[0] == "format") {
            if (tokens.size() != 3) header_error(reader.line_no(), "malformed format line");
            if (tokens[1] != "ascii") {
                throw FormatError("binary PLY is not supported (format '" +
                                  std::string(tokens[1]) + "')");
            }
            if (tokens[2] != "1.0") header_error(reader.line_no(), "unsupported PLY version");
            saw_format = true;
        } else if (tokens[0] == "element") {
            if (tokens.size() != 3) header_error(reader.line_no(), "malformed element line");
            Element e;
            e.name = std::string(tokens[1]);
            std::size_t count = 0;
            auto [ptr, ec] = std::from_chars(tokens[2].data(), tokens[2].data() + tokens[2].size(), count);
            if (ec != std::errc() || ptr != tokens[2].data() + tokens[2].size()) {
                header_error(reader.line_no(), "bad element count");
            }
            e.count = count;
            elements.push_back(std::move(e));
        } else if (tokens[0] == "property") {
            if (elements.empty()) header_error(reader.line_no(), "property before any element");
            Property p;
            if (tokens.size() == 5 && tokens[1] == "list") {
                p.is_list = true;
                p.name = std::string(tokens[4]);
            } else if (tokens.size() == 3) {
                p.name = std::string(tokens[2]);
            } else {
                header_error(reader.line_no(), "malformed property line");
            }
            elements.back().properties.push_back(std::move(p));
        } else if (tokens[0] == "end_header") {
            in_header = false;
        } else {
            header_error(reader.line_no(), "unknown header keyword '" + std::string(tokens[0]) + "'");
        }
    }
    if (!saw_format) header_error(reader.line_no(), "missing format line");

    PointCloud cloud;
    bool saw_vertex = false;
    for (const Element& element : elements) {
        if (element.name != "vertex") {
            // Skip one line per row; list rows are single lines too.
            for (std::size_t r = 0; r < element.count; ++r) {
                if (!reader.next(line)) {
                    header_error(reader.line_no(), "element '" + element.name + "' ended early");
                }
            }
            continue;
        }
        saw_vertex = true;

        int col_x = -1, col_y = -1, col_z = -1;
        int col_r = -1, col_g = -1, col_b = -1;
        for (std::size_t c = 0; c < element.properties.size(); ++c) {
            const Property& p = element.properties[c];
            if (p.is_list) {
                throw ParseError("list property '" + p.name + "' on vertex element");
            }
            if (p.name == "x") col_x = static_cast<int>(c);
            if (p.name == "y") col_y = static_cast<int>(c);
            if (p.name == "z") col_z = static_cast<int>(c);
            if (p.name == "red") col_r = static_cast<int>(c);
            if (p.name == "green") col_g = static_cast<int>(c);
            if (p.name == "blue") col_b = static_cast<int>(c);
        }
        if (col_x < 0 || col_y < 0 || col_z < 0) {
            throw ParseError("vertex element lacks x/y/z properties");
        }
        const bool has_rgb = col_r >= 0 && col_g >= 0 && col_b >= 0;
        cloud.attr_width = has_rgb ? 3 : 0;
        cloud.positions.reserve(element.count * 3);
        cloud.attributes.reserve(element.count * cloud.attr_width);

        for (std::size_t r = 0; r < element.count; ++r) {
            if (!reader.next(line)) {
                throw ParseError("vertex element declares " + std::to_string(element.count) +
                                 " rows but input ended after " + std::to_string(r));
            }
            auto tokens = split_ws(line);
            if (tokens.size() != element.properties.size()) {
                throw ParseError("line " + std::to_string(reader.line_no()) + ": expected " +
                                 std::to_string(element.properties.size()) + " values, got " +
                                 std::to_string(tokens.size()));
            }
            const double x = parse_double(tokens[col_x], reader.line_no());
            const double y = parse_double(tokens[col_y], reader.line_no());
            const double z = parse_double(tokens[col_z], reader.line_no());
            if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) {
                throw DataError("non-finite coordinate at vertex row " + std::to_string(r));
            }
            cloud.positions.insert(cloud.positions.end(), {x, y, z});
            if (has_rgb) {
                for (int col : {col_r, col_g, col_b}) {
                    cloud.attributes.push_back(parse_double(tokens[col], reader.line_no()) / 255.0);
                }
            }
        }
    }
    if (!saw_vertex) throw ParseError("no vertex element in PLY header");
    return cloud;
}

std::string write_ply(const PointCloud& cloud) {
    const bool rgb = cloud.attr_width == 3;
    std::string out;
    out += "ply\nformat ascii 1.0\n";
    out += "element vertex " + std::to_string(cloud.size()) + "\n";
    out += "property float x\nproperty float y\nproperty float z\n";
    if (rgb) out += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    out += "end_header\n";

    char buf[128];
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const double* p = cloud.positions.data() + 3 * i;
        int len = std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g", p[0], p[1], p[2]);
        out.append(buf, static_cast<std::size_t>(len));
        if (rgb) {
            for (int c = 0; c < 3; ++c) {
                double v = cloud.attributes[3 * i + static_cast<std::size_t>(c)];
                int byte = static_cast<int>(std::lround(v * 255.0));
                byte = std::clamp(byte, 0, 255);
                len = std::snprintf(buf, sizeof(buf), " %d", byte);
                out.append(buf, static_cast<std::size_t>(len));
            }
        }
        out += '\n';
    }
    return out;
}

PointCloud read_ply_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_ply(ss.str());
}

void write_ply_file(const PointCloud& cloud, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << write_ply(cloud);
    if (!out) throw IoError("short write to '" + path + "'");
}

}  // namespace pointseg
