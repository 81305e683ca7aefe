#pragma once

#include <string>
#include <string_view>

#include "pointseg/cloud.hpp"

namespace pointseg {

// Parse an ASCII PLY document. The vertex element must carry float-like
// properties x, y, z; uchar red/green/blue (all three) become RGB attributes
// scaled to [0,1]. Unknown vertex properties and non-vertex elements are
// skipped. Binary PLY is rejected with FormatError; malformed headers raise
// ParseError with the offending line number; non-finite coordinates raise
// DataError naming the row.
PointCloud parse_ply(std::string_view text);

// ASCII PLY serialization of positions (and RGB attributes when attr_width
// is 3). Labels and intensity are not representable in this format.
std::string write_ply(const PointCloud& cloud);

PointCloud read_ply_file(const std::string& path);
void write_ply_file(const PointCloud& cloud, const std::string& path);

}  // namespace pointseg
