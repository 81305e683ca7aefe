#include "pointseg/cloud.hpp"

#include <algorithm>
#include <cmath>

#include "pointseg/errors.hpp"
#include "pointseg/rng.hpp"

namespace pointseg {

void PointCloud::validate(std::optional<std::int32_t> n_class) const {
    if (positions.size() % 3 != 0) {
        throw DataError("positions buffer length is not a multiple of 3");
    }
    const std::size_t n = size();
    for (std::size_t i = 0; i < positions.size(); ++i) {
        if (!std::isfinite(positions[i])) {
            throw DataError("non-finite coordinate at point " + std::to_string(i / 3));
        }
    }
    if (attr_width != 0 && attr_width != 1 && attr_width != 3) {
        throw DataError("attribute width must be 0, 1 or 3");
    }
    if (attributes.size() != attr_width * n) {
        throw DataError("attribute rows do not match point count");
    }
    if (labels) {
        if (labels->size() != n) {
            throw DataError("label rows do not match point count");
        }
        if (n_class) {
            for (std::size_t i = 0; i < n; ++i) {
                if ((*labels)[i] < 0 || (*labels)[i] >= *n_class) {
                    throw DataError("label out of range at point " + std::to_string(i));
                }
            }
        }
    }
}

PointCloud PointCloud::select(std::span<const std::uint32_t> rows) const {
    PointCloud out;
    out.attr_width = attr_width;
    out.positions.reserve(rows.size() * 3);
    out.attributes.reserve(rows.size() * attr_width);
    if (labels) out.labels.emplace();
    for (std::uint32_t r : rows) {
        if (r >= size()) throw IndexError("row " + std::to_string(r) + " out of range");
        out.positions.insert(out.positions.end(), positions.begin() + 3 * r,
                             positions.begin() + 3 * r + 3);
        out.attributes.insert(out.attributes.end(), attributes.begin() + attr_width * r,
                              attributes.begin() + attr_width * (r + 1));
        if (labels) out.labels->push_back((*labels)[r]);
    }
    return out;
}

const char* primitive_kind_name(PrimitiveKind kind) {
    switch (kind) {
        case PrimitiveKind::plane: return "plane";
        case PrimitiveKind::sphere: return "sphere";
        case PrimitiveKind::cylinder: return "cylinder";
        case PrimitiveKind::clutter: return "clutter";
    }
    return "unknown";
}

std::vector<Primitive> default_shape_mix(std::int32_t n_class, double extent) {
    std::vector<Primitive> mix;
    mix.reserve(static_cast<std::size_t>(n_class));
    for (std::int32_t c = 0; c < n_class; ++c) {
        Primitive p;
        // Repeated kinds are offset so classes stay geometrically distinct.
        const int lap = c / 4;
        const double shift = 0.18 * extent * lap;
        switch (c % 4) {
            case 0:
                p.kind = PrimitiveKind::plane;
                p.center = {0.0, 0.0, -0.25 * extent + shift};
                break;
            case 1:
                p.kind = PrimitiveKind::sphere;
                p.center = {-shift, shift, 0.1 * extent};
                p.radius = 0.22 * extent;
                break;
            case 2:
                p.kind = PrimitiveKind::cylinder;
                p.center = {0.28 * extent - shift, 0.28 * extent, 0.0};
                p.radius = 0.15 * extent;
                break;
            case 3:
                p.kind = PrimitiveKind::clutter;
                break;
        }
        mix.push_back(p);
    }
    return mix;
}

namespace {

void emit_point(PrimitiveKind kind, const Primitive& prim, double extent, Rng& rng,
                double* out) {
    const double half = 0.5 * extent;
    switch (kind) {
        case PrimitiveKind::plane:
            out[0] = rng.uniform(-half, half);
            out[1] = rng.uniform(-half, half);
            out[2] = prim.center[2];
            break;
        case PrimitiveKind::sphere: {
            double x = rng.gaussian(), y = rng.gaussian(), z = rng.gaussian();
            double norm = std::sqrt(x * x + y * y + z * z);
            if (norm < 1e-12) norm = 1.0;
            out[0] = prim.center[0] + prim.radius * x / norm;
            out[1] = prim.center[1] + prim.radius * y / norm;
            out[2] = prim.center[2] + prim.radius * z / norm;
            break;
        }
        case PrimitiveKind::cylinder: {
            double theta = rng.uniform(0.0, 2.0 * M_PI);
            out[0] = prim.center[0] + prim.radius * std::cos(theta);
            out[1] = prim.center[1] + prim.radius * std::sin(theta);
            out[2] = rng.uniform(-half, half);
            break;
        }
        case PrimitiveKind::clutter:
            out[0] = rng.uniform(-half, half);
            out[1] = rng.uniform(-half, half);
            out[2] = rng.uniform(-half, half);
            break;
    }
}

}  // namespace

PointCloud generate_scene(const SceneSpec& spec) {
    if (spec.n_class < 2) throw ConfigError("scene needs at least 2 classes");
    if (spec.n_points < static_cast<std::size_t>(spec.n_class)) {
        throw ConfigError("scene needs at least one point per class");
    }
    if (spec.noise_sigma < 0.0) throw ConfigError("noise_sigma must be non-negative");
    if (!(spec.extent > 0.0)) throw ConfigError("extent must be positive");

    std::vector<Primitive> mix = spec.shape_mix;
    if (mix.empty()) {
        mix = default_shape_mix(spec.n_class, spec.extent);
    } else if (mix.size() != static_cast<std::size_t>(spec.n_class)) {
        throw ConfigError("shape_mix must list one primitive per class");
    }

    const auto n_class = static_cast<std::size_t>(spec.n_class);
    const std::size_t base = spec.n_points / n_class;
    const std::size_t rem = spec.n_points % n_class;

    Rng rng(derive_seed(spec.seed, 0x5ce7e));
    PointCloud cloud;
    cloud.positions.resize(spec.n_points * 3);
    cloud.labels.emplace(spec.n_points);

    std::size_t row = 0;
    for (std::size_t c = 0; c < n_class; ++c) {
        const std::size_t count = base + (c < rem ? 1 : 0);
        for (std::size_t i = 0; i < count; ++i, ++row) {
            emit_point(mix[c].kind, mix[c], spec.extent, rng, &cloud.positions[3 * row]);
            (*cloud.labels)[row] = static_cast<std::int32_t>(c);
        }
    }

    if (spec.noise_sigma > 0.0) {
        for (double& v : cloud.positions) v += rng.gaussian(0.0, spec.noise_sigma);
    }

    // Fisher-Yates so clouds are not label-sorted.
    for (std::size_t i = spec.n_points; i > 1; --i) {
        const std::size_t j = rng.below(i);
        for (int d = 0; d < 3; ++d) {
            std::swap(cloud.positions[3 * (i - 1) + d], cloud.positions[3 * j + d]);
        }
        std::swap((*cloud.labels)[i - 1], (*cloud.labels)[j]);
    }
    return cloud;
}

PointCloud uniform_crop(const PointCloud& cloud, std::size_t max_points, std::uint64_t seed) {
    const std::size_t n = cloud.size();
    if (max_points == 0) throw ArgumentError("uniform_crop needs max_points > 0");
    if (n <= max_points) return cloud;

    // Reservoir sample, then restore input order.
    Rng rng(derive_seed(seed, 0xc809));
    std::vector<std::uint32_t> kept(max_points);
    for (std::size_t i = 0; i < max_points; ++i) kept[i] = static_cast<std::uint32_t>(i);
    for (std::size_t i = max_points; i < n; ++i) {
        const std::size_t j = rng.below(i + 1);
        if (j < max_points) kept[j] = static_cast<std::uint32_t>(i);
    }
    std::sort(kept.begin(), kept.end());
    return cloud.select(kept);
}

PointCloud uniform_cloud(std::size_t n_points, double extent, std::uint64_t seed) {
    if (n_points == 0) throw ArgumentError("uniform_cloud needs n_points > 0");
    if (!(extent > 0.0)) throw ArgumentError("uniform_cloud needs extent > 0");
    PointCloud cloud;
    cloud.positions.resize(3 * n_points);
    Rng rng(derive_seed(seed, 0xf1e1d));
    for (double& v : cloud.positions) v = rng.uniform(0.0, extent);
    return cloud;
}

}  // namespace pointseg
