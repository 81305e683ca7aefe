#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pointseg {

// N points with 3D coordinates, optional per-point attributes and labels.
// positions is row-major N x 3; attributes is row-major N x attr_width with
// attr_width in {0, 1, 3} (none, intensity, RGB in [0,1]); labels holds class
// ids in [0, n_class).
struct PointCloud {
    std::vector<double> positions;
    std::vector<double> attributes;
    std::size_t attr_width = 0;
    std::optional<std::vector<std::int32_t>> labels;

    std::size_t size() const { return positions.size() / 3; }

    std::span<const double> position(std::size_t i) const {
        return {positions.data() + 3 * i, 3};
    }
    std::span<const double> attribute(std::size_t i) const {
        return {attributes.data() + attr_width * i, attr_width};
    }

    // Throws DataError if an invariant is violated (non-finite position,
    // mismatched row counts, label out of range).
    void validate(std::optional<std::int32_t> n_class = std::nullopt) const;

    // Sub-cloud containing the given rows, in the given order.
    PointCloud select(std::span<const std::uint32_t> rows) const;
};

enum class PrimitiveKind { plane, sphere, cylinder, clutter };

// One generating shape per class. Meaning of the fields by kind:
//   plane:    z = center[2]
//   sphere:   surface of the sphere at center with the given radius
//   cylinder: vertical tube through (center[0], center[1]) with the given radius
//   clutter:  uniform in the scene box, fields unused
struct Primitive {
    PrimitiveKind kind = PrimitiveKind::clutter;
    std::array<double, 3> center{0.0, 0.0, 0.0};
    double radius = 0.0;
};

const char* primitive_kind_name(PrimitiveKind kind);

// Declarative description of a synthetic labeled scene. Identical specs
// (including seed) generate bit-identical clouds.
struct SceneSpec {
    std::size_t n_points = 1024;
    std::int32_t n_class = 3;
    double extent = 8.0;
    std::vector<Primitive> shape_mix;  // empty -> default_shape_mix(n_class, extent)
    double noise_sigma = 0.05;
    std::uint64_t seed = 0;
};

// Canonical per-class primitives: plane, sphere, cylinder, clutter, cycling
// when n_class > 4. Placements depend only on (class index, extent) so every
// scene of a family shares the same layout.
std::vector<Primitive> default_shape_mix(std::int32_t n_class, double extent);

// Deterministic labeled cloud; every class receives at least
// floor(n_points / (2 * n_class)) points. Throws ConfigError on a bad spec.
PointCloud generate_scene(const SceneSpec& spec);

// Seeded uniform subsample to at most max_points rows (identity when the
// cloud is already small enough). Used to cap training inputs at a fixed
// budget; row order of the survivors is preserved.
PointCloud uniform_crop(const PointCloud& cloud, std::size_t max_points, std::uint64_t seed);

// Unlabeled cloud with positions uniform in [0, extent)^3; the fixture for
// sampler benchmarks and coverage properties.
PointCloud uniform_cloud(std::size_t n_points, double extent, std::uint64_t seed);

}  // namespace pointseg
