#pragma once

#include <stdexcept>
#include <string>

namespace pointseg {

// Base class for every error thrown by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input text (bad PLY header, bad config line, ...).
struct ParseError : Error {
    using Error::Error;
};

// Structurally valid input carrying invalid values (non-finite coordinate,
// label out of range, ...).
struct DataError : Error {
    using Error::Error;
};

// Binary payload with an impossible layout (odd KITTI record length, bad
// checkpoint magic, ...).
struct FormatError : Error {
    using Error::Error;
};

// A caller-supplied argument violates a precondition.
struct ArgumentError : Error {
    using Error::Error;
};

// Inconsistent configuration (widths, class counts, ablation switches).
struct ConfigError : Error {
    using Error::Error;
};

// Tensor shapes do not line up for an operation.
struct ShapeError : Error {
    using Error::Error;
};

// An index references a row that does not exist.
struct IndexError : Error {
    using Error::Error;
};

// Filesystem trouble.
struct IoError : Error {
    using Error::Error;
};

// The optimizer met a non-finite gradient or diverged.
struct OptimizationError : Error {
    using Error::Error;
};

// A deadline-bounded operation ran out of its time budget.
struct TimeoutError : Error {
    using Error::Error;
};

}  // namespace pointseg
