#pragma once

#include <stdexcept>
#include <string>

namespace pbern {

// Base class for all solver errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Geometry that cannot be processed: non-convex input, containment failure,
// collapsed interface, fewer than 3 distinct normals, ...
struct DegenerateGeometry : Error {
    using Error::Error;
};

// Inner and outer body leave no annulus band of at least 3 grid cells.
struct EmptyAnnulus : Error {
    using Error::Error;
};

// Requested level does not produce a sign change on the field.
struct LevelNotPresent : Error {
    using Error::Error;
};

// Scalar argument outside its admissible interval.
struct OutOfRange : Error {
    using Error::Error;
};

// The distance constraint exceeds the Bernoulli constant of the domain.
struct LambdaTooLarge : Error {
    using Error::Error;
};

// lambda < 2h: the grid cannot resolve the distance condition.
struct GridTooCoarse : Error {
    using Error::Error;
};

// An iteration hit its cap; carries the last residual seen.
struct NonConvergence : Error {
    int iterations;
    double residual;
    NonConvergence(const std::string& what, int iterations_, double residual_)
        : Error(what), iterations(iterations_), residual(residual_) {}
};

// Bad configuration file or command line; message names the key/line.
struct ConfigError : Error {
    using Error::Error;
};

// Filesystem failure while reading or writing artifacts.
struct IoError : Error {
    using Error::Error;
};

} // namespace pbern
