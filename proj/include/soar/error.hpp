#pragma once

#include <stdexcept>
#include <string>

namespace soar {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Coordinate or index outside its valid domain.
struct RangeError : Error {
    using Error::Error;
};

// A caller-supplied parameter violates its contract (ratios, counts, sigma).
struct ParameterError : Error {
    using Error::Error;
};

// Two containers that must agree on dimensions do not.
struct ShapeError : Error {
    using Error::Error;
};

// A file does not start with the expected magic / structure.
struct FormatError : Error {
    using Error::Error;
};

// A file ends before its declared payload.
struct LengthError : Error {
    using Error::Error;
};

// A value is outside the representable/serializable domain (NaN, Inf).
struct ValueError : Error {
    using Error::Error;
};

// Training diverged; carries the step at which the loss became non-finite.
struct TrainingError : Error {
    int step;
    TrainingError(const std::string& what, int step_index)
        : Error(what), step(step_index) {}
};

} // namespace soar
