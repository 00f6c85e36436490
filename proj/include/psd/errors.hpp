#pragma once

#include <stdexcept>
#include <string>

namespace psd {

/// Base class for all numerical / domain failures raised by the toolkit.
/// Configuration problems use ConfigError instead, so callers can map the
/// two families to distinct process exit codes.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TotalCollision : Error {
    TotalCollision() : Error("total collision: configuration has zero scale") {}
};

struct DegenerateInput : Error {
    using Error::Error;
};

struct CollisionSingularity : Error {
    using Error::Error;
};

struct ConstraintViolation : Error {
    double residual = 0.0;
    double s = 0.0;
    ConstraintViolation(const std::string& what, double residual_, double s_)
        : Error(what), residual(residual_), s(s_) {}
};

struct StepSizeUnderflow : Error {
    using Error::Error;
};

struct ResolutionExceeded : Error {
    using Error::Error;
};

struct AmplitudeFloorBreach : Error {
    using Error::Error;
};

struct KappaUnderflow : Error {
    using Error::Error;
};

struct RegimeViolation : Error {
    using Error::Error;
};

struct IncompatibleCharts : Error {
    using Error::Error;
};

/// Invalid or incomplete run configuration. Messages carry the dotted
/// field path of the offending key ("masses.values: ...").
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace psd
