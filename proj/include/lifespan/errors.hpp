#pragma once

#include <stdexcept>
#include <string>

namespace lifespan {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct InvalidGeometry : Error {
    using Error::Error;
};

struct InvalidTime : Error {
    using Error::Error;
};

struct InvalidData : Error {
    using Error::Error;
};

struct PreconditionViolated : Error {
    using Error::Error;
};

/// Requested tolerance could not be reached; carries the achieved estimate.
struct QuadratureFailure : Error {
    double value;
    double error_estimate;
    QuadratureFailure(const std::string& msg, double v, double e)
        : Error(msg + " (value=" + std::to_string(v) +
                ", error estimate=" + std::to_string(e) + ")"),
          value(v), error_estimate(e) {}
};

struct StiffnessFailure : Error {
    using Error::Error;
};

/// NaN/overflow in the state vector, as opposed to a detected physical blow-up.
struct NumericalBlowupArtifact : Error {
    using Error::Error;
};

struct SweepFailed : Error {
    using Error::Error;
};

struct ReportError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

}  // namespace lifespan
