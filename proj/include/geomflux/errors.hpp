#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace geomflux {

// Failure taxonomy shared by every module. Each class names the precondition
// that was violated; the what() string carries the specifics.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct NonHermitianInput : Error {
    using Error::Error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

struct DegenerateSpectrum : Error {
    using Error::Error;
};

// Carries the arc-length position along the path at which the overlap with
// the reference state fell below tolerance (0 for point queries).
struct ReferenceOverlapVanishing : Error {
    ReferenceOverlapVanishing(const std::string& msg, double arc_length_pos = 0.0)
        : Error(msg), arc_length(arc_length_pos) {}
    double arc_length;
};

struct PathNotClosed : Error {
    using Error::Error;
};

struct LevelTrackingLost : Error {
    using Error::Error;
};

struct EnergyBelowMinimum : Error {
    using Error::Error;
};

struct SamplingFailure : Error {
    using Error::Error;
};

struct StepSizeTooLarge : Error {
    using Error::Error;
};

struct NotIntegrable : Error {
    using Error::Error;
};

// Aggregates every config problem found in one validation pass.
struct SchemaError : Error {
    SchemaError(const std::string& msg, std::vector<std::string> issue_list)
        : Error(msg), issues(std::move(issue_list)) {}
    std::vector<std::string> issues;
};

} // namespace geomflux
