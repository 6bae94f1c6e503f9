#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace apgkit {

/// Root of every error raised by the toolkit. `kind()` is a stable
/// machine-readable tag used by the CLI error JSON.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

class DimensionError : public Error {
public:
    explicit DimensionError(const std::string& what) : Error("dimension", what) {}
};

class ConstructionError : public Error {
public:
    explicit ConstructionError(const std::string& what) : Error("construction", what) {}
};

class PreconditionError : public Error {
public:
    explicit PreconditionError(const std::string& what) : Error("precondition", what) {}
};

class ScheduleError : public Error {
public:
    explicit ScheduleError(const std::string& what) : Error("schedule", what) {}
};

class OracleUnavailable : public Error {
public:
    explicit OracleUnavailable(const std::string& what) : Error("oracle-unavailable", what) {}
};

class CertificationUnavailable : public Error {
public:
    explicit CertificationUnavailable(const std::string& what)
        : Error("certification-unavailable", what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error("io", what) {}
};

class DetectionFailure : public Error {
public:
    explicit DetectionFailure(const std::string& what) : Error("detection", what) {}
};

inline void require_dims(std::int64_t got, std::int64_t expected, const char* what) {
    if (got != expected) {
        throw DimensionError(std::string(what) + ": expected length " + std::to_string(expected) +
                             ", got " + std::to_string(got));
    }
}

}  // namespace apgkit
