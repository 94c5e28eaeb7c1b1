#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bbench {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller broke a documented precondition (dimension mismatch, empty input, ...).
class ContractViolation : public Error {
public:
    using Error::Error;
};

/// The iteration produced a non-finite component; `iteration` is the first bad sweep.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, std::size_t iteration)
        : Error(what), iteration(iteration) {}
    std::size_t iteration;
};

class SingularMatrixError : public Error {
public:
    using Error::Error;
};

/// Malformed wire payload or log line. `field` names the offending field when
/// known; `line` is 1-based and nonzero only for log files.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what, std::string field = {}, std::size_t line = 0)
        : Error(what), field(std::move(field)), line(line) {}
    std::string field;
    std::size_t line;
};

/// Invalid or unsupported configuration (bad confidence level, missing ground truth, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A required external capability is absent (e.g. no container runtime on PATH).
class CapabilityError : public Error {
public:
    using Error::Error;
};

/// Environment provisioning failed (bind failure, health-check timeout, ...).
class ProvisionError : public Error {
public:
    using Error::Error;
};

/// A provisioned environment misbehaved during a call (child crashed, HTTP error, ...).
class EnvironmentError : public Error {
public:
    using Error::Error;
};

class TimeoutError : public Error {
public:
    using Error::Error;
};

} // namespace bbench
