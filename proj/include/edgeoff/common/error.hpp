/**
 * @file error.hpp
 * @brief Exception hierarchy shared by every edgeoff module.
 *
 * Each class maps onto one failure family so the CLI can translate it into a
 * stable process exit code.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace edgeoff {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration value; `field()` names the offending key.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& message)
        : Error(field + ": " + message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// A caller broke the environment/agent contract (bad action index, missing action).
class ProtocolError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

/// Non-finite values, diverging losses, failed gradient checks.
class NumericalError : public Error {
public:
    using Error::Error;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

/// A checkpoint does not match the network layout it is loaded into.
class CompatibilityError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace edgeoff
