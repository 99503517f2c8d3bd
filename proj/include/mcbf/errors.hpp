#pragma once

#include <stdexcept>
#include <string>

namespace mcbf {

class McbfError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The symmetric eigen routine failed to converge, or a solve broke down.
class NumericalFailure : public McbfError {
public:
    using McbfError::McbfError;
};

class DimensionError : public McbfError {
public:
    using McbfError::McbfError;
};

class EmptyCompositionError : public McbfError {
public:
    using McbfError::McbfError;
};

class DuplicatePinError : public McbfError {
public:
    using McbfError::McbfError;
};

/// A half-space row with zero gradient and a negative offset.
class ZeroGradientError : public McbfError {
public:
    using McbfError::McbfError;
};

class EmptyTraceError : public McbfError {
public:
    using McbfError::McbfError;
};

/// Raised while reading a run configuration. `key()` names the offending key path.
class ConfigError : public McbfError {
public:
    ConfigError(std::string key, const std::string& what)
        : McbfError(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// The steering endpoint could not bind its TCP port.
class PortInUse : public McbfError {
public:
    using McbfError::McbfError;
};

}  // namespace mcbf
