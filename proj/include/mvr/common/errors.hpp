#pragma once

#include <stdexcept>
#include <string>

namespace mvr {

/// Raised when a computation produces non-finite values or fails to make progress.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid user input: configuration values, CLI flags, input files.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string key_path, const std::string& message)
        : std::invalid_argument(key_path.empty() ? message : key_path + ": " + message),
          key_path_(std::move(key_path)) {}

    const std::string& key_path() const noexcept { return key_path_; }

private:
    std::string key_path_;
};

}  // namespace mvr
