#pragma once

#include <stdexcept>
#include <string>

namespace driftwatch {

inline constexpr const char* kVersion = "0.1.0";

/// Data or computation error. Messages are stable strings; callers and
/// tests match on them.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Configuration / usage error, mapped to a distinct CLI exit code.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

[[noreturn]] inline void fail(const std::string& msg) { throw Error(msg); }
[[noreturn]] inline void fail_config(const std::string& msg) { throw ConfigError(msg); }

} // namespace driftwatch
