#pragma once

#include <stdexcept>
#include <string>

namespace tracekit {

// Bad run configuration: unknown columns, broken schema, invalid parameters.
// The CLI maps this to exit status 1.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// The inputs exist but cannot support the requested computation
// (missing header, insufficient history, ...). CLI exit status 2.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tracekit
