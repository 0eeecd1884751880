#pragma once

#include <stdexcept>
#include <string>

namespace vicloud {

/// Error classes map one-to-one onto CLI exit codes and C-API status codes.
enum class ErrorKind {
    config = 1,   // bad parameters, malformed specs, schema violations
    data = 2,     // file/parse problems, invariant violations in inputs
    numeric = 3,  // singular systems, degenerate geometry, failed iterations
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] void throw_config(const std::string& message);
[[noreturn]] void throw_data(const std::string& message);
[[noreturn]] void throw_numeric(const std::string& message);

inline void require(bool ok, ErrorKind kind, const std::string& message) {
    if (!ok) throw Error(kind, message);
}

}  // namespace vicloud
