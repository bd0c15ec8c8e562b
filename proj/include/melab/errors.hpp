#pragma once

#include <stdexcept>
#include <string>

namespace melab {

// Error taxonomy mapped to CLI exit codes: usage errors are handled by the
// CLI parser itself; ConfigError -> 2, everything else -> 3.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct InputError : std::runtime_error {
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace melab
