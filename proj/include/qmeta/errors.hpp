#pragma once

#include <stdexcept>
#include <string>

namespace qmeta {

// Bad user input: malformed config, invalid dimensions, unreadable data files.
// The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Runtime numeric failure: non-finite gradients or costs mid-run.
// The CLI maps this to exit code 3 after flushing any partial trace.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qmeta
