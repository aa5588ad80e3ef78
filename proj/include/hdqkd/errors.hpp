#pragma once

#include <stdexcept>
#include <string>

namespace hdqkd {

// Bad user input (config file, CLI args). Maps to exit code 1.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// A numerical procedure failed to meet its contract (non-convergence,
// invariant violation that indicates a bug upstream). Distinct from
// domain_error, which flags precondition violations by the caller.
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace hdqkd
