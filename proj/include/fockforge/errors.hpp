#pragma once

#include <stdexcept>
#include <string>

namespace fockforge {

/// Integration failure, non-finite values, trace drift and the like.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Refusal due to a memory or time budget, with the requirement in the message.
struct ResourceError : std::runtime_error {
    explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

/// Requested phase is undefined (reference or target amplitude vanishes).
struct UndefinedPhaseError : std::runtime_error {
    explicit UndefinedPhaseError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fockforge
