#pragma once

#include <stdexcept>
#include <string>

namespace synergy {

// Bad call arguments: unknown names, overlapping variable sets, invalid sizes.
// The CLI maps this class of failure to exit code 1.
struct usage_error : std::invalid_argument {
    explicit usage_error(const std::string& msg) : std::invalid_argument(msg) {}
};

// Lookup of a variable, node or symbol name that does not exist.
struct name_error : usage_error {
    explicit name_error(const std::string& msg) : usage_error(msg) {}
};

// Structurally invalid model or dataset (cyclic diagram, incomplete kernel,
// duplicate shapes across classes, ...).
struct model_error : usage_error {
    explicit model_error(const std::string& msg) : usage_error(msg) {}
};

// Argument outside the proven domain of a formula (e.g. the additive lower
// bound with n_a < n_c).
struct domain_error : usage_error {
    explicit domain_error(const std::string& msg) : usage_error(msg) {}
};

// Work would exceed a configured cap (encoder enumeration past the limit).
struct resource_error : std::runtime_error {
    explicit resource_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A numeric invariant failed beyond tolerance; indicates a bug, not bad input.
// The CLI maps this class of failure to exit code 2.
struct numerical_error : std::runtime_error {
    explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Gradient descent diverged (loss rose on many consecutive evaluations).
struct step_size_error : numerical_error {
    explicit step_size_error(const std::string& msg) : numerical_error(msg) {}
};

// Config file rejected (malformed JSON, unknown keys, wrong types).
// The CLI maps this class of failure to exit code 3.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace synergy
