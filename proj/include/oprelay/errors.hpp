#pragma once

#include <stdexcept>
#include <string>

namespace oprelay {

// Bad user input: rates, keys, config fields.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

struct UnsupportedCombination : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnknownKey : std::out_of_range {
    using std::out_of_range::out_of_range;
};

struct InsufficientData : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InfeasibleRegion : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace oprelay
