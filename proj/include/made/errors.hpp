#pragma once

#include <stdexcept>
#include <string>

namespace made {

// Natural-parameter value outside the family's domain.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Response value outside the family's support.
struct SupportError : std::domain_error {
    using std::domain_error::domain_error;
};

// Invalid configuration (bad bandwidth, dimension, flag combination).
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Malformed or inconsistent input data.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical failure that survives the internal safeguards.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace made
