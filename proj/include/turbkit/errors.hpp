#pragma once

#include <stdexcept>
#include <string>

namespace turbkit {

// invalid user input or mismatched shapes; maps to exit code 2
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// a documented precondition was violated by the caller
struct ContractError : std::logic_error {
    using std::logic_error::logic_error;
};

struct StepSizeError : std::runtime_error {
    StepSizeError(const std::string& what, double umax) : std::runtime_error(what), u_max(umax) {}
    double u_max;
};

struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MissingPressureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace turbkit
