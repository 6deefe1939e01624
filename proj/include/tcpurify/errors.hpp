#pragma once

#include <stdexcept>
#include <string>

namespace tcpurify {

// Bad argument to a library call (out-of-range index, mismatched spaces, ...).
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A configuration that cannot represent the requested computation exactly,
// e.g. a photon cutoff too small to close the reachable excitation sector.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised when a conditional measurement branch has vanishing probability.
// The run has to be restarted from scratch.
class ProtocolFailure : public std::runtime_error {
public:
    ProtocolFailure(const std::string& what, double probability)
        : std::runtime_error(what), probability_(probability) {}

    double probability() const noexcept { return probability_; }

private:
    double probability_;
};

} // namespace tcpurify
