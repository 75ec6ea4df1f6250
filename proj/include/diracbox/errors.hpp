#pragma once

#include <stdexcept>
#include <string>

namespace diracbox {

// Bad or inconsistent run configuration. `line` is the offending config line
// (1-based) when known, 0 when the problem is a cross-key invariant.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string msg, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg),
          line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Accumulated norm fell below the configured floor during evolution
// (only armed when per-kick renormalization is off).
class NormFloorError : public std::runtime_error {
public:
    NormFloorError(long long kick, double norm_sq, double floor)
        : std::runtime_error("norm " + std::to_string(norm_sq) + " fell below floor " +
                             std::to_string(floor) + " after kick " + std::to_string(kick) +
                             "; basis too small for this parameter set"),
          kick_(kick), norm_sq_(norm_sq) {}
    long long kick() const { return kick_; }
    double norm_sq() const { return norm_sq_; }

private:
    long long kick_;
    double norm_sq_;
};

} // namespace diracbox
