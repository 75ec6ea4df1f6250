#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

namespace diracbox {

// Spectral state: coefficients A_n over the positive-energy box modes.
// leakage_log records the per-kick norm deficit (the part of the state the
// truncated positive-energy basis could not hold).
struct SpinorState {
    Eigen::VectorXcd A;
    long long kicks_elapsed = 0;
    bool renormalize = false;
    std::vector<double> leakage_log;
};

inline SpinorState state_from_mode(int n_max, int n) {
    if (n_max < 1) throw std::invalid_argument("state_from_mode: n_max < 1");
    if (n < 1 || n > n_max) throw std::out_of_range("state_from_mode: mode index out of range");
    SpinorState s;
    s.A = Eigen::VectorXcd::Zero(n_max);
    s.A[n - 1] = 1.0;
    return s;
}

// Coefficients must arrive unit-normalized (the projection and preset paths
// guarantee it); anything else is a caller bug, not data to silently fix.
inline SpinorState state_from_coeffs(Eigen::VectorXcd a) {
    if (a.size() < 1) throw std::invalid_argument("state_from_coeffs: empty coefficient vector");
    double n2 = a.squaredNorm();
    if (std::abs(n2 - 1.0) > 1e-12)
        throw std::invalid_argument("state_from_coeffs: coefficients not unit-normalized");
    SpinorState s;
    s.A = std::move(a);
    return s;
}

inline SpinorState normalized_state(Eigen::VectorXcd a) {
    if (a.size() < 1) throw std::invalid_argument("normalized_state: empty coefficient vector");
    double n2 = a.squaredNorm();
    if (!(n2 > 0.0)) throw std::invalid_argument("normalized_state: zero vector");
    a /= std::sqrt(n2);
    SpinorState s;
    s.A = std::move(a);
    return s;
}

} // namespace diracbox
