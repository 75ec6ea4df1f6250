#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace diracbox {

// J_0..J_m_max(x) by Miller's backward recurrence: start far above the
// turning point with an arbitrary tiny seed, recur down, then fix the overall
// scale with the Neumann sum J_0 + 2*sum_k J_{2k} = 1. x >= 0.
inline std::vector<double> bessel_j_list(int m_max, double x) {
    if (m_max < 0) throw std::invalid_argument("bessel_j_list: m_max < 0");
    if (!(x >= 0.0) || !std::isfinite(x)) throw std::invalid_argument("bessel_j_list: bad x");
    std::vector<double> out(m_max + 1, 0.0);
    if (x == 0.0) {
        out[0] = 1.0;
        return out;
    }
    double top = std::max(static_cast<double>(m_max), x);
    int n_start = static_cast<int>(top + 20.0 + 12.0 * std::sqrt(top + 1.0));
    double sum = 0.0;
    double jnp1 = 0.0; // J_{n+1}
    double jn = 1e-30; // J_n (unnormalized seed)
    for (int n = n_start; n >= 0; --n) {
        if (n <= m_max) out[n] = jn;
        if (n == 0)
            sum += jn;
        else if (n % 2 == 0)
            sum += 2.0 * jn;
        if (n > 0) {
            double jnm1 = (2.0 * n / x) * jn - jnp1;
            jnp1 = jn;
            jn = jnm1;
            if (std::abs(jn) > 1e250) {
                jn *= 1e-250;
                jnp1 *= 1e-250;
                sum *= 1e-250;
                for (double& v : out) v *= 1e-250;
            }
        }
    }
    for (double& v : out) v /= sum;
    return out;
}

// Coefficients of e^{i eps cos(theta)} = sum_m b_m e^{im theta} with
// b_m = i^m J_m(eps) and b_{-m} = b_m. Stored for m in [-order, order].
struct JacobiAngerSeries {
    double epsilon = 0.0;
    double tol = 0.0;
    int order = 0;
    std::vector<std::complex<double>> b; // index m + order

    const std::complex<double>& coeff(int m) const { return b[static_cast<size_t>(m + order)]; }

    double sum_squares() const {
        double s = 0.0;
        for (const auto& c : b) s += std::norm(c);
        return s;
    }
};

inline JacobiAngerSeries jacobi_anger_coeffs(double epsilon, double tol = 1e-14) {
    if (!std::isfinite(epsilon)) throw std::invalid_argument("jacobi_anger_coeffs: bad epsilon");
    if (!(tol > 0.0 && tol <= 1e-2)) throw std::invalid_argument("jacobi_anger_coeffs: bad tol");
    double ae = std::abs(epsilon);
    JacobiAngerSeries s;
    s.epsilon = epsilon;
    s.tol = tol;
    if (ae == 0.0) {
        s.order = 0;
        s.b = {std::complex<double>(1.0, 0.0)};
        return s;
    }
    int m_hi = static_cast<int>(std::ceil(ae + 24.0 + 14.0 * std::cbrt(ae + 1.0)));
    std::vector<double> j = bessel_j_list(m_hi, ae);
    // Smallest cutoff with the next order below tol. Asking for two
    // consecutive below-tol orders guards against landing on an accidental
    // zero of J_m in the oscillatory range m < eps.
    int M = -1;
    for (int m = std::max(0, static_cast<int>(std::floor(ae)) - 1); m + 2 <= m_hi; ++m) {
        if (std::abs(j[m + 1]) < tol && std::abs(j[m + 2]) < tol) {
            M = m;
            break;
        }
    }
    if (M < 0) throw std::runtime_error("jacobi_anger_coeffs: cutoff search failed");
    s.order = M;
    s.b.assign(2 * M + 1, {});
    static const std::complex<double> ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    for (int m = 0; m <= M; ++m) {
        double jm = j[m];
        if (epsilon < 0.0 && (m % 2) != 0) jm = -jm; // J_m(-x) = (-1)^m J_m(x)
        std::complex<double> bm = ipow[m % 4] * jm;
        s.b[static_cast<size_t>(M + m)] = bm;
        s.b[static_cast<size_t>(M - m)] = bm;
    }
    return s;
}

} // namespace diracbox
