#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "diracbox/basis.hpp"
#include "diracbox/numerics.hpp"
#include "diracbox/state.hpp"

namespace diracbox {

// Gaussian profile multiplying a constant 4-spinor template s:
//   f(x) = 1/(d sqrt(pi)) * exp(-(x-x0)^2 / (2 d^2)) * exp(i v0 x)
// Only the first and fourth spinor components overlap the box modes; the
// middle two are orthogonal to every retained mode and show up as capture
// loss rather than an error.
struct GaussianPacketSpec {
    double d = 0.01;
    double x0 = 0.5;
    double v0 = 0.0;
    std::array<std::complex<double>, 4> s{{{1.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}}};
};

inline double packet_norm_constant(double d) { return 1.0 / (d * std::sqrt(kPi)); }

// Fraction of the template's weight that can couple to the two-component modes.
inline double couplable_weight(const GaussianPacketSpec& spec) {
    double tot = 0.0;
    for (const auto& c : spec.s) tot += std::norm(c);
    if (tot == 0.0) throw std::invalid_argument("packet: spinor template is zero");
    return (std::norm(spec.s[0]) + std::norm(spec.s[3])) / tot;
}

struct PacketProjection {
    SpinorState state;          // unit-normalized expansion over the retained modes
    double captured_fraction;   // |projection|^2 / |packet|^2 before renormalization
    double raw_norm;            // integral of |f|^2 over the box
    std::vector<std::string> warnings;
};

inline PacketProjection project_packet(const BoxBasis& basis, const GaussianPacketSpec& spec) {
    if (!(std::isfinite(spec.d) && spec.d > 0.0)) throw std::invalid_argument("packet: d must be positive");
    if (!std::isfinite(spec.x0) || !std::isfinite(spec.v0))
        throw std::invalid_argument("packet: x0/v0 must be finite");
    double tot = 0.0;
    for (const auto& c : spec.s) tot += std::norm(c);
    if (tot == 0.0) throw std::invalid_argument("packet: spinor template is zero");
    if (std::norm(spec.s[0]) + std::norm(spec.s[3]) == 0.0)
        throw std::invalid_argument("packet: template has no overlap with the box modes "
                                    "(components 1 and 4 both zero)");

    const double L = basis.L;
    const int n = basis.n_max;
    const std::complex<double> s1 = spec.s[0] / std::sqrt(tot);
    const std::complex<double> s4 = spec.s[3] / std::sqrt(tot);

    PacketProjection out;
    if (spec.x0 - 4.0 * spec.d < 0.0 || spec.x0 + 4.0 * spec.d > L)
        out.warnings.push_back("packet tail clipped by a box wall");

    // The Gaussian is negligible past 12 standard deviations, so integrate on
    // the clamped window instead of the whole box.
    const double a = std::max(0.0, spec.x0 - 12.0 * spec.d);
    const double b = std::min(L, spec.x0 + 12.0 * spec.d);
    if (!(b > a)) throw std::invalid_argument("packet: center lies far outside the box");
    double halfwaves = (basis.k[n - 1] + std::abs(spec.v0)) * (b - a) / kPi;
    int panels = panels_for_halfwaves(halfwaves);

    std::vector<double> xs, ws;
    composite_nodes(a, b, panels, xs, ws);
    const int m = static_cast<int>(xs.size());

    const double amp = packet_norm_constant(spec.d);
    Eigen::VectorXd gre(m), gim(m);
    double raw = 0.0;
    for (int j = 0; j < m; ++j) {
        double u = (xs[j] - spec.x0) / spec.d;
        double mag = amp * std::exp(-0.5 * u * u);
        double ph = spec.v0 * xs[j];
        gre[j] = ws[j] * mag * std::cos(ph);
        gim[j] = ws[j] * mag * std::sin(ph);
        raw += ws[j] * mag * mag;
    }

    Eigen::MatrixXd S(m, n), C(m, n);
    for (int j = 0; j < m; ++j) {
        double xl = xs[j] / L;
        for (int mode = 1; mode <= n; ++mode) {
            S(j, mode - 1) = sinpi(mode * xl);
            C(j, mode - 1) = cospi(mode * xl);
        }
    }
    Eigen::VectorXd is_re = S.transpose() * gre, is_im = S.transpose() * gim;
    Eigen::VectorXd ic_re = C.transpose() * gre, ic_im = C.transpose() * gim;

    Eigen::VectorXcd A(n);
    const std::complex<double> mi(0.0, -1.0);
    for (int mode = 1; mode <= n; ++mode) {
        std::complex<double> Is(is_re[mode - 1], is_im[mode - 1]);
        std::complex<double> Ic(ic_re[mode - 1], ic_im[mode - 1]);
        double N = basis.norm[mode - 1];
        A[mode - 1] = s1 * (mi * N) * Is + s4 * (N * basis.kappa[mode - 1]) * Ic;
    }

    double captured_sq = A.squaredNorm();
    out.raw_norm = raw;
    out.captured_fraction = captured_sq / raw;
    if (captured_sq == 0.0)
        throw std::invalid_argument("packet: projection onto the retained modes vanished");
    if (out.captured_fraction < 0.99) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "captured fraction %.6g below 0.99; state renormalized",
                      out.captured_fraction);
        out.warnings.emplace_back(buf);
    }
    out.state.A = A / std::sqrt(captured_sq);
    out.state.kicks_elapsed = 0;
    return out;
}

} // namespace diracbox
