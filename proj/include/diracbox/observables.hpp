#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "diracbox/basis.hpp"
#include "diracbox/state.hpp"

namespace diracbox {

// Kinetic operator -i alpha_x d/dx is diagonal in this basis:
// T_nn = E_n - 1/E_n, every off-diagonal element vanishes by sine/cosine
// orthogonality. The mass term beta is diagonal too, beta_nn = 1/E_n, so the
// two add back up to the full eigenvalue E_n.
inline Eigen::VectorXd kinetic_diagonal(const BoxBasis& b) {
    Eigen::VectorXd d(b.n_max);
    for (int i = 0; i < b.n_max; ++i) d[i] = b.E[i] - 1.0 / b.E[i];
    return d;
}

inline Eigen::VectorXd beta_diagonal(const BoxBasis& b) {
    Eigen::VectorXd d(b.n_max);
    for (int i = 0; i < b.n_max; ++i) d[i] = 1.0 / b.E[i];
    return d;
}

inline double kinetic_energy(const Eigen::VectorXcd& A, const Eigen::VectorXd& kin_diag) {
    if (A.size() != kin_diag.size()) throw std::invalid_argument("kinetic_energy: size mismatch");
    return A.cwiseAbs2().dot(kin_diag);
}

inline double total_energy(const Eigen::VectorXcd& A, const BoxBasis& b) {
    if (A.size() != b.n_max) throw std::invalid_argument("total_energy: size mismatch");
    double e = 0.0;
    for (int i = 0; i < b.n_max; ++i) e += std::norm(A[i]) * b.E[i];
    return e;
}

// Velocity matrix <psi_n| alpha_x |psi_m>. With the i sin / cos phase
// convention the entries are purely imaginary, hermitian, zero on the
// diagonal and zero whenever n+m is even:
//   (M_v)_nm = i N_n N_m (2L/pi) (kappa_n m + kappa_m n) / (m^2 - n^2).
// (The paper's -i prefactor is dropped; this real hermitian form is what the
// expectation value below uses.)
inline Eigen::MatrixXcd velocity_matrix(const BoxBasis& b) {
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(b.n_max, b.n_max);
    double c = 2.0 * b.L / kPi;
    for (int m = 1; m <= b.n_max; ++m) {
        for (int n = 1; n <= b.n_max; ++n) {
            if (((n + m) & 1) == 0) continue;
            double num = b.kappa[n - 1] * m + b.kappa[m - 1] * n;
            double den = static_cast<double>(m) * m - static_cast<double>(n) * n;
            M(n - 1, m - 1) = std::complex<double>(0.0, b.norm[n - 1] * b.norm[m - 1] * c * num / den);
        }
    }
    return M;
}

inline double velocity(const Eigen::VectorXcd& A, const Eigen::MatrixXcd& vel_matrix) {
    if (A.size() != vel_matrix.rows()) throw std::invalid_argument("velocity: size mismatch");
    return (A.adjoint() * vel_matrix * A).value().real();
}

inline double norm_sq(const Eigen::VectorXcd& A) { return A.squaredNorm(); }

// rho(x) = |sum_n A_n phi1_n(x)|^2 + |sum_n A_n chi2_n(x)|^2 on a fixed grid.
// The mode samples are cached so repeated frames cost two gemvs.
struct DensitySampler {
    Eigen::VectorXd x;
    Eigen::MatrixXcd phi, chi; // n_points x n_max

    Eigen::VectorXd rho(const Eigen::VectorXcd& A) const {
        if (A.size() != phi.cols()) throw std::invalid_argument("DensitySampler: size mismatch");
        return (phi * A).cwiseAbs2() + (chi * A).cwiseAbs2();
    }
};

inline DensitySampler make_density_sampler(const BoxBasis& b, int n_points) {
    if (n_points < 2) throw std::invalid_argument("make_density_sampler: need at least 2 points");
    DensitySampler s;
    s.x.resize(n_points);
    s.phi.resize(n_points, b.n_max);
    s.chi.resize(n_points, b.n_max);
    for (int j = 0; j < n_points; ++j) {
        double x = b.L * j / (n_points - 1);
        s.x[j] = x;
        for (int n = 1; n <= b.n_max; ++n) {
            SpinorSample sp = eval_eigenspinor(b, n, x);
            s.phi(j, n - 1) = sp.phi1;
            s.chi(j, n - 1) = sp.chi2;
        }
    }
    return s;
}

inline double density_at(const BoxBasis& b, const Eigen::VectorXcd& A, double x) {
    if (A.size() != b.n_max) throw std::invalid_argument("density_at: size mismatch");
    std::complex<double> p{}, c{};
    for (int n = 1; n <= b.n_max; ++n) {
        SpinorSample sp = eval_eigenspinor(b, n, x);
        p += A[n - 1] * sp.phi1;
        c += A[n - 1] * sp.chi2;
    }
    return std::norm(p) + std::norm(c);
}

// One row per recorded kick (kick 0 = the initial state).
struct ObservableSeries {
    std::vector<long long> kick;
    std::vector<double> time, e_kin, e_total, velocity, norm;

    size_t size() const { return kick.size(); }
};

} // namespace diracbox
