#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "diracbox/evolution.hpp"
#include "diracbox/kick.hpp"
#include "diracbox/observables.hpp"
#include "diracbox/state.hpp"

// Real-space cross-check for the spectral propagator. The two-component state
// is sampled on a uniform grid (walls included), free flight is integrated
// with the implicit midpoint rule, and the kick is applied pointwise. Nothing
// here touches the Bessel expansion or the mode-overlap quadrature, so
// agreement between the two evolutions checks the whole spectral pipeline.
//
// Known limitation: a central-difference first derivative carries the usual
// doubled fermion branch at the grid scale. The initial data used here is
// band-limited far below that scale and the comparisons are convergence
// tested, so the spurious branch stays unpopulated.

namespace diracbox {

struct GridState {
    double L = 1.0;
    Eigen::VectorXcd phi1, chi2; // node samples, x_j = j L / (n-1)

    int n() const { return static_cast<int>(phi1.size()); }
    double h() const { return L / (phi1.size() - 1); }
};

// Uniform-weight norm: this is the exact invariant of the midpoint stepper
// (the trapezoid version differs by the wall weight of chi2 and is not).
inline double grid_norm_sq(const GridState& g) {
    return g.h() * (g.phi1.squaredNorm() + g.chi2.squaredNorm());
}

inline GridState reconstruct_on_grid(const DensitySampler& s, const Eigen::VectorXcd& A) {
    if (A.size() != s.phi.cols()) throw std::invalid_argument("reconstruct_on_grid: size mismatch");
    GridState g;
    g.L = s.x[s.x.size() - 1];
    g.phi1 = s.phi * A;
    g.chi2 = s.chi * A;
    return g;
}

// Crank-Nicolson flight for H(phi, chi) = (-i chi' + phi, -i phi' - chi) with
// phi pinned at both walls and chi free. Central differences with zero ghost
// values for phi make the discrete H hermitian under the uniform weight, so
// each solve preserves grid_norm_sq to roundoff.
class GridPropagator {
public:
    GridPropagator(double L, int n_grid, double T, int substeps)
        : L_(L), T_(T), n_(n_grid), substeps_(substeps) {
        if (!(std::isfinite(L) && L > 0.0)) throw std::invalid_argument("GridPropagator: bad L");
        if (n_grid < 16) throw std::invalid_argument("GridPropagator: need at least 16 nodes");
        if (!(std::isfinite(T) && T >= 0.0)) throw std::invalid_argument("GridPropagator: bad period");
        if (substeps < 1) throw std::invalid_argument("GridPropagator: substeps < 1");
        if (T_ == 0.0) return; // flight is the identity; nothing to factorize

        using cd = std::complex<double>;
        const int P = n_ - 2;       // chi block offset; unknowns are interior phi then all chi
        const int dim = 2 * n_ - 2;
        const double h = L_ / (n_ - 1);
        const double c = 1.0 / (2.0 * h);
        const double tau = T_ / substeps_;

        std::vector<Eigen::Triplet<cd>> trip;
        trip.reserve(static_cast<size_t>(6) * n_);
        for (int i = 1; i <= n_ - 2; ++i) {
            int p = i - 1;
            trip.emplace_back(p, p, cd(1.0, 0.0));
            trip.emplace_back(p, P + i + 1, cd(0.0, -c));
            trip.emplace_back(p, P + i - 1, cd(0.0, c));
        }
        for (int j = 0; j <= n_ - 1; ++j) {
            trip.emplace_back(P + j, P + j, cd(-1.0, 0.0));
            if (j + 1 <= n_ - 2) trip.emplace_back(P + j, j, cd(0.0, -c));
            if (j - 1 >= 1) trip.emplace_back(P + j, j - 2, cd(0.0, c));
        }
        Eigen::SparseMatrix<cd> H(dim, dim);
        H.setFromTriplets(trip.begin(), trip.end());
        Eigen::SparseMatrix<cd> Id(dim, dim);
        Id.setIdentity();
        Eigen::SparseMatrix<cd> fwd = Id + cd(0.0, 0.5 * tau) * H;
        B_ = Id - cd(0.0, 0.5 * tau) * H;
        fwd.makeCompressed();
        B_.makeCompressed();
        lu_.compute(fwd);
        if (lu_.info() != Eigen::Success)
            throw std::runtime_error("GridPropagator: sparse factorization failed");
    }

    double period() const { return T_; }
    int substeps() const { return substeps_; }
    int n_grid() const { return n_; }

    void flight(GridState& g) const {
        if (g.n() != n_) throw std::invalid_argument("flight: grid size mismatch");
        if (T_ == 0.0) return;
        Eigen::VectorXcd u(2 * n_ - 2);
        u.head(n_ - 2) = g.phi1.segment(1, n_ - 2);
        u.tail(n_) = g.chi2;
        for (int s = 0; s < substeps_; ++s) u = lu_.solve(B_ * u);
        g.phi1[0] = 0.0;
        g.phi1[n_ - 1] = 0.0;
        g.phi1.segment(1, n_ - 2) = u.head(n_ - 2);
        g.chi2 = u.tail(n_);
    }

private:
    double L_, T_;
    int n_, substeps_;
    Eigen::SparseMatrix<std::complex<double>> B_;
    Eigen::SparseLU<Eigen::SparseMatrix<std::complex<double>>> lu_;
};

// Pointwise kick. The upper component always picks up e^{+i eps cos(2 pi x / lambda)};
// mass_term flips the sign of the exponent on the lower component.
inline void kick_pointwise(GridState& g, double epsilon, double lambda, KickPhase mode) {
    if (!(lambda > 0.0)) throw std::invalid_argument("kick_pointwise: lambda must be positive");
    const int n = g.n();
    const double q = 2.0 * kPi / lambda;
    for (int j = 0; j < n; ++j) {
        double x = g.L * j / (n - 1);
        double th = epsilon * std::cos(q * x);
        std::complex<double> up(std::cos(th), std::sin(th));
        g.phi1[j] *= up;
        g.chi2[j] *= (mode == KickPhase::scalar) ? up : std::conj(up);
    }
}

struct SpectralSnapshot {
    long long kick;
    Eigen::VectorXcd A;
};

struct GridSnapshot {
    long long kick;
    GridState state;
};

struct TrajectoryComparisonRow {
    long long kick;
    double time;
    double l2_distance;   // uniform-weight distance, grid state vs spectral reconstruction
    double grid_norm;
    double spectral_norm; // coefficient-vector norm; deficit against 1 is truncation leakage
    double out_of_span;   // grid weight outside the span of the retained modes
};

inline std::vector<TrajectoryComparisonRow> compare_trajectories(
    const BoxBasis& basis, const std::vector<SpectralSnapshot>& spectral,
    const std::vector<GridSnapshot>& grid, double T) {
    if (spectral.size() != grid.size() || spectral.empty())
        throw std::invalid_argument("compare_trajectories: snapshot lists must match and be non-empty");
    const int n_grid = grid.front().state.n();
    if (n_grid < 8 * basis.n_max)
        throw std::invalid_argument("compare_trajectories: need at least 8 grid nodes per mode");
    DensitySampler s = make_density_sampler(basis, n_grid);
    const double h = basis.L / (n_grid - 1);

    std::vector<TrajectoryComparisonRow> rows;
    rows.reserve(spectral.size());
    for (size_t i = 0; i < spectral.size(); ++i) {
        if (spectral[i].kick != grid[i].kick)
            throw std::invalid_argument("compare_trajectories: kick indices do not line up");
        const GridState& g = grid[i].state;
        if (g.n() != n_grid) throw std::invalid_argument("compare_trajectories: grid size changed");
        GridState r = reconstruct_on_grid(s, spectral[i].A);
        TrajectoryComparisonRow row;
        row.kick = spectral[i].kick;
        row.time = spectral[i].kick * T;
        row.l2_distance = std::sqrt(h * ((g.phi1 - r.phi1).squaredNorm() + (g.chi2 - r.chi2).squaredNorm()));
        row.grid_norm = std::sqrt(grid_norm_sq(g));
        row.spectral_norm = spectral[i].A.norm();
        Eigen::VectorXcd proj = h * (s.phi.adjoint() * g.phi1 + s.chi.adjoint() * g.chi2);
        row.out_of_span = grid_norm_sq(g) - proj.squaredNorm();
        rows.push_back(row);
    }
    return rows;
}

struct DualTrajectoryOptions {
    int n_grid = 0; // 0 picks 8 * n_max, the minimum the comparison accepts
    int substeps = 32;
    StepOrder order = StepOrder::phase_kick;
    long long record_every = 1;
};

struct DualTrajectoryResult {
    std::vector<TrajectoryComparisonRow> rows;
    SpinorState spectral;
    GridState grid;
};

// Evolves the same initial state through the spectral map and the grid
// stepper with matched kick schedules, then scores the snapshots.
inline DualTrajectoryResult run_dual_trajectory(const BoxBasis& basis, const KickOperator& op,
                                                const SpinorState& initial, long long n_kicks,
                                                const DualTrajectoryOptions& opts = {}) {
    if (initial.A.size() != basis.n_max || op.n_max() != basis.n_max)
        throw std::invalid_argument("run_dual_trajectory: size mismatch");
    if (n_kicks < 0 || opts.record_every < 1)
        throw std::invalid_argument("run_dual_trajectory: bad schedule");
    const int n_grid = opts.n_grid > 0 ? opts.n_grid : 8 * basis.n_max;

    DensitySampler sampler = make_density_sampler(basis, n_grid);
    GridPropagator prop(basis.L, n_grid, op.params.T, opts.substeps);

    DualTrajectoryResult res;
    res.spectral = initial;
    res.grid = reconstruct_on_grid(sampler, initial.A);
    const double g0 = std::sqrt(grid_norm_sq(res.grid));
    if (!(g0 > 0.0)) throw std::invalid_argument("run_dual_trajectory: initial state vanishes on the grid");
    res.grid.phi1 /= g0;
    res.grid.chi2 /= g0;

    std::vector<SpectralSnapshot> spec_snaps;
    std::vector<GridSnapshot> grid_snaps;
    auto snap = [&](long long k) {
        spec_snaps.push_back({k, res.spectral.A});
        grid_snaps.push_back({k, res.grid});
    };
    snap(0);

    Eigen::VectorXcd tmp(basis.n_max), next(basis.n_max);
    for (long long k = 1; k <= n_kicks; ++k) {
        detail::apply_kick(res.spectral.A, next, tmp, op, opts.order);
        res.spectral.A.swap(next);
        ++res.spectral.kicks_elapsed;
        if (opts.order == StepOrder::phase_kick) {
            prop.flight(res.grid);
            kick_pointwise(res.grid, op.params.epsilon, op.params.lambda, op.params.phase_mode);
        } else {
            kick_pointwise(res.grid, op.params.epsilon, op.params.lambda, op.params.phase_mode);
            prop.flight(res.grid);
        }
        if (k % opts.record_every == 0 || k == n_kicks) snap(k);
    }
    res.rows = compare_trajectories(basis, spec_snaps, grid_snaps, op.params.T);
    return res;
}

} // namespace diracbox
