#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "diracbox/errors.hpp"
#include "diracbox/kick.hpp"
#include "diracbox/observables.hpp"
#include "diracbox/state.hpp"

namespace diracbox {

// One Floquet period is free flight then kick, matching
//   A_n(t+T) = sum_l A_l(t) V_ln e^{-i E_l T}.
// kick_phase swaps the two factors (kick first, phases on the new index).
enum class StepOrder { phase_kick, kick_phase };

namespace detail {
inline void apply_kick(const Eigen::VectorXcd& in, Eigen::VectorXcd& out, Eigen::VectorXcd& tmp,
                       const KickOperator& op, StepOrder order) {
    if (order == StepOrder::phase_kick) {
        tmp.array() = op.phase.array() * in.array();
        out.noalias() = op.V.transpose() * tmp;
    } else {
        tmp.noalias() = op.V.transpose() * in;
        out.array() = op.phase.array() * tmp.array();
    }
}
} // namespace detail

inline SpinorState step(const SpinorState& st, const KickOperator& op,
                        StepOrder order = StepOrder::phase_kick) {
    if (st.A.size() != op.n_max()) throw std::invalid_argument("step: state/operator size mismatch");
    SpinorState out = st;
    Eigen::VectorXcd tmp(st.A.size());
    double before = st.A.squaredNorm();
    detail::apply_kick(st.A, out.A, tmp, op, order);
    double after = out.A.squaredNorm();
    out.leakage_log.push_back(before - after);
    if (out.renormalize && after > 0.0) out.A /= std::sqrt(after);
    ++out.kicks_elapsed;
    return out;
}

struct EvolveOptions {
    long long stride = 1;
    StepOrder order = StepOrder::phase_kick;
    double norm_floor = 0.5;          // abort threshold on sum |A_n|^2 (renormalize off)
    bool record_velocity = true;      // velocity matrix is O(n_max^2) memory; optional
};

// Called once per kick, including kick 0 (the initial state).
using EvolveObserver = std::function<void(long long kick, double t, const SpinorState&)>;

// Runs n_kicks Floquet periods in place. Observables land in the returned
// series every `stride` kicks (plus kick 0); kick/time columns count from the
// state's kicks_elapsed so split runs concatenate cleanly.
inline ObservableSeries evolve(SpinorState& st, const KickOperator& op, const BoxBasis& basis,
                               long long n_kicks, const EvolveOptions& opts = {},
                               const std::vector<EvolveObserver>& observers = {}) {
    if (st.A.size() != op.n_max() || op.n_max() != basis.n_max)
        throw std::invalid_argument("evolve: state/operator/basis size mismatch");
    if (n_kicks < 0) throw std::invalid_argument("evolve: n_kicks < 0");
    if (opts.stride < 1) throw std::invalid_argument("evolve: stride < 1");
    if (!(opts.norm_floor >= 0.0 && opts.norm_floor < 1.0))
        throw std::invalid_argument("evolve: norm_floor outside [0, 1)");

    const double T = op.params.T;
    Eigen::VectorXd kin = kinetic_diagonal(basis);
    Eigen::MatrixXcd vel;
    if (opts.record_velocity) vel = velocity_matrix(basis);

    ObservableSeries series;
    auto record = [&](long long kick_abs) {
        series.kick.push_back(kick_abs);
        series.time.push_back(kick_abs * T);
        series.e_kin.push_back(kinetic_energy(st.A, kin));
        series.e_total.push_back(total_energy(st.A, basis));
        series.velocity.push_back(opts.record_velocity ? velocity(st.A, vel) : 0.0);
        series.norm.push_back(st.A.squaredNorm());
    };

    record(st.kicks_elapsed);
    for (const auto& obs : observers) obs(st.kicks_elapsed, st.kicks_elapsed * T, st);

    Eigen::VectorXcd tmp(st.A.size()), next(st.A.size());
    for (long long i = 1; i <= n_kicks; ++i) {
        double before = st.A.squaredNorm();
        detail::apply_kick(st.A, next, tmp, op, opts.order);
        double after = next.squaredNorm();
        st.leakage_log.push_back(before - after);
        if (st.renormalize && after > 0.0) next /= std::sqrt(after);
        st.A.swap(next);
        ++st.kicks_elapsed;
        if (!st.renormalize && after < opts.norm_floor)
            throw NormFloorError(st.kicks_elapsed, after, opts.norm_floor);
        if (i % opts.stride == 0) record(st.kicks_elapsed);
        for (const auto& obs : observers) obs(st.kicks_elapsed, st.kicks_elapsed * T, st);
    }
    return series;
}

} // namespace diracbox
