/**
 * @file lattice.hpp
 * @brief Deterministic master equation of the biased random walk.
 *
 *   d rho_i/dt = T+_{i-1} rho_{i-1} + T-_{i+1} rho_{i+1} - (T+_i + T-_i) rho_i
 *   T+-_i = h^-2 (1 - rho_{i+-1}) (1 - alpha rho_{i-+1}) (1 + chi0/2 (S_{i+-1} - S_i))
 *
 * Walls: the outward rate at the two end sites is zero, and the adhesion
 * factor at an end site reads its missing neighbour by mirror reflection.
 * The right-hand side is assembled from the net link fluxes
 * J_{i+1/2} = T+_i rho_i - T-_{i+1} rho_{i+1}, so sum(d rho/dt) telescopes.
 */
#pragma once

#include "motility/elliptic.hpp"
#include "motility/model.hpp"
#include "motility/plateau.hpp"
#include "motility/state.hpp"
#include "motility/stepping.hpp"

#include <span>
#include <vector>

namespace motility {

struct TransitionRates {
    std::vector<double> plus;
    std::vector<double> minus;
    std::size_t clamped = 0;
};

/// Jump rates for a given (rho, S). Negative chemotactic
/// factors are clamped to zero and counted.
inline void transition_rates(std::span<const double> rho, std::span<const double> S, double h,
                             const ModelParams& p, TransitionRates& out) {
    const std::size_t n = rho.size();
    out.plus.resize(n);
    out.minus.resize(n);
    out.clamped = 0;
    const double inv_h2 = 1.0 / (h * h);
    const double half_chi = 0.5 * p.chi0;
    auto chemo = [&](double dS) {
        const double f = 1.0 + half_chi * dS;
        if (f < 0.0) {
            ++out.clamped;
            return 0.0;
        }
        return f;
    };
    for (std::size_t i = 0; i < n; ++i) {
        if (i + 1 < n) {
            const double rear = i == 0 ? rho[1] : rho[i - 1];
            out.plus[i] = inv_h2 * (1.0 - rho[i + 1]) * (1.0 - p.alpha * rear) * chemo(S[i + 1] - S[i]);
        } else {
            out.plus[i] = 0.0;
        }
        if (i > 0) {
            const double rear = i + 1 == n ? rho[n - 2] : rho[i + 1];
            out.minus[i] = inv_h2 * (1.0 - rho[i - 1]) * (1.0 - p.alpha * rear) * chemo(S[i - 1] - S[i]);
        } else {
            out.minus[i] = 0.0;
        }
    }
}

inline TransitionRates transition_rates(const SimState& state, const ModelParams& p) {
    TransitionRates r;
    transition_rates(state.rho.values, state.S.values, state.rho.grid.spacing(), p, r);
    return r;
}

/// Flux-form master-equation right-hand side from precomputed rates.
inline void master_rhs_from_rates(std::span<const double> rho, const TransitionRates& T,
                                  std::span<double> drho) {
    const std::size_t n = rho.size();
    std::fill(drho.begin(), drho.end(), 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double J = T.plus[i] * rho[i] - T.minus[i + 1] * rho[i + 1];
        drho[i] -= J;
        drho[i + 1] += J;
    }
}

inline std::vector<double> master_rhs(const SimState& state, const ModelParams& p) {
    const auto T = transition_rates(state, p);
    std::vector<double> d(state.rho.size());
    master_rhs_from_rates(state.rho.values, T, d);
    return d;
}

struct LatticeOptions {
    double safety = 0.4;
    TimeScheme scheme = TimeScheme::Heun;
    double bound_tol = 1e-12;  ///< slack before a [0,1] excursion is logged
};

/// Owns buffers and the elliptic factorisation for one lattice run.
class LatticeModel {
public:
    LatticeModel(const Grid1D& grid, const ModelParams& p) : grid_(grid), params_(p), elliptic_(grid) {}

    void rhs(std::span<const double> rho, std::span<double> drho) {
        S_.resize(rho.size());
        elliptic_.solve(rho, S_);
        transition_rates(rho, S_, grid_.spacing(), params_, rates_);
        clamp_events_ += rates_.clamped;
        master_rhs_from_rates(rho, rates_, drho);
    }

    /// Explicit step bound safety / max_i (T+_i + T-_i), using the rates of
    /// the most recent rhs evaluation.
    [[nodiscard]] double stable_dt_cached(double safety) const {
        double worst = 0.0;
        for (std::size_t i = 0; i < rates_.plus.size(); ++i) worst = std::max(worst, rates_.plus[i] + rates_.minus[i]);
        return worst > 0.0 ? safety / worst : safety * grid_.spacing() * grid_.spacing();
    }

    Field chemoattractant(std::span<const double> rho) {
        Field S(grid_);
        elliptic_.solve(rho, S.values);
        return S;
    }

    [[nodiscard]] std::size_t clamp_events() const { return clamp_events_; }

private:
    Grid1D grid_;
    ModelParams params_;
    ChemoattractantSolver elliptic_;
    TransitionRates rates_;
    std::vector<double> S_;
    std::size_t clamp_events_ = 0;
};

inline void check_initial_density(const Field& initial) {
    if (!initial.finite()) throw ValidationError("initial density has non-finite values");
    if (initial.min() < 0.0 || initial.max() > 1.0) throw ValidationError("initial density outside [0,1]");
}

/// Integrate the master equation to t_end, returning states at the requested
/// snapshot times (linear interpolation in time between steps).
inline std::vector<LatticeState> simulate_lattice(const Field& initial, const ModelParams& p, double t_end,
                                                  std::span<const double> snapshot_times,
                                                  const LatticeOptions& opt = {}) {
    validate(p);
    check_initial_density(initial);
    check_snapshot_times(snapshot_times, t_end);

    LatticeModel model(initial.grid, p);
    auto rhs = [&model](std::span<const double> y, std::span<double> dy) { model.rhs(y, dy); };

    std::vector<double> y = initial.values, prev, k1, k2, tmp;
    Diagnostics diag;
    std::vector<LatticeState> out;
    std::size_t next = 0;
    double t = 0.0;

    auto emit = [&](std::vector<double> values, double time) {
        Field rho(initial.grid, std::move(values));
        Field S = model.chemoattractant(rho.values);
        LatticeState s(std::move(rho), std::move(S), time);
        s.diagnostics = diag;
        s.diagnostics.clamp_events = model.clamp_events();
        update_field_stats(s);
        out.push_back(std::move(s));
    };

    while (next < snapshot_times.size() && snapshot_times[next] <= 0.0) emit(y, snapshot_times[next++]);

    while (t < t_end) {
        prev = y;
        const double dt = explicit_step(
            opt.scheme, rhs, [&] { return model.stable_dt_cached(opt.safety); }, t_end - t, y, k1, k2, tmp);
        diag.dt.record(dt);
        const auto [mn, mx] = std::minmax_element(y.begin(), y.end());
        if (*mn < -opt.bound_tol || *mx > 1.0 + opt.bound_tol) {
            if (diag.bound_violations == 0) diag.violation_dt = dt;
            ++diag.bound_violations;
            diag.worst_violation = std::max({diag.worst_violation, -*mn, *mx - 1.0});
        }
        if (!diag.oscillating && has_grid_oscillations(y)) {
            diag.oscillating = true;
            diag.oscillation_onset_time = t + dt;
            diag.oscillation_onset_level = *mx;
        }
        const double t_new = (t_end - t - dt <= 1e-14 * std::max(1.0, t_end)) ? t_end : t + dt;
        while (next < snapshot_times.size() && snapshot_times[next] <= t_new) {
            const double theta = (snapshot_times[next] - t) / (t_new - t);
            emit(lerp_state(prev, y, theta), snapshot_times[next]);
            ++next;
        }
        t = t_new;
    }
    return out;
}

}  // namespace motility
