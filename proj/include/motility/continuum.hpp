/**
 * @file continuum.hpp
 * @brief Method-of-lines solver for the density equation coupled to the
 *        quasi-steady chemoattractant.
 *
 * Diffusion is the chi0 = 0 master equation of lattice.hpp.  Chemotaxis is a
 * conservative first-order upwind flux
 *
 *   F_{i+1/2} = chi(rho_up) rho_up (S_{i+1} - S_i) / h,
 *
 * with rho_up taken from the node the cells leave (i if S_{i+1} > S_i).
 * Wall fluxes are zero, so h * sum(rho) is invariant up to round-off.
 */
#pragma once

#include "motility/elliptic.hpp"
#include "motility/lattice.hpp"
#include "motility/model.hpp"
#include "motility/plateau.hpp"
#include "motility/state.hpp"
#include "motility/stepping.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace motility {

/// Adds the upwind chemotactic flux divergence to `drho`.
inline void add_upwind_chemotaxis(std::span<const double> rho, std::span<const double> S, double h,
                                  const ModelParams& p, std::span<double> drho) {
    if (p.chi0 == 0.0) return;
    const double inv_h2 = 1.0 / (h * h);
    for (std::size_t i = 0; i + 1 < rho.size(); ++i) {
        const double dS = S[i + 1] - S[i];
        const double up = dS > 0.0 ? rho[i] : rho[i + 1];
        const double F = detail::sensitivity_raw(up, p.alpha, p.chi0) * up * dS * inv_h2;
        drho[i] -= F;
        drho[i + 1] += F;
    }
}

struct ContinuumOptions {
    double safety = 0.4;
    TimeScheme scheme = TimeScheme::Heun;
    double bound_tol = 1e-12;
    bool track_oscillations = true;
};

class ContinuumModel {
public:
    ContinuumModel(const Grid1D& grid, const ModelParams& p)
        : grid_(grid), params_(p), diffusion_params_(p), elliptic_(grid) {
        diffusion_params_.chi0 = 0.0;
    }

    void rhs(std::span<const double> rho, std::span<double> drho) {
        S_.resize(rho.size());
        elliptic_.solve(rho, S_);
        rhs_with_S(rho, S_, drho);
    }

    void rhs_with_S(std::span<const double> rho, std::span<const double> S, std::span<double> drho) {
        transition_rates(rho, S, grid_.spacing(), diffusion_params_, rates_);
        master_rhs_from_rates(rho, rates_, drho);
        add_upwind_chemotaxis(rho, S, grid_.spacing(), params_, drho);
    }

    /// safety * min(h^2 / (2 max|D|), 1 / max(T+ + T-), h / max speed) for the
    /// (rho, S) of the latest rhs call.
    [[nodiscard]] double stable_dt_cached(std::span<const double> rho, double safety) const {
        const double h = grid_.spacing();
        constexpr double eps = 1e-12;
        double maxD = 0.0, maxT = 0.0, maxSx = 0.0;
        for (std::size_t i = 0; i < rho.size(); ++i) {
            maxD = std::max(maxD, std::abs(detail::diffusivity_raw(rho[i], params_.alpha)));
            maxT = std::max(maxT, rates_.plus[i] + rates_.minus[i]);
            if (i + 1 < rho.size()) maxSx = std::max(maxSx, std::abs(S_[i + 1] - S_[i]) / h);
        }
        double dt = h * h / (2.0 * maxD + eps);
        if (maxT > 0.0) dt = std::min(dt, 1.0 / maxT);
        // |d(chi(rho) rho)/d rho| <= chi0 on [0,1].
        const double speed = params_.chi0 * maxSx;
        dt = std::min(dt, h / (speed + eps));
        return safety * dt;
    }

    Field chemoattractant(std::span<const double> rho) {
        Field S(grid_);
        elliptic_.solve(rho, S.values);
        return S;
    }

    [[nodiscard]] const Grid1D& grid() const { return grid_; }

private:
    Grid1D grid_;
    ModelParams params_;
    ModelParams diffusion_params_;
    ChemoattractantSolver elliptic_;
    TransitionRates rates_;
    std::vector<double> S_;
};

inline std::vector<double> continuum_rhs(const SimState& state, const ModelParams& p) {
    ContinuumModel model(state.rho.grid, p);
    std::vector<double> d(state.rho.size());
    model.rhs_with_S(state.rho.values, state.S.values, d);
    return d;
}

inline double stable_dt(const SimState& state, const ModelParams& p, double safety = 0.4) {
    ContinuumModel model(state.rho.grid, p);
    std::vector<double> d(state.rho.size());
    model.rhs(state.rho.values, d);
    return model.stable_dt_cached(state.rho.values, safety);
}

struct ContinuumResult {
    std::vector<SimState> snapshots;
    std::optional<HitEvent> hit;
    std::optional<SimState> hit_state;      ///< state at t_c when stopped on a hit
    std::optional<std::string> abort_reason;  ///< set when the run ended early
    Diagnostics final_diagnostics;
    std::vector<double> final_rho;
    double final_time = 0.0;
};

/// Integrate to t_end (or to the first contact with rho_flat when
/// `stop_on_hit`). On step-size underflow the snapshots gathered so far are
/// returned with `abort_reason` set.
inline ContinuumResult simulate_continuum(const Field& initial, const ModelParams& p, double t_end,
                                          std::span<const double> snapshot_times, bool stop_on_hit = false,
                                          const ContinuumOptions& opt = {}) {
    validate(p);
    check_initial_density(initial);
    check_snapshot_times(snapshot_times, t_end);

    const auto interval = unstable_interval(p);
    const double rho_flat = interval ? interval->lo : std::numeric_limits<double>::infinity();

    ContinuumModel model(initial.grid, p);
    auto rhs = [&model](std::span<const double> y, std::span<double> dy) { model.rhs(y, dy); };

    ContinuumResult result;
    std::vector<double> y = initial.values, prev, k1, k2, tmp;
    Diagnostics diag;
    std::size_t next = 0;
    double t = 0.0;

    auto make_state = [&](std::vector<double> values, double time) {
        Field rho(initial.grid, std::move(values));
        Field S = model.chemoattractant(rho.values);
        SimState s(std::move(rho), std::move(S), time);
        s.diagnostics = diag;
        update_field_stats(s);
        return s;
    };
    auto finish = [&]() {
        result.final_rho = y;
        result.final_time = t;
        SimState last = make_state(y, t);
        result.final_diagnostics = last.diagnostics;
    };

    while (next < snapshot_times.size() && snapshot_times[next] <= 0.0) {
        result.snapshots.push_back(make_state(y, snapshot_times[next++]));
    }
    if (stop_on_hit && interval) {
        const auto it = std::max_element(y.begin(), y.end());
        if (*it >= rho_flat) {
            const auto node = static_cast<std::size_t>(it - y.begin());
            result.hit = HitEvent{initial.grid.x(node), 0.0, node};
            result.hit_state = make_state(y, 0.0);
            finish();
            return result;
        }
    }

    try {
        while (t < t_end) {
            prev = y;
            const double dt = explicit_step(
                opt.scheme, rhs, [&] { return model.stable_dt_cached(y, opt.safety); }, t_end - t, y, k1, k2, tmp);
            diag.dt.record(dt);
            const auto [mn, mx] = std::minmax_element(y.begin(), y.end());
            if (*mn < -opt.bound_tol || *mx > 1.0 + opt.bound_tol) {
                if (diag.bound_violations == 0) diag.violation_dt = dt;
                ++diag.bound_violations;
                diag.worst_violation = std::max({diag.worst_violation, -*mn, *mx - 1.0});
            }
            if (!std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); })) {
                y = prev;
                throw SolverAbort("continuum: non-finite density");
            }
            if (opt.track_oscillations && !diag.oscillating && has_grid_oscillations(y)) {
                diag.oscillating = true;
                diag.oscillation_onset_time = t + dt;
                diag.oscillation_onset_level = *mx;
            }
            const double t_new = (t_end - t - dt <= 1e-14 * std::max(1.0, t_end)) ? t_end : t + dt;

            if (stop_on_hit && interval && *mx >= rho_flat) {
                // Earliest node crossing within the step, by linear interpolation in time.
                double theta_best = 2.0;
                std::size_t node = 0;
                for (std::size_t i = 0; i < y.size(); ++i) {
                    if (y[i] >= rho_flat) {
                        const double theta = prev[i] >= rho_flat ? 0.0 : (rho_flat - prev[i]) / (y[i] - prev[i]);
                        if (theta < theta_best) {
                            theta_best = theta;
                            node = i;
                        }
                    }
                }
                // Symmetric data cross at two neighbouring nodes together; report the midpoint.
                double x_c = initial.grid.x(node);
                if (node + 1 < y.size() && y[node + 1] >= rho_flat && prev[node + 1] < rho_flat) {
                    const double theta = (rho_flat - prev[node + 1]) / (y[node + 1] - prev[node + 1]);
                    if (std::abs(theta - theta_best) <= 1e-9) x_c = 0.5 * (x_c + initial.grid.x(node + 1));
                }
                const double t_c = t + theta_best * (t_new - t);
                while (next < snapshot_times.size() && snapshot_times[next] <= t_c) {
                    const double theta = (snapshot_times[next] - t) / (t_new - t);
                    result.snapshots.push_back(make_state(lerp_state(prev, y, theta), snapshot_times[next]));
                    ++next;
                }
                std::vector<double> at_hit = lerp_state(prev, y, theta_best);
                at_hit[node] = rho_flat;
                result.hit = HitEvent{x_c, t_c, node};
                result.hit_state = make_state(at_hit, t_c);
                y = std::move(at_hit);
                t = t_c;
                finish();
                return result;
            }

            while (next < snapshot_times.size() && snapshot_times[next] <= t_new) {
                const double theta = (snapshot_times[next] - t) / (t_new - t);
                result.snapshots.push_back(make_state(lerp_state(prev, y, theta), snapshot_times[next]));
                ++next;
            }
            t = t_new;
        }
    } catch (const SolverAbort& e) {
        result.abort_reason = e.what();
    }
    finish();
    return result;
}

/// (2/L) * integral of (rho - rho_bar) cos(k pi x / L), trapezoid rule.
inline double cosine_coefficient(std::span<const double> rho, double rho_bar, double k, const Grid1D& grid) {
    const double L = grid.length();
    std::vector<double> f(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) {
        f[i] = (rho[i] - rho_bar) * std::cos(k * std::numbers::pi * grid.x(i) / L);
    }
    return 2.0 / L * trapezoid(f, grid.spacing());
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::size_t samples = 0;
};

inline LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
    LinearFit fit;
    const std::size_t n = x.size();
    fit.samples = n;
    if (n < 2) return fit;
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / static_cast<double>(n), my = sy / static_cast<double>(n);
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return fit;
}

struct GrowthWindow {
    double t_start = 0.0;
    double t_end = 1.0;
    std::size_t samples = 40;
};

/// Fitted exponential rate of the k-th cosine mode started at amplitude eps.
inline double measure_growth_rate(double rho_bar, double k, double eps, const ModelParams& p,
                                  const GrowthWindow& window, std::size_t n = 201) {
    if (!(eps > 0.0 && eps <= 1e-3)) throw ValidationError("measure_growth_rate: eps must lie in (0, 1e-3]");
    if (rho_bar - eps < 0.0 || rho_bar + eps > 1.0) throw ValidationError("measure_growth_rate: rho_bar +- eps outside [0,1]");
    if (!(window.t_end > window.t_start && window.t_start >= 0.0 && window.samples >= 2)) {
        throw ValidationError("measure_growth_rate: bad fit window");
    }
    const Grid1D grid(n, p.L);
    Field init(grid);
    for (std::size_t i = 0; i < n; ++i) {
        init[i] = rho_bar + eps * std::cos(k * std::numbers::pi * grid.x(i) / p.L);
    }
    std::vector<double> times(window.samples);
    for (std::size_t j = 0; j < window.samples; ++j) {
        times[j] = window.t_start + (window.t_end - window.t_start) * static_cast<double>(j) /
                                        static_cast<double>(window.samples - 1);
    }
    times.back() = window.t_end;
    ContinuumOptions opt;
    opt.track_oscillations = false;
    const auto run = simulate_continuum(init, p, window.t_end, times, false, opt);
    if (run.abort_reason) throw SolverAbort("measure_growth_rate: " + *run.abort_reason);

    std::vector<double> ts, logs;
    for (const auto& s : run.snapshots) {
        const double a = std::abs(cosine_coefficient(s.rho.values, rho_bar, k, grid));
        if (a < 1e-13) throw NoRootError("measure_growth_rate: mode amplitude below round-off");
        if (a > 10.0 * eps) break;  // beyond the linear regime
        ts.push_back(s.t);
        logs.push_back(std::log(a));
    }
    if (ts.size() < 2) throw NoRootError("measure_growth_rate: too few samples in the linear regime");
    return fit_line(ts, logs).slope;
}

}  // namespace motility
