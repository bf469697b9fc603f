/**
 * @file stepping.hpp
 * @brief Explicit Heun (RK2) / forward-Euler stepping with snapshot
 *        interpolation, shared by the lattice and continuum solvers.
 */
#pragma once

#include "motility/errors.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <sstream>
#include <vector>

namespace motility {

enum class TimeScheme { Heun, Euler };

/// Step-size floor below which a run is declared stiff and aborted.
inline constexpr double kMinTimeStep = 1e-12;

struct StepStats {
    std::size_t steps = 0;
    double dt_min = std::numeric_limits<double>::infinity();
    double dt_max = 0.0;
    double dt_last = 0.0;

    void record(double dt) {
        ++steps;
        dt_min = std::min(dt_min, dt);
        dt_max = std::max(dt_max, dt);
        dt_last = dt;
    }
};

inline void check_snapshot_times(std::span<const double> times, double t_end) {
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < 0.0 || times[i] > t_end) {
            std::ostringstream os;
            os << "snapshot time " << times[i] << " outside [0, " << t_end << "]";
            throw ValidationError(os.str());
        }
        if (i > 0 && !(times[i] > times[i - 1])) {
            throw ValidationError("snapshot times must be strictly increasing");
        }
    }
}

/// One explicit step of y' = rhs(y). The step size is chosen after the first
/// stage by `dt_after_stage1()` (so it can reuse quantities cached by rhs),
/// then capped at `dt_cap`. Returns the step taken.
template <class Rhs, class DtFn>
double explicit_step(TimeScheme scheme, Rhs&& rhs, DtFn&& dt_after_stage1, double dt_cap,
                     std::vector<double>& y, std::vector<double>& k1, std::vector<double>& k2,
                     std::vector<double>& tmp) {
    const std::size_t n = y.size();
    k1.resize(n);
    rhs(std::span<const double>(y), std::span<double>(k1));
    double dt = dt_after_stage1();
    if (!(dt >= kMinTimeStep)) {
        std::ostringstream os;
        os << "time step underflow (dt = " << dt << ")";
        throw SolverAbort(os.str());
    }
    dt = std::min(dt, dt_cap);
    if (scheme == TimeScheme::Euler) {
        for (std::size_t i = 0; i < n; ++i) y[i] += dt * k1[i];
        return dt;
    }
    tmp.resize(n);
    k2.resize(n);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + dt * k1[i];
    rhs(std::span<const double>(tmp), std::span<double>(k2));
    for (std::size_t i = 0; i < n; ++i) y[i] += 0.5 * dt * (k1[i] + k2[i]);
    return dt;
}

/// Linear interpolation between two states at fraction theta of the step.
inline std::vector<double> lerp_state(std::span<const double> a, std::span<const double> b, double theta) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + theta * (b[i] - a[i]);
    return out;
}

}  // namespace motility
