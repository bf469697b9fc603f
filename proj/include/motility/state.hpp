/**
 * @file state.hpp
 * @brief Simulation snapshots shared by the lattice and continuum solvers.
 */
#pragma once

#include "motility/grid.hpp"
#include "motility/stepping.hpp"

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace motility {

struct Diagnostics {
    double mass = 0.0;          ///< h * sum(rho), conserved exactly by the flux-form schemes
    double trapezoid_mass = 0.0;
    double min_rho = 0.0;
    double max_rho = 0.0;
    StepStats dt;
    std::size_t clamp_events = 0;      ///< negative chemotactic factors clamped to zero
    std::size_t bound_violations = 0;  ///< steps leaving [0,1]
    double worst_violation = 0.0;
    double violation_dt = 0.0;         ///< step size of the first violation
    bool oscillating = false;
    double oscillation_onset_time = std::numeric_limits<double>::quiet_NaN();
    double oscillation_onset_level = std::numeric_limits<double>::quiet_NaN();
};

/// (rho, S, t) plus running diagnostics. Used for both lattice and continuum runs.
struct SimState {
    Field rho;
    Field S;
    double t = 0.0;
    Diagnostics diagnostics;

    SimState(Field r, Field s, double time) : rho(std::move(r)), S(std::move(s)), t(time) {}
};

using LatticeState = SimState;

/// First contact of the density with the lower end of the unstable interval.
struct HitEvent {
    double x_c;
    double t_c;
    std::size_t node;
};

inline void update_field_stats(SimState& s) {
    s.diagnostics.mass = site_mass(s.rho.values, s.rho.grid.spacing());
    s.diagnostics.trapezoid_mass = trapezoid(s.rho.values, s.rho.grid.spacing());
    s.diagnostics.min_rho = s.rho.min();
    s.diagnostics.max_rho = s.rho.max();
}

}  // namespace motility
