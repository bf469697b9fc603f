/**
 * @file run.hpp
 * @brief Experiment orchestration behind the command line: dispatch to a
 *        solver, collect snapshots and a summary record, continuum-to-Stefan
 *        handoff.
 */
#pragma once

#include "motility/config.hpp"
#include "motility/continuum.hpp"
#include "motility/elliptic.hpp"
#include "motility/lattice.hpp"
#include "motility/output.hpp"
#include "motility/plateau.hpp"
#include "motility/steady.hpp"
#include "motility/stefan.hpp"

#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace motility {

struct RunOutcome {
    SnapshotSeries series;
    std::optional<SnapshotSeries> direct;  ///< overlay run when stefan.compare_direct is set
    json summary = json::object();
    std::optional<std::string> abort_reason;

    [[nodiscard]] int exit_code() const { return abort_reason ? 1 : 0; }
};

namespace detail {

inline json nan_to_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline SnapshotRecord record_from(const SimState& s, const ModelParams& p) {
    SnapshotRecord r;
    r.t = s.t;
    r.x = s.rho.grid.nodes();
    r.rho = s.rho.values;
    r.S = s.S.values;
    r.diagnostics = {{"mass", s.diagnostics.mass},
                     {"min_rho", s.diagnostics.min_rho},
                     {"max_rho", s.diagnostics.max_rho},
                     {"plateaus", count_plateaus(s.rho.values, p)}};
    return r;
}

inline SnapshotRecord record_from(const StefanSnapshot& s, const ModelParams& p) {
    SnapshotRecord r;
    r.t = s.decomposition.t;
    r.x = s.rho.grid.nodes();
    r.rho = s.rho.values;
    r.S = s.S.values;
    r.boundaries = s.decomposition.boundaries();
    r.diagnostics = {{"mass", s.decomposition.mass()},
                     {"phases", s.decomposition.phases.size()},
                     {"plateaus", s.decomposition.high_phase_count()},
                     {"max_rho", s.rho.max()},
                     {"min_rho", s.rho.min()}};
    (void)p;
    return r;
}

inline json edges_json(std::span<const double> rho, double h, const ModelParams& p) {
    json out = json::array();
    for (const auto& e : detect_plateau_edges(rho, h, p)) {
        out.push_back({{"x", e.x}, {"left_value", e.left_value}, {"right_value", e.right_value}});
    }
    return out;
}

inline json diagnostics_json(const Diagnostics& d) {
    return {{"steps", d.dt.steps},
            {"dt_min", nan_to_null(d.dt.dt_min)},
            {"dt_max", d.dt.dt_max},
            {"bound_violations", d.bound_violations},
            {"worst_violation", d.worst_violation},
            {"clamp_events", d.clamp_events},
            {"oscillation_onset_time", nan_to_null(d.oscillation_onset_time)},
            {"oscillation_onset_level", nan_to_null(d.oscillation_onset_level)}};
}

inline json hit_json(const HitEvent& h) { return {{"x_c", h.x_c}, {"t_c", h.t_c}, {"node", h.node}}; }

inline json base_metadata(const RunConfig& c, std::size_t n) {
    const Grid1D g(n, c.params.L);
    return {{"config", to_json(c)},
            {"code_version", kCodeVersion},
            {"solver", to_string(c.solver)},
            {"grid", {{"n", n}, {"L", c.params.L}, {"h", g.spacing()}}}};
}

/// Configured snapshot times with t_end appended, so the run always ends on a snapshot.
inline std::vector<double> times_with_end(const std::vector<double>& times, double t_end) {
    std::vector<double> out = times;
    if (out.empty() || out.back() < t_end) out.push_back(t_end);
    return out;
}

inline void run_lattice(const RunConfig& c, RunOutcome& out) {
    const Field init = make_initial(c.initial, Grid1D(c.n, c.params.L));
    const double m0 = site_mass(init.values, init.grid.spacing());
    const auto times = times_with_end(c.snapshot_times, c.t_end);
    try {
        const auto states = simulate_lattice(init, c.params, c.t_end, times);
        for (std::size_t k = 0; k < c.snapshot_times.size(); ++k) out.series.records.push_back(record_from(states[k], c.params));
        const auto& last = states.back();
        out.summary["final_time"] = last.t;
        out.summary["initial_mass"] = m0;
        out.summary["final_mass"] = last.diagnostics.mass;
        out.summary["relative_mass_drift"] = std::abs(last.diagnostics.mass - m0) / m0;
        out.summary["plateau_count"] = count_plateaus(last.rho.values, c.params);
        out.summary["plateau_edges"] = edges_json(last.rho.values, init.grid.spacing(), c.params);
        out.summary["diagnostics"] = diagnostics_json(last.diagnostics);
    } catch (const SolverAbort& e) {
        out.abort_reason = e.what();
    }
}

inline void summarize_continuum(const ContinuumResult& r, const Field& init, const ModelParams& p, json& s) {
    const double m0 = site_mass(init.values, init.grid.spacing());
    const double m1 = site_mass(r.final_rho, init.grid.spacing());
    s["final_time"] = r.final_time;
    s["initial_mass"] = m0;
    s["final_mass"] = m1;
    s["relative_mass_drift"] = std::abs(m1 - m0) / m0;
    s["plateau_count"] = count_plateaus(r.final_rho, p);
    s["plateau_edges"] = edges_json(r.final_rho, init.grid.spacing(), p);
    s["diagnostics"] = diagnostics_json(r.final_diagnostics);
    s["hit"] = r.hit ? hit_json(*r.hit) : json(nullptr);
}

inline void run_continuum(const RunConfig& c, RunOutcome& out) {
    const Field init = make_initial(c.initial, Grid1D(c.n, c.params.L));
    const auto r = simulate_continuum(init, c.params, c.t_end, c.snapshot_times, c.stop_on_hit);
    for (const auto& s : r.snapshots) out.series.records.push_back(record_from(s, c.params));
    summarize_continuum(r, init, c.params, out.summary);
    if (r.abort_reason) out.abort_reason = *r.abort_reason;
}

/// L1 distance of two fields on the same grid, ignoring points within
/// `margin` of any listed edge.
inline double l1_away_from(const Field& a, const Field& b, std::span<const double> edges, double margin) {
    const double h = a.grid.spacing();
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double x = a.grid.x(i);
        const bool near = std::any_of(edges.begin(), edges.end(), [&](double e) { return std::abs(x - e) <= margin; });
        if (!near) sum += h * std::abs(a[i] - b[i]);
    }
    return sum;
}

inline void run_stefan(const RunConfig& c, RunOutcome& out) {
    const ModelParams& p = c.params;
    StefanOptions opt;
    opt.nodes_per_phase = c.stefan.nodes_per_phase;
    opt.global_nodes = c.stefan.global_nodes ? c.stefan.global_nodes : c.n;
    opt.spike_width = c.stefan.spike_width;

    std::optional<SimState> hit_state;
    std::optional<HitEvent> hit;
    std::optional<Field> init;
    if (c.stefan.start) {
        const auto& st = *c.stefan.start;
        Field rho(Grid1D(st.rho.size(), p.L), st.rho);
        Field S = solve_chemoattractant(rho);
        hit_state.emplace(std::move(rho), std::move(S), st.t_c);
        update_field_stats(*hit_state);
        hit = HitEvent{st.x_c, st.t_c, st.node};
    } else {
        init = make_initial(c.initial, Grid1D(c.n, p.L));
        const auto r = simulate_continuum(*init, p, c.t_end, c.snapshot_times, true);
        for (const auto& s : r.snapshots) out.series.records.push_back(record_from(s, p));
        out.summary["continuum"] = json::object();
        summarize_continuum(r, *init, p, out.summary["continuum"]);
        if (r.abort_reason) {
            out.abort_reason = "continuum: " + *r.abort_reason;
            return;
        }
        if (!r.hit) {
            out.summary["hit"] = nullptr;
            out.summary["note"] = "density never reached the unstable interval; no Stefan continuation";
            return;
        }
        hit = r.hit;
        hit_state = *r.hit_state;
    }
    out.summary["hit"] = hit_json(*hit);

    std::vector<double> times;
    for (double t : c.snapshot_times) {
        if (t > hit->t_c) times.push_back(t);
    }
    InsertionReport report;
    StefanResult s;
    try {
        s = simulate_stefan(*hit_state, *hit, p, c.t_end, times, opt, &report);
    } catch (const UnsupportedGeometryError& e) {
        out.abort_reason = std::string("stefan: ") + e.what();
        return;
    }
    for (const auto& snap : s.snapshots) out.series.records.push_back(record_from(snap, p));

    json events = json::array();
    for (const auto& e : s.events) {
        events.push_back({{"kind", to_string(e.kind)}, {"t", e.t}, {"x", e.x}, {"mass_change", e.mass_change}, {"note", e.note}});
    }
    out.summary["insertion"] = {{"inserted_mass", report.inserted_mass},
                                {"boundary_overwrite_mass", report.boundary_overwrite_mass},
                                {"total_change", report.total_change},
                                {"relative_change", report.total_change / hit_state->diagnostics.mass}};
    out.summary["stefan"] = {{"initial_mass", s.initial_mass},
                             {"final_mass", s.final_mass},
                             {"max_relative_mass_drift", s.max_relative_mass_drift},
                             {"max_low_phase_value", s.max_low_phase_value},
                             {"min_high_phase_value", s.min_high_phase_value},
                             {"dirichlet_pinned", s.dirichlet_pinned},
                             {"final_time", s.final_state.t},
                             {"final_boundaries", s.final_state.boundaries()},
                             {"plateau_count", s.final_state.high_phase_count()},
                             {"steps", s.dt.steps},
                             {"events", events}};
    if (s.abort_reason) out.abort_reason = "stefan: " + *s.abort_reason;

    if (c.stefan.compare_direct) {
        // Direct run on the Stefan assembly grid, sampled at the same times.
        SnapshotSeries direct;
        json cmp = json::array();
        ContinuumResult d;
        const Grid1D g(opt.global_nodes, p.L);
        if (init && init->size() == opt.global_nodes) {
            d = simulate_continuum(*init, p, c.t_end, times);
        } else {
            // Restart from the hit state, shifting the clock by t_c.
            Field start(g);
            for (std::size_t i = 0; i < g.size(); ++i) {
                start[i] = interp_uniform(hit_state->rho.values, hit_state->rho.grid.spacing(), g.x(i));
            }
            std::vector<double> shifted;
            for (double t : times) shifted.push_back(t - hit->t_c);
            d = simulate_continuum(start, p, c.t_end - hit->t_c, shifted);
            for (auto& st : d.snapshots) st.t += hit->t_c;
        }
        direct.metadata = base_metadata(c, opt.global_nodes);
        direct.metadata["role"] = "direct overlay";
        for (const auto& snap : d.snapshots) direct.records.push_back(record_from(snap, p));
        for (std::size_t k = 0; k < s.snapshots.size() && k < d.snapshots.size(); ++k) {
            const auto& a = s.snapshots[k];
            const auto& b = d.snapshots[k];
            std::vector<double> edges = a.decomposition.boundaries();
            for (const auto& e : detect_plateau_edges(b.rho.values, g.spacing(), p)) edges.push_back(e.x);
            const double l1 = l1_away_from(a.rho, b.rho, edges, 0.5);
            const double mass = site_mass(b.rho.values, g.spacing());
            cmp.push_back({{"t", b.t}, {"l1_away_from_edges", l1}, {"relative_to_mass", l1 / mass}});
        }
        out.summary["comparison"] = cmp;
        out.direct = std::move(direct);
    }
}

inline void run_steady(const RunConfig& c, RunOutcome& out) {
    const ModelParams& p = c.params;
    SteadyProfile prof{{}, {}, Field(Grid1D(3, p.L)), Field(Grid1D(3, p.L)), {}, {}};
    try {
        if (c.steady.kind == "plateau") {
            prof = construct_plateau_steady(c.steady.half_width, p, c.n);
        } else {
            const double C = c.steady.C ? *c.steady.C : constant_for_critical_point(*c.steady.rho_c, p);
            out.summary["C"] = C;
            out.summary["min_domain_length"] = min_domain_length(C, p, c.steady.branch);
            prof = construct_smooth_steady(C, p.L, c.steady.half_periods, p, c.n, c.steady.branch);
        }
    } catch (const NoRootError& e) {
        out.abort_reason = std::string("steady: ") + e.what();
        return;
    }
    SimState s0(prof.rho, prof.S, 0.0);
    update_field_stats(s0);
    out.series.records.push_back(record_from(s0, p));

    json segs = json::array(), jumps = json::array();
    for (const auto& sg : prof.segments) segs.push_back({{"x_begin", sg.x_begin}, {"x_end", sg.x_end}, {"C", sg.C}});
    for (const auto& j : prof.jumps) jumps.push_back({{"x", j.x}, {"left_value", j.left_value}, {"right_value", j.right_value}});
    out.summary["segments"] = segs;
    out.summary["jumps"] = jumps;
    out.summary["residuals"] = {{"max_flux_residual", prof.residuals.max_flux_residual},
                                {"relative_flux_residual", prof.residuals.relative_flux_residual},
                                {"max_G_residual", prof.residuals.max_G_residual},
                                {"wall_gradient_ratio", prof.residuals.wall_gradient_ratio}};
    const auto report = verify_weak_steady(prof, p);
    out.summary["weak_steady"] = {{"max_K_jump", report.max_K_jump},
                                  {"max_flux_mismatch", report.max_flux_mismatch},
                                  {"max_segment_residual", report.max_segment_residual},
                                  {"tolerance", report.tolerance},
                                  {"pass", report.pass}};
    if (c.steady.evolve_time > 0.0) {
        const std::vector<double> times{c.steady.evolve_time};
        const auto r = simulate_continuum(prof.rho, p, c.steady.evolve_time, times);
        if (r.abort_reason) {
            out.abort_reason = "steady evolution: " + *r.abort_reason;
            return;
        }
        double drift = 0.0;
        for (std::size_t i = 0; i < prof.rho.size(); ++i) drift = std::max(drift, std::abs(r.final_rho[i] - prof.rho[i]));
        out.summary["evolved_sup_drift"] = drift;
        for (const auto& s : r.snapshots) out.series.records.push_back(record_from(s, p));
    }
}

inline void run_stability(const RunConfig& c, RunOutcome& out) {
    const ModelParams& p = c.params;
    double rho_bar = 0.0;
    if (c.rho_bar) {
        rho_bar = *c.rho_bar;
    } else {
        const Field init = make_initial(c.initial, Grid1D(c.n, p.L));
        rho_bar = trapezoid(init.values, init.grid.spacing()) / p.L;
    }
    const auto s = stability_predicates(rho_bar, p);
    out.summary["rho_bar"] = rho_bar;
    out.summary["region"] = to_string(classify_region(p.alpha, p.chi0));
    out.summary["theorem1"] = {{"holds", s.theorem1}, {"lhs", s.theorem1_lhs}, {"rhs", s.theorem1_rhs}};
    out.summary["theorem2"] = {{"holds", s.theorem2}, {"lhs", s.theorem2_lhs}, {"rhs", s.theorem2_rhs}};
    if (const auto I = unstable_interval(p)) {
        out.summary["unstable_interval"] = {I->lo, I->hi};
    } else {
        out.summary["unstable_interval"] = nullptr;
    }
    try {
        out.summary["critical_chi0"] = critical_curve_chi0(p.alpha);
    } catch (const std::exception&) {
        out.summary["critical_chi0"] = nullptr;
    }
    try {
        out.summary["dominant_wavemode"] = dominant_wavemode(rho_bar, p);
    } catch (const std::exception& e) {
        out.summary["dominant_wavemode"] = e.what();
    }
    if (diffusivity(rho_bar, p) > 0.0) {
        json rates = json::array();
        for (int k = 1; k <= 10; ++k) rates.push_back({{"k", k}, {"rate", dispersion_rate(k, rho_bar, p)}});
        out.summary["dispersion"] = rates;
    }
}

}  // namespace detail

/// Run the configured solver. Validation problems throw ValidationError;
/// solver failures are reported through `abort_reason` with the snapshots
/// gathered so far.
inline RunOutcome execute(const RunConfig& c) {
    validate(c.params);
    RunOutcome out;
    out.series.metadata = detail::base_metadata(c, c.n);
    switch (c.solver) {
        case SolverKind::Lattice: detail::run_lattice(c, out); break;
        case SolverKind::Continuum: detail::run_continuum(c, out); break;
        case SolverKind::Stefan: detail::run_stefan(c, out); break;
        case SolverKind::Steady: detail::run_steady(c, out); break;
        case SolverKind::Stability: detail::run_stability(c, out); break;
    }
    out.summary["solver"] = to_string(c.solver);
    out.summary["name"] = c.name;
    out.summary["aborted"] = out.abort_reason.has_value();
    out.summary["abort_reason"] = out.abort_reason ? json(*out.abort_reason) : json(nullptr);
    out.series.metadata["aborted"] = out.abort_reason.has_value();
    return out;
}

/// series files, summary.json, and the overlay run under direct/.
inline void write_outcome(const RunOutcome& out, const std::filesystem::path& dir) {
    write_series(out.series, dir);
    if (out.direct) write_series(*out.direct, dir / "direct");
    detail::write_text(dir / "summary.json", out.summary.dump(2) + "\n");
}

/// Continuum run up to the first contact with rho_flat, packaged as a
/// ready-to-run Stefan configuration.
inline RunConfig handoff(const RunConfig& source) {
    if (!unstable_interval(source.params)) throw ValidationError("params.alpha: handoff needs alpha > 3/4");
    const Field init = make_initial(source.initial, Grid1D(source.n, source.params.L));
    const auto r = simulate_continuum(init, source.params, source.t_end, {}, true);
    if (r.abort_reason) throw SolverAbort("handoff: " + *r.abort_reason);
    if (!r.hit) throw NoRootError("handoff: the density never reached the unstable interval before t_end");
    RunConfig c = source;
    c.solver = SolverKind::Stefan;
    c.name = source.name + "_stefan";
    c.output = source.output + "_stefan";
    c.stop_on_hit = false;
    c.stefan.global_nodes = c.stefan.global_nodes ? c.stefan.global_nodes : source.n;
    c.stefan.start = HitStart{r.hit->t_c, r.hit->x_c, r.hit->node, r.hit_state->rho.values};
    c.snapshot_times.clear();
    for (double t : source.snapshot_times) {
        if (t >= r.hit->t_c) c.snapshot_times.push_back(t);
    }
    return c;
}

}  // namespace motility
