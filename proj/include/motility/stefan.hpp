/**
 * @file stefan.hpp
 * @brief Multi-phase Stefan continuation for the ill-posed regime.
 *
 * The domain [0, L] is tiled by phases alternating low / high density,
 * starting and ending with a low phase.  Each phase carries its own field on
 * a uniform grid of the reference interval [0, 1]; a phase occupying
 * [a(t), b(t)] with width w = b - a evolves by the rescaled equation
 *
 *   d(w rho)/dt = d/dxi [ K(rho)_xi / w - chi(rho) rho S_x + c(xi) rho ],
 *   c(xi) = a'(t) (1 - xi) + b'(t) xi,
 *
 * which is the moving-frame form of the density equation written as a
 * conservation law in xi.  Interfaces carry Dirichlet values (jump_low on the
 * low side, jump_high on the high side); the outer walls are no-flux.
 * Interfaces move with the Rankine-Hugoniot speed
 *
 *   s' = -(Phi(s-) - Phi(s+)) / (rho(s-) - rho(s+)),  Phi = D rho_x - chi rho S_x,
 *
 * using one-sided second-order gradients.  S comes from the global elliptic
 * solve on a uniform grid after interpolating all phases onto it.
 */
#pragma once

#include "motility/elliptic.hpp"
#include "motility/model.hpp"
#include "motility/state.hpp"
#include "motility/stepping.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace motility {

enum class PhaseKind { Low, High };

inline const char* to_string(PhaseKind k) { return k == PhaseKind::Low ? "low" : "high"; }

struct Phase {
    PhaseKind kind = PhaseKind::Low;
    std::vector<double> values;  ///< uniform samples on [0, 1]
    double left_x = 0.0;
    double right_x = 0.0;

    [[nodiscard]] double width() const { return right_x - left_x; }
    [[nodiscard]] double spacing() const { return 1.0 / static_cast<double>(values.size() - 1); }
    [[nodiscard]] double x(std::size_t j) const {
        return left_x + width() * static_cast<double>(j) * spacing();
    }
    /// Linear interpolation at physical position x inside the phase.
    [[nodiscard]] double at(double xp) const {
        const double w = width();
        if (w <= 0.0) return values.front();
        const double pos = std::clamp((xp - left_x) / w, 0.0, 1.0) * static_cast<double>(values.size() - 1);
        const auto j = std::min(static_cast<std::size_t>(pos), values.size() - 2);
        const double t = pos - static_cast<double>(j);
        return values[j] + t * (values[j + 1] - values[j]);
    }
    [[nodiscard]] double mass() const { return width() * trapezoid(values, spacing()); }
};

struct PhaseDecomposition {
    std::vector<Phase> phases;
    double t = 0.0;
    double L = 0.0;

    /// Interior interface positions s_1 < ... < s_{2m}.
    [[nodiscard]] std::vector<double> boundaries() const {
        std::vector<double> s;
        for (std::size_t p = 0; p + 1 < phases.size(); ++p) s.push_back(phases[p].right_x);
        return s;
    }
    [[nodiscard]] double mass() const {
        double m = 0.0;
        for (const auto& ph : phases) m += ph.mass();
        return m;
    }
    [[nodiscard]] std::size_t high_phase_count() const {
        return static_cast<std::size_t>(std::count_if(phases.begin(), phases.end(),
                                                      [](const Phase& p) { return p.kind == PhaseKind::High; }));
    }
};

struct StefanOptions {
    std::size_t nodes_per_phase = 100;
    std::size_t global_nodes = 1200;  ///< uniform grid for the elliptic solve
    double spike_width = 0.0;         ///< w0; 0 selects one global grid spacing
    double safety = 0.4;
    TimeScheme scheme = TimeScheme::Heun;
    /// Low-phase hits closer than this many phase nodes to an interface are
    /// logged as bound violations instead of spawning a new spike.
    std::size_t hit_margin_nodes = 3;
};

struct StefanEvent {
    enum class Kind { Insertion, Collapse, Merge, LowBoundViolation, HighBoundViolation };
    Kind kind;
    double t;
    double x;
    double mass_change = 0.0;  ///< decomposition mass after minus before
    std::string note;
};

inline const char* to_string(StefanEvent::Kind k) {
    switch (k) {
        case StefanEvent::Kind::Insertion: return "insertion";
        case StefanEvent::Kind::Collapse: return "collapse";
        case StefanEvent::Kind::Merge: return "merge";
        case StefanEvent::Kind::LowBoundViolation: return "low_bound_violation";
        case StefanEvent::Kind::HighBoundViolation: return "high_bound_violation";
    }
    return "?";
}

struct InsertionReport {
    double inserted_mass = 0.0;           ///< w0 * jump_high minus the displaced density
    double boundary_overwrite_mass = 0.0; ///< change from pinning the facing nodes to jump_low
    double total_change = 0.0;            ///< decomposition mass minus source mass
};

namespace detail {

/// Density source for phase construction: physical position -> density.
using Sampler = std::function<double(double)>;

inline Phase sample_phase(PhaseKind kind, double a, double b, std::size_t N, const Sampler& f) {
    Phase ph;
    ph.kind = kind;
    ph.left_x = a;
    ph.right_x = b;
    ph.values.resize(N);
    for (std::size_t j = 0; j < N; ++j) {
        const double x = j + 1 == N ? b : a + (b - a) * static_cast<double>(j) / static_cast<double>(N - 1);
        ph.values[j] = f(x);
    }
    return ph;
}

inline double integrate_sampler(const Sampler& f, double a, double b, std::size_t pieces = 64) {
    if (b <= a) return 0.0;
    const double dx = (b - a) / static_cast<double>(pieces);
    double s = 0.5 * (f(a) + f(b));
    for (std::size_t k = 1; k < pieces; ++k) s += f(a + dx * static_cast<double>(k));
    return s * dx;
}

/// Split phase `index` of `d` at x_c, inserting a high phase of width w0.
inline InsertionReport split_phase(PhaseDecomposition& d, std::size_t index, double x_c, double w0,
                                   const Sampler& source, const ModelParams& p, std::size_t N) {
    const Phase host = d.phases[index];
    if (host.kind != PhaseKind::Low) throw UnsupportedGeometryError("insert_spike: hit is not inside a low phase");
    const double a = host.left_x, b = host.right_x;
    const double sl = x_c - 0.5 * w0, sr = x_c + 0.5 * w0;
    if (!(sl > a && sr < b)) {
        throw UnsupportedGeometryError("insert_spike: spike would touch a wall or an existing interface");
    }
    const bool host_left_wall = index == 0;
    const bool host_right_wall = index + 1 == d.phases.size();
    (void)host_left_wall;
    (void)host_right_wall;

    Phase left = sample_phase(PhaseKind::Low, a, sl, N, source);
    Phase right = sample_phase(PhaseKind::Low, sr, b, N, source);
    Phase mid = sample_phase(PhaseKind::High, sl, sr, N, [&](double) { return p.jump_high; });
    // Keep the host's own Dirichlet values on its outer ends.
    left.values.front() = host.values.front();
    right.values.back() = host.values.back();

    InsertionReport rep;
    rep.inserted_mass = w0 * p.jump_high - integrate_sampler(source, sl, sr);
    const double before_overwrite = left.mass() + right.mass();
    left.values.back() = p.jump_low;
    right.values.front() = p.jump_low;
    rep.boundary_overwrite_mass = left.mass() + right.mass() - before_overwrite;

    const double host_mass = host.mass();
    d.phases.erase(d.phases.begin() + static_cast<std::ptrdiff_t>(index));
    d.phases.insert(d.phases.begin() + static_cast<std::ptrdiff_t>(index), {left, mid, right});
    rep.total_change = left.mass() + mid.mass() + right.mass() - host_mass;
    return rep;
}

/// S_x on the global grid as a piecewise-linear function through face
/// midpoints, vanishing at the walls.
class GradientProfile {
public:
    void build(std::span<const double> S, double h, double L) {
        const std::size_t n = S.size();
        xs_.resize(n + 1);
        gs_.resize(n + 1);
        xs_[0] = 0.0;
        gs_[0] = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            xs_[i + 1] = (static_cast<double>(i) + 0.5) * h;
            gs_[i + 1] = (S[i + 1] - S[i]) / h;
        }
        xs_[n] = L;
        gs_[n] = 0.0;
        h_ = h;
        max_abs_ = 0.0;
        for (double g : gs_) max_abs_ = std::max(max_abs_, std::abs(g));
    }
    [[nodiscard]] double at(double x) const {
        if (x <= 0.0 || x >= xs_.back()) return 0.0;
        // Face i+1/2 sits at (i + 0.5) h.
        const double pos = x / h_ - 0.5;
        if (pos < 0.0) return gs_[1] * (x / xs_[1]);
        const auto i = static_cast<std::size_t>(pos);
        if (i + 2 >= xs_.size()) {
            const double x0 = xs_[xs_.size() - 2];
            return gs_[gs_.size() - 2] * (xs_.back() - x) / (xs_.back() - x0);
        }
        const double t = pos - static_cast<double>(i);
        return gs_[i + 1] + t * (gs_[i + 2] - gs_[i + 1]);
    }
    [[nodiscard]] double max_abs() const { return max_abs_; }

private:
    std::vector<double> xs_, gs_;
    double h_ = 1.0;
    double max_abs_ = 0.0;
};

}  // namespace detail

/// Decomposition with a single low phase sampled from a global field.
inline PhaseDecomposition single_phase(const Field& rho, double t, std::size_t nodes_per_phase) {
    PhaseDecomposition d;
    d.t = t;
    d.L = rho.grid.length();
    const double h = rho.grid.spacing();
    d.phases.push_back(detail::sample_phase(PhaseKind::Low, 0.0, d.L, nodes_per_phase,
                                            [&](double x) { return interp_uniform(rho.values, h, x); }));
    return d;
}

/// Continue a direct solution past its first contact with rho_flat: split
/// the domain at x_c into low / high / low phases.
inline PhaseDecomposition insert_spike(const SimState& state, const HitEvent& hit, const ModelParams& p,
                                       const StefanOptions& opt = {}, InsertionReport* report = nullptr) {
    const double L = state.rho.grid.length();
    const double h = state.rho.grid.spacing();
    if (!(hit.x_c > 0.0 && hit.x_c < L)) throw UnsupportedGeometryError("insert_spike: hit at a wall");
    const double w0 = opt.spike_width > 0.0 ? opt.spike_width : h;
    PhaseDecomposition d;
    d.t = hit.t_c;
    d.L = L;
    const detail::Sampler source = [&](double x) { return interp_uniform(state.rho.values, h, x); };
    // Host phase: the whole domain, at full source resolution.
    d.phases.push_back(detail::sample_phase(PhaseKind::Low, 0.0, L, opt.nodes_per_phase, source));
    const double source_mass = trapezoid(state.rho.values, h);
    auto rep = detail::split_phase(d, 0, hit.x_c, w0, source, p, opt.nodes_per_phase);
    rep.total_change = d.mass() - source_mass;
    if (report) *report = rep;
    return d;
}

/// Insert a further spike inside an existing low phase of `d`.
inline InsertionReport insert_spike(PhaseDecomposition& d, double x_c, double w0, const ModelParams& p) {
    for (std::size_t k = 0; k < d.phases.size(); ++k) {
        const Phase& ph = d.phases[k];
        if (x_c > ph.left_x && x_c < ph.right_x) {
            const Phase host = ph;
            const detail::Sampler source = [host](double x) { return host.at(x); };
            return detail::split_phase(d, k, x_c, w0, source, p, host.values.size());
        }
    }
    throw UnsupportedGeometryError("insert_spike: x_c outside every phase");
}

/// Piecewise-linear interpolation of the phases onto a uniform grid; a node
/// takes the value of the phase containing its coordinate.
inline void assemble_global(const PhaseDecomposition& d, const Grid1D& grid, std::span<double> out) {
    std::size_t p = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = grid.x(i);
        while (p + 1 < d.phases.size() && x >= d.phases[p].right_x) ++p;
        out[i] = d.phases[p].at(x);
    }
}

inline Field assemble_global(const PhaseDecomposition& d, const Grid1D& grid) {
    Field f(grid);
    assemble_global(d, grid, f.values);
    return f;
}

namespace detail {

inline double one_sided_gradient_right_end(const Phase& ph) {
    const auto& r = ph.values;
    const std::size_t N = r.size();
    return (3.0 * r[N - 1] - 4.0 * r[N - 2] + r[N - 3]) / (2.0 * ph.spacing() * ph.width());
}

inline double one_sided_gradient_left_end(const Phase& ph) {
    const auto& r = ph.values;
    return (-3.0 * r[0] + 4.0 * r[1] - r[2]) / (2.0 * ph.spacing() * ph.width());
}

inline double interface_flux(double rho, double grad, double sx, const ModelParams& p) {
    return detail::diffusivity_raw(rho, p.alpha) * grad - detail::sensitivity_raw(rho, p.alpha, p.chi0) * rho * sx;
}

}  // namespace detail

/// Right-hand side of the rescaled density equation on one phase.
/// `Sx` returns S_x at a physical position; interface nodes are held fixed,
/// wall nodes use a no-flux half cell.
inline void phase_rhs(const Phase& ph, double left_speed, double right_speed, bool left_wall, bool right_wall,
                      const std::function<double(double)>& Sx, const ModelParams& p, std::span<double> out) {
    const std::size_t N = ph.values.size();
    const double w = ph.width();
    if (!(w > 0.0)) throw SolverAbort("phase_rhs: non-positive phase width");
    const double dxi = ph.spacing();
    const double wdot = right_speed - left_speed;
    const auto& r = ph.values;

    thread_local std::vector<double> flux;
    flux.resize(N - 1);
    for (std::size_t j = 0; j + 1 < N; ++j) {
        const double xi = (static_cast<double>(j) + 0.5) * dxi;
        const double c = left_speed * (1.0 - xi) + right_speed * xi;
        const double sx = p.chi0 != 0.0 ? Sx(ph.left_x + w * xi) : 0.0;
        const double diff = (primitive_K(r[j + 1], p) - primitive_K(r[j], p)) / (w * dxi);
        // Hybrid differencing: centred transport unless the cell Peclet
        // number exceeds 2, then upwind.
        const double rm = 0.5 * (r[j] + r[j + 1]);
        const double vel = c - detail::sensitivity_raw(rm, p.alpha, p.chi0) * sx;
        const double Dface = detail::diffusivity_raw(rm, p.alpha);
        double transported;
        if (std::abs(vel) * w * dxi <= 2.0 * Dface) {
            transported = c * rm - detail::sensitivity_raw(rm, p.alpha, p.chi0) * rm * sx;
        } else {
            const double up_chem = sx > 0.0 ? r[j] : r[j + 1];
            const double up_adv = c > 0.0 ? r[j + 1] : r[j];
            transported = c * up_adv - detail::sensitivity_raw(up_chem, p.alpha, p.chi0) * up_chem * sx;
        }
        flux[j] = diff + transported;
    }
    // Faces next to an interface carry the interface flux (the same one
    // entering the jump condition) less the growth of the Dirichlet half
    // cell, so the phases exchange mass exactly.
    if (!left_wall) {
        const double phi = detail::interface_flux(r[0], detail::one_sided_gradient_left_end(ph), Sx(ph.left_x), p);
        flux[0] = phi + left_speed * r[0] + 0.5 * wdot * dxi * r[0];
    }
    if (!right_wall) {
        const double phi = detail::interface_flux(r[N - 1], detail::one_sided_gradient_right_end(ph), Sx(ph.right_x), p);
        flux[N - 2] = phi + right_speed * r[N - 1] - 0.5 * wdot * dxi * r[N - 1];
    }
    for (std::size_t j = 1; j + 1 < N; ++j) {
        out[j] = ((flux[j] - flux[j - 1]) / dxi - wdot * r[j]) / w;
    }
    out[0] = left_wall ? (2.0 * flux[0] / dxi - wdot * r[0]) / w : 0.0;
    out[N - 1] = right_wall ? (-2.0 * flux[N - 2] / dxi - wdot * r[N - 1]) / w : 0.0;
}

namespace detail {

inline std::vector<double> boundary_speeds(const PhaseDecomposition& d, const GradientProfile& Sx,
                                           const ModelParams& p) {
    std::vector<double> speeds(d.phases.size() > 0 ? d.phases.size() - 1 : 0);
    for (std::size_t k = 0; k + 1 < d.phases.size(); ++k) {
        const Phase& L = d.phases[k];
        const Phase& R = d.phases[k + 1];
        if (L.values.size() < 4 || R.values.size() < 4) throw ValidationError("boundary_speeds: phases need >= 4 nodes");
        const double s = L.right_x;
        const double sx = Sx.at(s);
        const double rl = L.values.back(), rr = R.values.front();
        const double phi_l = interface_flux(rl, one_sided_gradient_right_end(L), sx, p);
        const double phi_r = interface_flux(rr, one_sided_gradient_left_end(R), sx, p);
        speeds[k] = -(phi_l - phi_r) / (rl - rr);
    }
    return speeds;
}

}  // namespace detail

/// Rankine-Hugoniot interface speeds for a decomposition and a global S.
inline std::vector<double> boundary_speeds(const PhaseDecomposition& d, const Field& S, const ModelParams& p) {
    detail::GradientProfile g;
    g.build(S.values, S.grid.spacing(), S.grid.length());
    return detail::boundary_speeds(d, g, p);
}

struct StefanSnapshot {
    PhaseDecomposition decomposition;
    Field rho;  ///< assembled on the global grid
    Field S;
};

struct StefanResult {
    std::vector<StefanSnapshot> snapshots;
    std::vector<StefanEvent> events;
    std::optional<std::string> abort_reason;
    PhaseDecomposition final_state;
    double initial_mass = 0.0;
    double final_mass = 0.0;
    double max_relative_mass_drift = 0.0;  ///< relative to the mass at the start (post-insertion)
    double max_low_phase_value = 0.0;      ///< over every step
    double min_high_phase_value = 1.0;
    bool dirichlet_pinned = true;
    StepStats dt;
};

namespace detail {

/// Packs phase fields and interior interface positions into one vector.
struct StefanLayout {
    std::vector<std::size_t> offsets;  ///< phase p occupies [offsets[p], offsets[p+1])
    std::size_t boundary_offset = 0;

    explicit StefanLayout(const PhaseDecomposition& d) {
        offsets.push_back(0);
        for (const auto& ph : d.phases) offsets.push_back(offsets.back() + ph.values.size());
        boundary_offset = offsets.back();
    }
    [[nodiscard]] std::size_t size(const PhaseDecomposition& d) const { return boundary_offset + d.phases.size() - 1; }

    void pack(const PhaseDecomposition& d, std::vector<double>& y) const {
        y.resize(size(d));
        for (std::size_t p = 0; p < d.phases.size(); ++p) {
            std::copy(d.phases[p].values.begin(), d.phases[p].values.end(), y.begin() + static_cast<std::ptrdiff_t>(offsets[p]));
        }
        for (std::size_t k = 0; k + 1 < d.phases.size(); ++k) y[boundary_offset + k] = d.phases[k].right_x;
    }
    void unpack(std::span<const double> y, PhaseDecomposition& d) const {
        for (std::size_t p = 0; p < d.phases.size(); ++p) {
            auto& v = d.phases[p].values;
            std::copy(y.begin() + static_cast<std::ptrdiff_t>(offsets[p]), y.begin() + static_cast<std::ptrdiff_t>(offsets[p + 1]), v.begin());
        }
        for (std::size_t k = 0; k + 1 < d.phases.size(); ++k) {
            d.phases[k].right_x = y[boundary_offset + k];
            d.phases[k + 1].left_x = y[boundary_offset + k];
        }
        d.phases.front().left_x = 0.0;
        d.phases.back().right_x = d.L;
    }
};

class StefanModel {
public:
    StefanModel(const ModelParams& p, const Grid1D& grid) : params_(p), grid_(grid), elliptic_(grid), rho_(grid.size()), S_(grid.size()) {}

    void rhs(const StefanLayout& layout, PhaseDecomposition& work, std::span<const double> y, std::span<double> dy) {
        layout.unpack(y, work);
        assemble_global(work, grid_, rho_);
        elliptic_.solve(rho_, S_);
        grad_.build(S_, grid_.spacing(), grid_.length());
        speeds_ = boundary_speeds(work, grad_, params_);
        auto sx = [this](double x) { return grad_.at(x); };
        const std::size_t P = work.phases.size();
        for (std::size_t ph = 0; ph < P; ++ph) {
            const double ls = ph == 0 ? 0.0 : speeds_[ph - 1];
            const double rs = ph + 1 == P ? 0.0 : speeds_[ph];
            phase_rhs(work.phases[ph], ls, rs, ph == 0, ph + 1 == P, sx, params_,
                      dy.subspan(layout.offsets[ph], layout.offsets[ph + 1] - layout.offsets[ph]));
        }
        for (std::size_t k = 0; k + 1 < P; ++k) dy[layout.boundary_offset + k] = speeds_[k];
    }

    /// Parabolic and advective bounds for the state of the latest rhs call.
    [[nodiscard]] double stable_dt(const PhaseDecomposition& work, double safety) const {
        double dt = std::numeric_limits<double>::infinity();
        const std::size_t P = work.phases.size();
        const double chem_speed = params_.chi0 * grad_.max_abs();
        for (std::size_t ph = 0; ph < P; ++ph) {
            const Phase& f = work.phases[ph];
            const double dx = f.width() * f.spacing();
            double maxD = 1e-12;
            for (double v : f.values) maxD = std::max(maxD, std::abs(detail::diffusivity_raw(v, params_.alpha)));
            dt = std::min(dt, safety * dx * dx / (2.0 * maxD));
            const double ls = ph == 0 ? 0.0 : std::abs(speeds_[ph - 1]);
            const double rs = ph + 1 == P ? 0.0 : std::abs(speeds_[ph]);
            dt = std::min(dt, 0.5 * dx / (std::max(ls, rs) + chem_speed + 1e-12));
        }
        return dt;
    }

    [[nodiscard]] const std::vector<double>& rho() const { return rho_; }
    [[nodiscard]] const std::vector<double>& S() const { return S_; }
    [[nodiscard]] const std::vector<double>& speeds() const { return speeds_; }

private:
    ModelParams params_;
    Grid1D grid_;
    ChemoattractantSolver elliptic_;
    std::vector<double> rho_, S_, speeds_;
    GradientProfile grad_;
};

/// Merge phases [first, last] into one phase of `kind`, conserving mass by a
/// local hat-shaped correction around `x_event`.
inline double merge_phases(PhaseDecomposition& d, std::size_t first, std::size_t last, PhaseKind kind,
                           double x_event, std::size_t N) {
    double before = 0.0;
    for (std::size_t k = first; k <= last; ++k) before += d.phases[k].mass();
    const double a = d.phases[first].left_x, b = d.phases[last].right_x;
    const std::vector<Phase> old(d.phases.begin() + static_cast<std::ptrdiff_t>(first),
                                 d.phases.begin() + static_cast<std::ptrdiff_t>(last + 1));
    auto source = [&](double x) {
        for (const auto& ph : old) {
            if (x <= ph.right_x) return ph.at(x);
        }
        return old.back().at(x);
    };
    Phase merged = sample_phase(kind, a, b, N, source);
    merged.values.front() = old.front().values.front();
    merged.values.back() = old.back().values.back();
    const double deficit = before - merged.mass();
    // Hat of half-width 5 nodes (clipped to interior nodes).
    const double dx = merged.width() * merged.spacing();
    const double radius = 5.0 * dx;
    std::vector<double> hat(N, 0.0);
    for (std::size_t j = 1; j + 1 < N; ++j) hat[j] = std::max(0.0, 1.0 - std::abs(merged.x(j) - x_event) / radius);
    const double hat_mass = merged.width() * trapezoid(hat, merged.spacing());
    if (hat_mass > 0.0) {
        for (std::size_t j = 0; j < N; ++j) merged.values[j] += deficit * hat[j] / hat_mass;
    }
    d.phases.erase(d.phases.begin() + static_cast<std::ptrdiff_t>(first), d.phases.begin() + static_cast<std::ptrdiff_t>(last + 1));
    d.phases.insert(d.phases.begin() + static_cast<std::ptrdiff_t>(first), merged);
    return deficit;
}

}  // namespace detail

/// Time loop: assemble -> elliptic solve -> interface speeds -> phase
/// right-hand sides -> explicit step. Low phases reaching rho_flat receive a
/// new spike; high phases thinner than w0/2 are removed.
inline StefanResult simulate_stefan(PhaseDecomposition start, const ModelParams& p, double t_end,
                                    std::span<const double> snapshot_times, const StefanOptions& opt = {}) {
    validate(p);
    const auto interval = unstable_interval(p);
    if (!interval) throw ValidationError("simulate_stefan: requires alpha > 3/4");
    if (start.phases.empty()) throw ValidationError("simulate_stefan: empty decomposition");
    if (!(t_end >= start.t)) throw ValidationError("simulate_stefan: t_end before start time");
    for (std::size_t i = 0; i < snapshot_times.size(); ++i) {
        if (snapshot_times[i] < start.t || snapshot_times[i] > t_end || (i > 0 && !(snapshot_times[i] > snapshot_times[i - 1]))) {
            throw ValidationError("simulate_stefan: snapshot times must be increasing within [t_start, t_end]");
        }
    }
    const double rho_flat = interval->lo, rho_sharp = interval->hi;
    const Grid1D grid(opt.global_nodes, start.L);
    const double w0 = opt.spike_width > 0.0 ? opt.spike_width : grid.spacing();
    const double w_min = 0.5 * w0;
    const std::size_t N = opt.nodes_per_phase;

    StefanResult res;
    detail::StefanModel model(p, grid);
    PhaseDecomposition d = std::move(start);
    PhaseDecomposition work = d;
    double t = d.t;
    res.initial_mass = d.mass();
    std::size_t next = 0;
    std::vector<double> y, prev, k1, k2, tmp;

    auto snapshot = [&](const PhaseDecomposition& at, double time) {
        StefanSnapshot s{at, assemble_global(at, grid), Field(grid)};
        s.decomposition.t = time;
        ChemoattractantSolver solver(grid);
        solver.solve(s.rho.values, s.S.values);
        res.snapshots.push_back(std::move(s));
    };
    auto audit = [&](const PhaseDecomposition& at) {
        const double m = at.mass();
        res.max_relative_mass_drift = std::max(res.max_relative_mass_drift, std::abs(m - res.initial_mass) / res.initial_mass);
        const std::size_t P = at.phases.size();
        for (std::size_t k = 0; k < P; ++k) {
            const auto& ph = at.phases[k];
            if (ph.kind == PhaseKind::Low) {
                res.max_low_phase_value = std::max(res.max_low_phase_value, *std::max_element(ph.values.begin(), ph.values.end()));
                if (k > 0 && ph.values.front() != p.jump_low) res.dirichlet_pinned = false;
                if (k + 1 < P && ph.values.back() != p.jump_low) res.dirichlet_pinned = false;
            } else {
                res.min_high_phase_value = std::min(res.min_high_phase_value, *std::min_element(ph.values.begin(), ph.values.end()));
                if (ph.values.front() != p.jump_high || ph.values.back() != p.jump_high) res.dirichlet_pinned = false;
            }
        }
    };

    while (next < snapshot_times.size() && snapshot_times[next] <= t) snapshot(d, snapshot_times[next++]);
    audit(d);

    std::size_t high_violations_logged = 0;
    try {
        while (t < t_end) {
            const detail::StefanLayout layout(d);
            work = d;
            layout.pack(d, y);
            prev = y;
            auto rhs = [&](std::span<const double> yy, std::span<double> dy) { model.rhs(layout, work, yy, dy); };
            const double dt = explicit_step(
                opt.scheme, rhs,
                [&] {
                    layout.unpack(prev, work);
                    return model.stable_dt(work, opt.safety);
                },
                t_end - t, y, k1, k2, tmp);
            res.dt.record(dt);
            const double t_new = (t_end - t - dt <= 1e-14 * std::max(1.0, t_end)) ? t_end : t + dt;

            PhaseDecomposition before = d;
            layout.unpack(y, d);
            d.t = t_new;

            while (next < snapshot_times.size() && snapshot_times[next] <= t_new) {
                const double theta = (snapshot_times[next] - t) / (t_new - t);
                PhaseDecomposition at = before;
                layout.unpack(lerp_state(prev, y, theta), at);
                snapshot(at, snapshot_times[next]);
                ++next;
            }
            t = t_new;

            // Interface ordering and collapse.
            bool changed = true;
            while (changed) {
                changed = false;
                for (std::size_t k = 0; k < d.phases.size(); ++k) {
                    const Phase& ph = d.phases[k];
                    if (ph.width() >= w_min) continue;
                    const double xe = 0.5 * (ph.left_x + ph.right_x);
                    if (k == 0 || k + 1 == d.phases.size()) {
                        throw SolverAbort("simulate_stefan: a wall phase collapsed (plateau reached the wall)");
                    }
                    const double m0 = d.mass();
                    const PhaseKind merged_kind = ph.kind == PhaseKind::High ? PhaseKind::Low : PhaseKind::High;
                    detail::merge_phases(d, k - 1, k + 1, merged_kind, xe, N);
                    res.events.push_back({ph.kind == PhaseKind::High ? StefanEvent::Kind::Collapse : StefanEvent::Kind::Merge,
                                          t, xe, d.mass() - m0,
                                          ph.kind == PhaseKind::High ? "high phase thinner than w0/2 removed" : "low phase between plateaus closed"});
                    changed = true;
                    break;
                }
            }

            // New contacts with rho_flat inside low phases.
            for (std::size_t k = 0; k < d.phases.size(); ++k) {
                const Phase& ph = d.phases[k];
                if (ph.kind == PhaseKind::High) {
                    const double mn = *std::min_element(ph.values.begin(), ph.values.end());
                    if (mn <= rho_sharp && high_violations_logged < 16) {
                        ++high_violations_logged;
                        res.events.push_back({StefanEvent::Kind::HighBoundViolation, t, ph.left_x, 0.0, "high phase dipped to rho_sharp"});
                    }
                    continue;
                }
                const auto it = std::max_element(ph.values.begin(), ph.values.end());
                if (*it < rho_flat) continue;
                const auto j = static_cast<std::size_t>(it - ph.values.begin());
                const std::size_t Np = ph.values.size();
                const bool near_interface = (k > 0 && j < opt.hit_margin_nodes) || (k + 1 < d.phases.size() && j + opt.hit_margin_nodes >= Np);
                const double xc = ph.x(j);
                if (near_interface || xc - 0.5 * w0 <= ph.left_x || xc + 0.5 * w0 >= ph.right_x) {
                    res.events.push_back({StefanEvent::Kind::LowBoundViolation, t, xc, 0.0, "low phase reached rho_flat next to an interface"});
                    continue;
                }
                const double m0 = d.mass();
                insert_spike(d, xc, w0, p);
                res.events.push_back({StefanEvent::Kind::Insertion, t, xc, d.mass() - m0, "spike inserted at contact point"});
                break;
            }
            audit(d);
        }
    } catch (const SolverAbort& e) {
        res.abort_reason = e.what();
    } catch (const UnsupportedGeometryError& e) {
        res.abort_reason = e.what();
    }
    res.final_state = d;
    res.final_mass = d.mass();
    return res;
}

/// Convenience overload: start from a direct solution's hit state.
inline StefanResult simulate_stefan(const SimState& state, const HitEvent& hit, const ModelParams& p, double t_end,
                                    std::span<const double> snapshot_times, const StefanOptions& opt = {},
                                    InsertionReport* report = nullptr) {
    return simulate_stefan(insert_spike(state, hit, p, opt, report), p, t_end, snapshot_times, opt);
}

}  // namespace motility
