/**
 * @file steady.hpp
 * @brief Smooth and discontinuous steady states, and stability predicates.
 *
 * A smooth steady state satisfies D rho_x = chi rho S_x, hence G(rho) = S - C
 * with G' = D/(chi rho).  Writing sigma = G(rho) gives the Hamiltonian system
 *
 *   sigma_xx = sigma - G^{-1}(sigma) + C,
 *
 * whose bounded orbits around a centre give Neumann solutions as half
 * periods.  In density variables the energy relation reads
 *
 *   sigma_x^2 / 2 = W(rho) = int_{rho-}^{rho} (G(u) - u + C) G'(u) du,
 *
 * with rho- the lower turning point, so the half period is
 * T = int G'(rho) / sqrt(2 W(rho)) drho over [rho-, rho+].
 */
#pragma once

#include "motility/elliptic.hpp"
#include "motility/grid.hpp"
#include "motility/model.hpp"
#include "motility/plateau.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace motility {

/// Monotone branch of G used for inversion.  For alpha > 3/4, G is only
/// piecewise monotone and the caller picks the part below rho_flat or above
/// rho_sharp.
enum class Branch { Full, Low, High };

enum class CriticalKind { Saddle, Centre };

inline const char* to_string(CriticalKind k) { return k == CriticalKind::Saddle ? "saddle" : "centre"; }

struct CriticalPoint {
    double rho;
    CriticalKind kind;
};

struct CriticalPointSet {
    double C;
    Branch branch;
    std::vector<CriticalPoint> points;

    [[nodiscard]] std::optional<CriticalPoint> centre() const {
        for (const auto& c : points) {
            if (c.kind == CriticalKind::Centre) return c;
        }
        return std::nullopt;
    }
};

namespace detail {

inline constexpr double kRootTol = 1e-12;
inline constexpr double kBranchMargin = 1e-9;

/// Open density interval of a branch.
inline std::pair<double, double> branch_range(Branch b, const ModelParams& p) {
    const auto I = unstable_interval(p);
    switch (b) {
        case Branch::Full:
            if (I) throw ValidationError("Branch::Full requires alpha <= 3/4; choose the low or high branch");
            return {0.0, 1.0};
        case Branch::Low:
            return {0.0, I ? I->lo : 1.0};
        case Branch::High:
            if (!I) throw ValidationError("Branch::High requires alpha > 3/4");
            return {I->hi, 1.0};
    }
    return {0.0, 1.0};
}

template <class F>
double bracketed_root(F&& f, double a, double b) {
    std::uintmax_t iters = 200;
    const auto [lo, hi] = boost::math::tools::toms748_solve(
        f, a, b, [](double x, double y) { return std::abs(x - y) <= kRootTol * std::max(1.0, std::abs(x)); }, iters);
    return 0.5 * (lo + hi);
}

/// Phase-plane classification: the linearisation of the sigma system at a
/// root of G(rho) - rho + C has eigenvalue^2 = 1 - 1/G'(rho).
inline CriticalKind classify(double rho, const ModelParams& p) {
    const double D = diffusivity_raw(rho, p.alpha);
    const double cr = sensitivity_raw(rho, p.alpha, p.chi0) * rho;
    // d/drho (rho - G) = 1 - D/(chi rho) > 0 with G' > 0 means a centre.
    return (D > 0.0 && cr > D) ? CriticalKind::Centre : CriticalKind::Saddle;
}

/// G tabulated on a branch at nodes clustered toward its singular ends,
/// accumulated outwards from an interior anchor so the log singularities at
/// 0 and 1 never enter a long quadrature.
class BranchTable {
public:
    BranchTable(const ModelParams& p, Branch branch, std::size_t nodes) : p_(p), r_(nodes + 1), g_(nodes + 1) {
        const auto [a, b] = branch_range(branch, p);
        const double lo = a + kBranchMargin, hi = b - kBranchMargin;
        for (std::size_t i = 0; i <= nodes; ++i) {
            const double t = static_cast<double>(i) / static_cast<double>(nodes);
            r_[i] = lo + (hi - lo) * (0.5 - 0.5 * std::cos(std::numbers::pi * t));
        }
        const std::size_t mid = nodes / 2;
        g_[mid] = primitive_G(r_[mid], p);
        for (std::size_t i = mid; i < nodes; ++i) g_[i + 1] = g_[i] + primitive_G_between(r_[i], r_[i + 1], p);
        for (std::size_t i = mid; i > 0; --i) g_[i - 1] = g_[i] - primitive_G_between(r_[i - 1], r_[i], p);
    }

    [[nodiscard]] const std::vector<double>& rho() const { return r_; }
    [[nodiscard]] const std::vector<double>& G() const { return g_; }

    /// G(u) for u in [rho()[i], rho()[i+1]].
    [[nodiscard]] double G_from(std::size_t i, double u) const { return g_[i] + primitive_G_between(r_[i], u, p_); }

    /// Inverse of G on a monotone branch; clamps to the branch ends.
    [[nodiscard]] double inverse(double sigma) const {
        const bool increasing = g_.back() > g_.front();
        if (increasing ? sigma <= g_.front() : sigma >= g_.front()) return r_.front();
        if (increasing ? sigma >= g_.back() : sigma <= g_.back()) return r_.back();
        std::size_t lo = 0, hi = g_.size() - 1;
        while (hi - lo > 1) {
            const std::size_t m = (lo + hi) / 2;
            if ((g_[m] < sigma) == increasing) lo = m; else hi = m;
        }
        auto f = [&](double u) { return G_from(lo, u) - sigma; };
        return bracketed_root(f, r_[lo], r_[hi]);
    }

private:
    ModelParams p_;
    std::vector<double> r_, g_;
};

}  // namespace detail

/// Roots of G(rho) - rho + C on a branch, found by bracketing on a fine grid.
inline CriticalPointSet critical_points(double C, const ModelParams& p, Branch branch = Branch::Full,
                                        std::size_t scan = 4000) {
    validate(p);
    if (!(p.chi0 > 0.0)) throw DomainError("critical_points: requires chi0 > 0");
    CriticalPointSet out{C, branch, {}};
    const detail::BranchTable table(p, branch, scan);
    const auto& r = table.rho();
    const auto& g = table.G();
    for (std::size_t i = 0; i < scan; ++i) {
        const double fa = g[i] - r[i] + C, fb = g[i + 1] - r[i + 1] + C;
        if (fa == 0.0) {
            out.points.push_back({r[i], detail::classify(r[i], p)});
        } else if (fa * fb < 0.0) {
            auto local = [&](double u) { return table.G_from(i, u) - u + C; };
            const double root = detail::bracketed_root(local, r[i], r[i + 1]);
            out.points.push_back({root, detail::classify(root, p)});
        }
    }
    return out;
}

/// Integration constant whose critical point set has a root at rho_c.
inline double constant_for_critical_point(double rho_c, const ModelParams& p) {
    return rho_c - primitive_G(rho_c, p);
}

/// Densities where G' = 1 (D = chi rho) on a branch; between them the roots
/// of G - rho + C are centres.
inline std::vector<double> centre_band(const ModelParams& p, Branch branch = Branch::Full) {
    const auto [a, b] = detail::branch_range(branch, p);
    auto F = [&](double r) { return detail::diffusivity_raw(r, p.alpha) - detail::sensitivity_raw(r, p.alpha, p.chi0) * r; };
    std::vector<double> roots;
    constexpr int kScan = 2000;
    const double lo = a + detail::kBranchMargin, hi = b - detail::kBranchMargin;
    double r_prev = lo, f_prev = F(lo);
    for (int i = 1; i <= kScan; ++i) {
        const double r = lo + (hi - lo) * i / kScan;
        const double fr = F(r);
        if (f_prev * fr < 0.0) roots.push_back(detail::bracketed_root(F, r_prev, r));
        r_prev = r;
        f_prev = fr;
    }
    return roots;
}

/// Minimal domain length supporting a non-trivial solution near the centre.
inline double min_domain_length(double C, const ModelParams& p, Branch branch = Branch::Full) {
    const auto set = critical_points(C, p, branch);
    const auto c = set.centre();
    if (!c) throw NoRootError("min_domain_length: no centre for this C");
    const double D = diffusivity(c->rho, p);
    const double cr = chemotactic_sensitivity(c->rho, p) * c->rho;
    if (!(cr - D > 0.0)) throw NoRootError("min_domain_length: chi rho <= D at the centre");
    return std::numbers::pi * std::sqrt(D / (cr - D));
}

/// Bounded orbits around one centre of the sigma system.
class OrbitFamily {
public:
    OrbitFamily(double C, const ModelParams& p, Branch branch = Branch::Full) : C_(C), p_(p), branch_(branch) {
        const auto set = critical_points(C, p, branch);
        const auto c = set.centre();
        if (!c) throw NoRootError("OrbitFamily: no centre for this C");
        rho_c_ = c->rho;
        const auto [a, b] = detail::branch_range(branch, p);
        lower_ = a + detail::kBranchMargin;
        upper_ = b - detail::kBranchMargin;
        for (const auto& q : set.points) {
            if (q.kind != CriticalKind::Saddle) continue;
            if (q.rho < rho_c_) lower_ = std::max(lower_, q.rho);
            if (q.rho > rho_c_) upper_ = std::min(upper_, q.rho);
        }
        G_c_ = primitive_G(rho_c_, p);
    }

    [[nodiscard]] double centre() const { return rho_c_; }
    [[nodiscard]] double C() const { return C_; }
    [[nodiscard]] const ModelParams& params() const { return p_; }
    [[nodiscard]] double lower_limit() const { return lower_; }
    [[nodiscard]] double upper_limit() const { return upper_; }

    /// Half period of vanishing-amplitude orbits, pi / omega.
    [[nodiscard]] double linear_half_period() const {
        const double D = detail::diffusivity_raw(rho_c_, p_.alpha);
        const double cr = detail::sensitivity_raw(rho_c_, p_.alpha, p_.chi0) * rho_c_;
        return std::numbers::pi * std::sqrt(D / (cr - D));
    }

    /// One orbit, identified by its lower turning point.
    struct Orbit {
        double rho_minus;
        double rho_plus;
        double f_minus;  ///< G(rho-) - rho- + C
        double half_period;
    };

    /// W(rho) for the orbit through rho_minus.
    [[nodiscard]] double energy_W(double rho_minus, double f_minus, double rho) const {
        const double dG = primitive_G_between(rho_minus, rho, p_);
        const double J = detail::logit_integral(rho_minus, rho, p_, [&](double u) { return u - rho_minus; });
        return dG * (f_minus + 0.5 * dG) - J;
    }

    /// Upper turning point for the orbit through rho_minus, if it is closed.
    [[nodiscard]] std::optional<Orbit> orbit(double rho_minus) const {
        if (!(rho_minus > lower_ && rho_minus < rho_c_)) return std::nullopt;
        const double f_minus = primitive_G(rho_minus, p_) - rho_minus + C_;
        auto W = [&](double r) { return energy_W(rho_minus, f_minus, r); };
        if (!(W(upper_) < 0.0)) return std::nullopt;  // escapes past the saddle
        const double rho_plus = detail::bracketed_root(W, rho_c_, upper_);
        Orbit o{rho_minus, rho_plus, f_minus, 0.0};
        o.half_period = theta_integral(o, std::numbers::pi);
        return o;
    }

    /// Integrand of x(theta) for rho = m - r cos(theta).
    [[nodiscard]] double dx_dtheta(const Orbit& o, double theta) const {
        const double m = 0.5 * (o.rho_minus + o.rho_plus);
        const double r = 0.5 * (o.rho_plus - o.rho_minus);
        const double rho = density_at(o, theta);
        (void)m;
        const double W = energy_W(o.rho_minus, o.f_minus, rho);
        if (!(W > 0.0)) return 0.0;
        return primitive_G_density(rho, p_) * r * std::sin(theta) / std::sqrt(2.0 * W);
    }

    [[nodiscard]] static double density_at(const Orbit& o, double theta) {
        // rho - rho_minus = 2 r sin^2(theta/2) avoids cancellation near theta = 0.
        const double r = 0.5 * (o.rho_plus - o.rho_minus);
        const double s = std::sin(0.5 * theta);
        return o.rho_minus + 2.0 * r * s * s;
    }

    /// x(theta) = int_0^theta dx/dtheta, composite Gauss-Legendre.
    [[nodiscard]] double theta_integral(const Orbit& o, double theta, std::size_t panels = 32) const {
        if (theta <= 0.0) return 0.0;
        const double width = std::numbers::pi / static_cast<double>(panels);
        double total = 0.0;
        double a = 0.0;
        auto f = [&](double t) { return dx_dtheta(o, t); };
        while (a < theta) {
            const double b = std::min(theta, a + width);
            total += boost::math::quadrature::gauss<double, 20>::integrate(f, a, b);
            a = b;
        }
        return total;
    }

    /// Orbit whose half period equals `half_length`, by bisection on the
    /// lower turning point.
    [[nodiscard]] Orbit orbit_with_half_period(double half_length) const {
        const double T0 = linear_half_period();
        if (!(half_length > T0)) {
            throw NoRootError("orbit_with_half_period: length below the minimal half period " + std::to_string(T0));
        }
        double near = rho_c_;     // amplitude -> 0, half period -> T0
        double far = lower_;      // separatrix, half period -> infinity
        std::optional<Orbit> best;
        for (int it = 0; it < 200 && far - near < -1e-15; ++it) {
            const double mid = 0.5 * (near + far);
            const auto o = orbit(mid);
            if (!o || o->half_period > half_length) {
                far = mid;
            } else {
                near = mid;
                best = o;
                if (std::abs(o->half_period - half_length) <= 1e-13 * half_length) break;
            }
        }
        if (!best) throw NoRootError("orbit_with_half_period: no orbit matches the requested length");
        return *best;
    }

private:
    double C_;
    ModelParams p_;
    Branch branch_;
    double rho_c_ = 0.5;
    double lower_ = 0.0;
    double upper_ = 1.0;
    double G_c_ = 0.0;
};

struct Jump {
    double x;
    double left_value;
    double right_value;
};

struct Segment {
    double x_begin;
    double x_end;
    double C;
};

struct SteadyResiduals {
    double max_flux_residual = 0.0;       ///< max |D rho_x - chi rho S_x| over segment nodes
    double flux_scale = 0.0;              ///< max |chi rho S_x|
    double relative_flux_residual = 0.0;
    double max_G_residual = 0.0;          ///< max |G(rho) - S + C| over segment nodes
    double wall_gradient_ratio = 0.0;     ///< max(|rho_x(0)|, |rho_x(L)|) / max |rho_x|
};

struct SteadyProfile {
    std::vector<Segment> segments;
    std::vector<Jump> jumps;
    Field rho;
    Field S;
    std::vector<double> rho_x;  ///< exact gradient where the construction provides it
    SteadyResiduals residuals;
};

namespace detail {

inline std::vector<double> centred_gradient(std::span<const double> v, double h) {
    const std::size_t n = v.size();
    std::vector<double> g(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) g[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
    return g;
}

inline SteadyResiduals smooth_residuals(const SteadyProfile& s, const ModelParams& p) {
    SteadyResiduals r;
    const double h = s.rho.grid.spacing();
    const auto Sx = centred_gradient(s.S.values, h);
    const std::size_t n = s.rho.size();
    double max_grad = 0.0;
    for (double g : s.rho_x) max_grad = std::max(max_grad, std::abs(g));
    const double C = s.segments.empty() ? 0.0 : s.segments.front().C;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double rho = s.rho[i];
        const double cr = detail::sensitivity_raw(rho, p.alpha, p.chi0) * rho;
        r.max_flux_residual = std::max(r.max_flux_residual, std::abs(detail::diffusivity_raw(rho, p.alpha) * s.rho_x[i] - cr * Sx[i]));
        r.flux_scale = std::max(r.flux_scale, std::abs(cr * Sx[i]));
        r.max_G_residual = std::max(r.max_G_residual, std::abs(primitive_G(rho, p) - s.S[i] + C));
    }
    r.relative_flux_residual = r.flux_scale > 0.0 ? r.max_flux_residual / r.flux_scale : r.max_flux_residual;
    r.wall_gradient_ratio = max_grad > 0.0 ? std::max(std::abs(s.rho_x.front()), std::abs(s.rho_x.back())) / max_grad : 0.0;
    return r;
}

}  // namespace detail

/// Smooth Neumann steady state made of `n_half` half orbits around the
/// centre of the sigma system for constant C, sampled on n nodes.
inline SteadyProfile construct_smooth_steady(double C, double L, std::size_t n_half, const ModelParams& p,
                                             std::size_t n = 2001, Branch branch = Branch::Full) {
    if (n_half == 0) throw ValidationError("construct_smooth_steady: n_half_periods must be >= 1");
    ModelParams q = p;
    q.L = L;
    const OrbitFamily family(C, q, branch);
    const double ell = L / static_cast<double>(n_half);
    const auto orbit = family.orbit_with_half_period(ell);
    // Rescale x so the half period is exactly ell (bisection leaves ~1e-13).
    const double stretch = ell / orbit.half_period;

    const Grid1D grid(n, L);
    SteadyProfile out{{}, {}, Field(grid), Field(grid), std::vector<double>(n, 0.0), {}};
    out.segments.push_back({0.0, L, C});

    // Tabulate x(theta) on a fine grid and invert by cubic Hermite
    // interpolation (dx/dtheta is smooth and positive inside (0, pi); it is
    // even about both ends, so end slopes are taken just inside).
    constexpr std::size_t kTable = 2048;
    constexpr double kEndOffset = 1e-3;
    const double dth = std::numbers::pi / static_cast<double>(kTable);
    std::vector<double> xt(kTable + 1, 0.0), dt(kTable + 1, 0.0);
    auto f = [&](double t) { return stretch * family.dx_dtheta(orbit, t); };
    for (std::size_t k = 0; k <= kTable; ++k) {
        const double t = std::clamp(static_cast<double>(k) * dth, kEndOffset * dth, std::numbers::pi - kEndOffset * dth);
        dt[k] = f(t);
        if (k > 0) {
            xt[k] = xt[k - 1] + boost::math::quadrature::gauss<double, 10>::integrate(f, static_cast<double>(k - 1) * dth, static_cast<double>(k) * dth);
        }
    }
    const double x_scale = ell / xt.back();  // removes residual quadrature mismatch
    for (auto& v : xt) v *= x_scale;
    for (auto& v : dt) v *= x_scale;
    auto solve_theta = [&](double xl) {
        if (xl <= 0.0) return 0.0;
        if (xl >= ell) return std::numbers::pi;
        const auto it = std::upper_bound(xt.begin(), xt.end(), xl);
        const std::size_t k = std::min<std::size_t>(kTable - 1, static_cast<std::size_t>(it - xt.begin()) - 1);
        auto hermite = [&](double u) {
            const double u2 = u * u, u3 = u2 * u;
            return (2 * u3 - 3 * u2 + 1) * xt[k] + (u3 - 2 * u2 + u) * dth * dt[k] + (-2 * u3 + 3 * u2) * xt[k + 1] +
                   (u3 - u2) * dth * dt[k + 1] - xl;
        };
        if (hermite(0.0) >= 0.0) return static_cast<double>(k) * dth;
        if (hermite(1.0) <= 0.0) return static_cast<double>(k + 1) * dth;
        return (static_cast<double>(k) + detail::bracketed_root(hermite, 0.0, 1.0)) * dth;
    };

    for (std::size_t i = 0; i < n; ++i) {
        const double x = grid.x(i);
        auto k = static_cast<std::size_t>(std::floor(x / ell));
        if (k >= n_half) k = n_half - 1;
        double xl = x - static_cast<double>(k) * ell;
        const bool mirrored = (k % 2) == 1;
        if (mirrored) xl = ell - xl;
        const double theta = solve_theta(xl);
        const double rho = OrbitFamily::density_at(orbit, theta);
        out.rho[i] = rho;
        const double W = std::max(0.0, family.energy_W(orbit.rho_minus, orbit.f_minus, rho));
        // sigma_x = sqrt(2W) on the rising half; rho_x = sigma_x / G'.
        double g = (theta <= 0.0 || theta >= std::numbers::pi) ? 0.0 : std::sqrt(2.0 * W) / primitive_G_density(rho, q) / (stretch * x_scale);
        out.rho_x[i] = mirrored ? -g : g;
    }
    ChemoattractantSolver(grid).solve(out.rho.values, out.S.values);
    out.residuals = detail::smooth_residuals(out, q);
    return out;
}

/// Energy drift along an RK4 integration of (rho, sigma_x) through the
/// sigma system, starting at rest from rho0: rho' = q/G'(rho),
/// q' = G(rho) - rho + C.  Returns max |E - E0| with E = q^2/2 - W(rho).
inline double hamiltonian_drift(double C, double rho0, double x_end, std::size_t steps, const ModelParams& p) {
    const double G0 = primitive_G(rho0, p);
    const double f0 = G0 - rho0 + C;
    auto W = [&](double r) {
        const double dG = primitive_G_between(rho0, r, p);
        const double J = detail::logit_integral(rho0, r, p, [&](double u) { return u - rho0; });
        return dG * (f0 + 0.5 * dG) - J;
    };
    auto rhs = [&](double r, double q, double& dr, double& dq) {
        dr = q / primitive_G_density(r, p);
        dq = G0 + primitive_G_between(rho0, r, p) - r + C;
    };
    const double dx = x_end / static_cast<double>(steps);
    double r = rho0, q = 0.0, worst = 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
        double a1, b1, a2, b2, a3, b3, a4, b4;
        rhs(r, q, a1, b1);
        rhs(r + 0.5 * dx * a1, q + 0.5 * dx * b1, a2, b2);
        rhs(r + 0.5 * dx * a2, q + 0.5 * dx * b2, a3, b3);
        rhs(r + dx * a3, q + dx * b3, a4, b4);
        r += dx / 6.0 * (a1 + 2 * a2 + 2 * a3 + a4);
        q += dx / 6.0 * (b1 + 2 * b2 + 2 * b3 + b4);
        worst = std::max(worst, std::abs(0.5 * q * q - W(r)));
    }
    return worst;
}

/// Residual report for a candidate weak steady state.
struct JumpResidual {
    double x;
    double left_value;
    double right_value;
    double K_jump;         ///< |K(left) - K(right)|
    double flux_mismatch;  ///< |[(D/(chi rho)) rho_x]|
};

struct WeakSteadyReport {
    std::vector<JumpResidual> jumps;
    double max_K_jump = 0.0;
    double max_flux_mismatch = 0.0;   ///< relative to max |S_x|
    double max_segment_residual = 0.0;  ///< relative to max |chi rho S_x|, or to the S range in integrated form
    double tolerance = 0.0;
    bool pass = false;
};

inline constexpr double kConstructedTolerance = 1e-6;
inline constexpr double kSimulatedTolerance = 1e-2;

namespace detail {

/// Value and gradient of the smooth side of a jump, extrapolated to the jump
/// position from nodes `skip`..`skip+count-1` away from the transition.
inline std::pair<double, double> side_trace(std::span<const double> rho, double h, double x_jump, std::size_t edge_node,
                                            int direction, std::size_t skip, std::size_t count) {
    std::vector<double> xs, ys;
    const auto n = static_cast<std::ptrdiff_t>(rho.size());
    for (std::size_t k = skip; k < skip + count; ++k) {
        const std::ptrdiff_t j = static_cast<std::ptrdiff_t>(edge_node) + direction * static_cast<std::ptrdiff_t>(k);
        if (j < 0 || j >= n) break;
        xs.push_back(static_cast<double>(j) * h);
        ys.push_back(rho[static_cast<std::size_t>(j)]);
    }
    if (xs.size() < 2) return {xs.empty() ? rho[edge_node] : ys.front(), 0.0};
    // Least-squares line.
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) { mx += xs[i]; my += ys[i]; }
    mx /= static_cast<double>(xs.size());
    my /= static_cast<double>(xs.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) { sxy += (xs[i] - mx) * (ys[i] - my); sxx += (xs[i] - mx) * (xs[i] - mx); }
    const double slope = sxy / sxx;
    return {my + slope * (x_jump - mx), slope};
}

}  // namespace detail

/// Check a steady profile with declared jumps.  With segment constants the
/// flux balance is checked in its integrated form G(rho) - S + C = 0
/// (relative to the range of S), which needs no differencing of the grid S;
/// otherwise D rho_x - chi rho S_x from centred differences.
inline WeakSteadyReport verify_weak_steady(const SteadyProfile& s, const ModelParams& p,
                                           double tolerance = kConstructedTolerance) {
    WeakSteadyReport rep;
    rep.tolerance = tolerance;
    const double h = s.rho.grid.spacing();
    const std::size_t n = s.rho.size();
    const auto Sx = detail::centred_gradient(s.S.values, h);
    const auto rx = s.rho_x.size() == n ? s.rho_x : detail::centred_gradient(s.rho.values, h);
    const double S_range = s.S.max() - s.S.min();
    auto segment_constant = [&](double x) -> std::optional<double> {
        for (const auto& seg : s.segments) {
            if (x >= seg.x_begin && x <= seg.x_end) return seg.C;
        }
        return std::nullopt;
    };
    double sx_scale = 0.0, flux_scale = 0.0, worst = 0.0, worst_integrated = 0.0;
    bool integrated = !s.segments.empty();
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double x = s.rho.grid.x(i);
        bool near_jump = false;
        for (const auto& j : s.jumps) near_jump = near_jump || std::abs(x - j.x) < 2.0 * h;
        sx_scale = std::max(sx_scale, std::abs(Sx[i]));
        if (near_jump) continue;
        const double rho = s.rho[i];
        const double cr = detail::sensitivity_raw(rho, p.alpha, p.chi0) * rho;
        flux_scale = std::max(flux_scale, std::abs(cr * Sx[i]));
        worst = std::max(worst, std::abs(detail::diffusivity_raw(rho, p.alpha) * rx[i] - cr * Sx[i]));
        if (const auto C = segment_constant(x)) {
            worst_integrated = std::max(worst_integrated, std::abs(primitive_G(rho, p) - s.S[i] + *C));
        } else {
            integrated = false;
        }
    }
    if (integrated) {
        rep.max_segment_residual = S_range > 0.0 ? worst_integrated / S_range : worst_integrated;
    } else {
        rep.max_segment_residual = flux_scale > 0.0 ? worst / flux_scale : worst;
    }
    for (const auto& j : s.jumps) {
        JumpResidual jr{j.x, j.left_value, j.right_value, std::abs(primitive_K(j.left_value, p) - primitive_K(j.right_value, p)), 0.0};
        // (D/(chi rho)) rho_x traced to the jump from the two nearest nodes
        // strictly on each side.
        auto coupling = [&](std::size_t i) { return primitive_G_density(std::clamp(s.rho[i], 1e-12, 1.0 - 1e-12), p) * rx[i]; };
        const double eps = 1e-9 * h;
        std::ptrdiff_t l = static_cast<std::ptrdiff_t>(std::ceil((j.x - eps) / h)) - 1;
        std::ptrdiff_t r = static_cast<std::ptrdiff_t>(std::floor((j.x + eps) / h)) + 1;
        l = std::clamp<std::ptrdiff_t>(l, 1, static_cast<std::ptrdiff_t>(n) - 1);
        r = std::clamp<std::ptrdiff_t>(r, 0, static_cast<std::ptrdiff_t>(n) - 2);
        auto trace = [&](std::size_t a, std::size_t b) {
            const double xa = s.rho.grid.x(a), xb = s.rho.grid.x(b);
            return coupling(a) + (coupling(b) - coupling(a)) * (j.x - xa) / (xb - xa);
        };
        jr.flux_mismatch = std::abs(trace(static_cast<std::size_t>(l), static_cast<std::size_t>(l - 1)) -
                                    trace(static_cast<std::size_t>(r), static_cast<std::size_t>(r + 1)));
        if (sx_scale > 0.0) jr.flux_mismatch /= sx_scale;
        rep.max_K_jump = std::max(rep.max_K_jump, jr.K_jump);
        rep.max_flux_mismatch = std::max(rep.max_flux_mismatch, jr.flux_mismatch);
        rep.jumps.push_back(jr);
    }
    rep.pass = rep.max_K_jump <= tolerance && rep.max_flux_mismatch <= tolerance && rep.max_segment_residual <= tolerance;
    return rep;
}

/// Check a simulated state: jumps are the detected plateau edges; side
/// values and gradients are extrapolated from the smooth parts, skipping the
/// transition nodes.
inline WeakSteadyReport verify_weak_steady(const Field& rho, const Field& S, const ModelParams& p,
                                           double tolerance = kSimulatedTolerance) {
    WeakSteadyReport rep;
    rep.tolerance = tolerance;
    const double h = rho.grid.spacing();
    const std::size_t n = rho.size();
    const auto edges = detect_plateau_edges(rho.values, h, p);
    const auto Sx = detail::centred_gradient(S.values, h);
    const auto rx = detail::centred_gradient(rho.values, h);
    constexpr std::size_t kSkip = 2, kCount = 6, kGuard = 5;
    double sx_scale = 0.0, flux_scale = 0.0, worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) sx_scale = std::max(sx_scale, std::abs(Sx[i]));
    for (std::size_t i = 1; i + 1 < n; ++i) {
        bool near_edge = false;
        for (const auto& e : edges) {
            near_edge = near_edge || (i + kGuard >= e.left_node && i <= e.right_node + kGuard);
        }
        if (near_edge) continue;
        const double v = rho[i];
        const double cr = detail::sensitivity_raw(v, p.alpha, p.chi0) * v;
        flux_scale = std::max(flux_scale, std::abs(cr * Sx[i]));
        worst = std::max(worst, std::abs(detail::diffusivity_raw(v, p.alpha) * rx[i] - cr * Sx[i]));
    }
    rep.max_segment_residual = flux_scale > 0.0 ? worst / flux_scale : worst;
    for (const auto& e : edges) {
        const auto [lv, lg] = detail::side_trace(rho.values, h, e.x, e.left_node, -1, kSkip - 1, kCount);
        const auto [rv, rg] = detail::side_trace(rho.values, h, e.x, e.right_node, +1, kSkip - 1, kCount);
        const double lvc = std::clamp(lv, 1e-12, 1.0 - 1e-12), rvc = std::clamp(rv, 1e-12, 1.0 - 1e-12);
        JumpResidual jr{e.x, lvc, rvc, std::abs(primitive_K(lvc, p) - primitive_K(rvc, p)), 0.0};
        jr.flux_mismatch = std::abs(primitive_G_density(lvc, p) * lg - primitive_G_density(rvc, p) * rg);
        if (sx_scale > 0.0) jr.flux_mismatch /= sx_scale;
        rep.max_K_jump = std::max(rep.max_K_jump, jr.K_jump);
        rep.max_flux_mismatch = std::max(rep.max_flux_mismatch, jr.flux_mismatch);
        rep.jumps.push_back(jr);
    }
    rep.pass = rep.max_K_jump <= tolerance && rep.max_flux_mismatch <= tolerance && rep.max_segment_residual <= tolerance;
    return rep;
}

/// Symmetric single-plateau state with Dirichlet edge values (jump_low,
/// jump_high) at x = L/2 -+ half_width: on each phase G(rho) = S - C_i with
/// C_i fixed by the edge value, iterated with the global elliptic solve.
inline SteadyProfile construct_plateau_steady(double half_width, const ModelParams& p, std::size_t n = 801,
                                              std::size_t max_iter = 500, double tol = 1e-12) {
    validate(p);
    const auto I = unstable_interval(p);
    if (!I) throw ValidationError("construct_plateau_steady: requires alpha > 3/4");
    if (!(half_width > 0.0 && half_width < 0.5 * p.L)) throw ValidationError("construct_plateau_steady: bad half width");
    const Grid1D grid(n, p.L);
    const double sl = 0.5 * p.L - half_width, sr = 0.5 * p.L + half_width;
    auto in_plateau = [&](double x) { return x >= sl && x <= sr; };
    SteadyProfile out{{}, {}, Field(grid), Field(grid), {}, {}};
    for (std::size_t i = 0; i < n; ++i) out.rho[i] = in_plateau(grid.x(i)) ? p.jump_high : p.jump_low;
    ChemoattractantSolver solver(grid);
    const double G_low = primitive_G(p.jump_low, p), G_high = primitive_G(p.jump_high, p);
    const detail::BranchTable low(p, Branch::Low, 2000), high(p, Branch::High, 2000);
    std::vector<double> next(n);
    double C_low = 0.0, C_high = 0.0;
    for (std::size_t it = 0; it < max_iter; ++it) {
        solver.solve(out.rho.values, out.S.values);
        const double S_edge = interp_uniform(out.S.values, grid.spacing(), sl);
        C_low = S_edge - G_low;
        C_high = S_edge - G_high;
        double change = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const bool hi = in_plateau(grid.x(i));
            next[i] = hi ? high.inverse(out.S[i] - C_high) : low.inverse(out.S[i] - C_low);
            change = std::max(change, std::abs(next[i] - out.rho[i]));
        }
        out.rho.values = next;
        if (change < tol) break;
    }
    solver.solve(out.rho.values, out.S.values);
    out.segments = {{0.0, sl, C_low}, {sl, sr, C_high}, {sr, p.L, C_low}};
    out.jumps = {{sl, p.jump_low, p.jump_high}, {sr, p.jump_high, p.jump_low}};
    // Exact gradients from G(rho) = S - C: rho_x = S_x / G'(rho).
    const auto Sx = detail::centred_gradient(out.S.values, grid.spacing());
    out.rho_x.assign(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) out.rho_x[i] = Sx[i] / primitive_G_density(out.rho[i], p);
    return out;
}

struct StabilityPredicates {
    bool theorem1;  ///< global nonlinear stability condition
    bool theorem2;  ///< local condition at the mean density
    double theorem1_lhs, theorem1_rhs;
    double theorem2_lhs, theorem2_rhs;
};

/// chi0 min(1, sqrt(L/2)) max (1-rho)(1-alpha rho) rho < 1 - 4 alpha/3, and
/// min(1, sqrt(L/2)) chi(rho_bar) rho_bar < D(rho_bar).
inline StabilityPredicates stability_predicates(double rho_bar, const ModelParams& p) {
    validate(p);
    detail::require_density(rho_bar, "stability_predicates");
    const double factor = std::min(1.0, std::sqrt(0.5 * p.L));
    StabilityPredicates s{};
    s.theorem1_lhs = p.chi0 * factor * max_flux_factor(p.alpha);
    s.theorem1_rhs = 1.0 - 4.0 * p.alpha / 3.0;
    s.theorem1 = s.theorem1_lhs < s.theorem1_rhs;
    s.theorem2_lhs = factor * detail::sensitivity_raw(rho_bar, p.alpha, p.chi0) * rho_bar;
    s.theorem2_rhs = detail::diffusivity_raw(rho_bar, p.alpha);
    s.theorem2 = s.theorem2_lhs < s.theorem2_rhs;
    return s;
}

}  // namespace motility
