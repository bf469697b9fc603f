/**
 * @file model.hpp
 * @brief Closed-form coefficients of the adhesion/chemotaxis model.
 *
 * The continuum density equation is
 *
 *   rho_t = ( D(rho) rho_x - chi(rho) rho S_x )_x ,   S_xx = S - rho,
 *
 * with D(rho) = 3 alpha (rho - 2/3)^2 + 1 - 4 alpha / 3 and
 * chi(rho) = chi0 (1 - rho)(1 - alpha rho).  For alpha > 3/4 the diffusivity
 * is negative on an open interval around 2/3 (the unstable interval).
 */
#pragma once

#include "motility/errors.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>

namespace motility {

inline constexpr double kAlphaCritical = 0.75;

struct ModelParams {
    double alpha = 0.95;
    double chi0 = 16.0;
    double L = 8.0;
    double jump_low = 0.055;   ///< low-side plateau edge value
    double jump_high = 0.99;   ///< high-side plateau edge value
};

struct UnstableInterval {
    double lo;
    double hi;
    [[nodiscard]] bool contains(double rho) const { return rho > lo && rho < hi; }
};

enum class Region { I, II, III, IV };

inline std::string to_string(Region r) {
    switch (r) {
        case Region::I: return "I";
        case Region::II: return "II";
        case Region::III: return "III";
        case Region::IV: return "IV";
    }
    return "?";
}

namespace detail {

inline void require_density(double rho, const char* what) {
    if (!(rho >= 0.0 && rho <= 1.0)) {
        std::ostringstream os;
        os << what << ": density " << rho << " outside [0,1]";
        throw DomainError(os.str());
    }
}

// Unchecked kernels; solvers call these on states that may overshoot [0,1]
// by round-off.
inline double diffusivity_raw(double rho, double alpha) {
    const double d = rho - 2.0 / 3.0;
    return 3.0 * alpha * d * d + 1.0 - 4.0 * alpha / 3.0;
}

inline double diffusivity_slope_raw(double rho, double alpha) {
    return 6.0 * alpha * (rho - 2.0 / 3.0);
}

inline double sensitivity_raw(double rho, double alpha, double chi0) {
    return chi0 * (1.0 - rho) * (1.0 - alpha * rho);
}

/// (1 - rho)(1 - alpha rho) rho, the chemotactic flux factor per unit chi0.
inline double flux_factor(double rho, double alpha) {
    return (1.0 - rho) * (1.0 - alpha * rho) * rho;
}

inline double flux_factor_slope(double rho, double alpha) {
    return 1.0 - 2.0 * (1.0 + alpha) * rho + 3.0 * alpha * rho * rho;
}

inline double flux_factor_curvature(double rho, double alpha) {
    return -2.0 * (1.0 + alpha) + 6.0 * alpha * rho;
}

/// Real roots of a x^2 + b x + c inside the open interval (lo, hi).
inline int quadratic_roots_in(double a, double b, double c, double lo, double hi,
                              std::array<double, 2>& out) {
    int count = 0;
    auto push = [&](double r) {
        if (r > lo && r < hi) out[count++] = r;
    };
    if (std::abs(a) < 1e-300) {
        if (std::abs(b) > 1e-300) push(-c / b);
        return count;
    }
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return 0;
    const double sq = std::sqrt(disc);
    // Numerically stable pair.
    const double q = -0.5 * (b + std::copysign(sq, b));
    if (q != 0.0) {
        push(q / a);
        push(c / q);
    } else {
        push(0.0);
    }
    return count;
}

}  // namespace detail

inline void validate(const ModelParams& p) {
    auto fail = [](const std::string& msg) { throw ValidationError(msg); };
    if (!(p.alpha >= 0.0 && p.alpha <= 1.0)) fail("alpha must lie in [0,1]");
    if (!(p.chi0 >= 0.0) || !std::isfinite(p.chi0)) fail("chi0 must be >= 0");
    if (!(p.L > 0.0) || !std::isfinite(p.L)) fail("L must be > 0");
    if (!(p.jump_low > 0.0 && p.jump_low < 1.0)) fail("jump_low must lie in (0,1)");
    if (!(p.jump_high > 0.0 && p.jump_high < 1.0)) fail("jump_high must lie in (0,1)");
    if (!(p.jump_low < p.jump_high)) fail("jump_low must be below jump_high");
    if (p.alpha > kAlphaCritical) {
        const double disc = std::sqrt(p.alpha * (4.0 * p.alpha - 3.0));
        const double lo = (2.0 * p.alpha - disc) / (3.0 * p.alpha);
        const double hi = (2.0 * p.alpha + disc) / (3.0 * p.alpha);
        if (!(p.jump_low < lo)) fail("jump_low must lie below the unstable interval");
        if (!(p.jump_high > hi)) fail("jump_high must lie above the unstable interval");
    }
}

inline double diffusivity(double rho, const ModelParams& p) {
    detail::require_density(rho, "diffusivity");
    return detail::diffusivity_raw(rho, p.alpha);
}

inline double chemotactic_sensitivity(double rho, const ModelParams& p) {
    detail::require_density(rho, "chemotactic_sensitivity");
    return detail::sensitivity_raw(rho, p.alpha, p.chi0);
}

/// Interval where D < 0; empty for alpha <= 3/4.
inline std::optional<UnstableInterval> unstable_interval(const ModelParams& p) {
    if (p.alpha <= kAlphaCritical) return std::nullopt;
    const double a = p.alpha;
    const double disc = std::sqrt(a * (4.0 * a - 3.0));
    return UnstableInterval{(2.0 * a - disc) / (3.0 * a), (2.0 * a + disc) / (3.0 * a)};
}

/// Growth rate of the k-th Neumann cosine mode about the uniform state rho_bar.
inline double dispersion_rate(double k, double rho_bar, const ModelParams& p) {
    detail::require_density(rho_bar, "dispersion_rate");
    const double q2 = k * k * std::numbers::pi * std::numbers::pi;
    const double L2 = p.L * p.L;
    const double D = detail::diffusivity_raw(rho_bar, p.alpha);
    const double chirho = detail::sensitivity_raw(rho_bar, p.alpha, p.chi0) * rho_bar;
    return (q2 / L2) * (-D + L2 * chirho / (L2 + q2));
}

/// Wavenumber k*pi/L maximising the dispersion relation.
inline double dominant_wavemode(double rho_bar, const ModelParams& p) {
    detail::require_density(rho_bar, "dominant_wavemode");
    const double D = detail::diffusivity_raw(rho_bar, p.alpha);
    if (D <= 0.0) throw DomainError("dominant_wavemode: D(rho_bar) <= 0, growth unbounded in k");
    const double chirho = detail::sensitivity_raw(rho_bar, p.alpha, p.chi0) * rho_bar;
    if (chirho < D) throw NoUnstableModeError("dominant_wavemode: chi(rho)rho < D(rho), all modes decay");
    return std::sqrt(std::sqrt(chirho / D) - 1.0);
}

/// Primitive of D normalised by K(0) = 0.
inline double primitive_K(double rho, const ModelParams& p) {
    const double d = rho - 2.0 / 3.0;
    return p.alpha * d * d * d + (1.0 - 4.0 * p.alpha / 3.0) * rho + 8.0 * p.alpha / 27.0;
}

/// Integrand of G: D(rho) / (chi(rho) rho).
inline double primitive_G_density(double rho, const ModelParams& p) {
    return detail::diffusivity_raw(rho, p.alpha) /
           (detail::sensitivity_raw(rho, p.alpha, p.chi0) * rho);
}

namespace detail {

/// int_a^b w(rho) D(rho)/(chi(rho) rho) drho for a, b in (0,1), integrated in
/// the logit variable u = ln(rho/(1-rho)).  There the measure becomes
/// D/(chi0 (1 - alpha rho)) du, analytic in a strip of half-width pi about
/// the real axis, so 20-point Gauss-Legendre on pieces of length <= 1/2 is
/// accurate to round-off and the endpoint singularities disappear.
template <class Weight>
double logit_integral(double a, double b, const ModelParams& p, Weight&& w) {
    if (a == b) return 0.0;
    auto logit = [](double r) { return std::log(r / (1.0 - r)); };
    auto f = [&](double u) {
        const double r = 1.0 / (1.0 + std::exp(-u));
        return w(r) * diffusivity_raw(r, p.alpha) / (p.chi0 * (1.0 - p.alpha * r));
    };
    const double ua = logit(a), ub = logit(b);
    const int pieces = std::max(1, static_cast<int>(std::ceil(std::abs(ub - ua) / 0.5)));
    const double du = (ub - ua) / pieces;
    double sum = 0.0;
    for (int k = 0; k < pieces; ++k) {
        sum += boost::math::quadrature::gauss<double, 20>::integrate(f, ua + k * du, ua + (k + 1) * du);
    }
    return sum;
}

}  // namespace detail

/// Definite integral of D/(chi rho) over [a, b], both inside (0,1).
inline double primitive_G_between(double a, double b, const ModelParams& p) {
    return detail::logit_integral(a, b, p, [](double) { return 1.0; });
}

/// Primitive of D/(chi rho) with base point G(1/2) = 0.
inline double primitive_G(double rho, const ModelParams& p) {
    if (!(p.chi0 > 0.0)) throw DomainError("primitive_G: requires chi0 > 0");
    if (!(rho > 0.0 && rho < 1.0)) {
        throw SingularEndpointError("primitive_G: integrand diverges at rho = 0 and rho = 1");
    }
    return primitive_G_between(0.5, rho, p);
}

/// Minimum over [0,1] of F(rho) = D(rho) - chi(rho) rho, with its location.
struct ScalarExtremum {
    double at;
    double value;
};

inline ScalarExtremum min_F(const ModelParams& p) {
    auto F = [&](double r) {
        return detail::diffusivity_raw(r, p.alpha) - p.chi0 * detail::flux_factor(r, p.alpha);
    };
    // F' = 6 alpha (rho - 2/3) - chi0 (1 - 2(1+alpha) rho + 3 alpha rho^2), a quadratic.
    const double a = -3.0 * p.alpha * p.chi0;
    const double b = 6.0 * p.alpha + 2.0 * (1.0 + p.alpha) * p.chi0;
    const double c = -4.0 * p.alpha - p.chi0;
    std::array<double, 2> roots{};
    const int n = detail::quadratic_roots_in(a, b, c, 0.0, 1.0, roots);
    ScalarExtremum best{0.0, F(0.0)};
    if (F(1.0) < best.value) best = {1.0, F(1.0)};
    for (int i = 0; i < n; ++i) {
        if (F(roots[i]) < best.value) best = {roots[i], F(roots[i])};
    }
    return best;
}

/// max over [0,1] of (1-rho)(1-alpha rho) rho.
inline double max_flux_factor(double alpha) {
    std::array<double, 2> roots{};
    const int n = detail::quadratic_roots_in(3.0 * alpha, -2.0 * (1.0 + alpha), 1.0, 0.0, 1.0, roots);
    double best = 0.0;
    for (int i = 0; i < n; ++i) best = std::max(best, detail::flux_factor(roots[i], alpha));
    return best;
}

inline Region classify_region(double alpha, double chi0) {
    if (alpha > kAlphaCritical) return Region::IV;
    const ModelParams p{alpha, chi0, 1.0};
    if (min_F(p).value < 0.0) return Region::III;
    if (chi0 * max_flux_factor(alpha) < 1.0 - 4.0 * alpha / 3.0) return Region::I;
    return Region::II;
}

/// chi0 on the boundary between regions II and III: F = F' = 0 has a root in (0,1).
inline double critical_curve_chi0(double alpha) {
    if (!(alpha >= 0.0 && alpha <= kAlphaCritical)) {
        throw DomainError("critical_curve_chi0: alpha must lie in [0, 3/4]");
    }
    using detail::diffusivity_raw;
    using detail::diffusivity_slope_raw;
    using detail::flux_factor;
    using detail::flux_factor_slope;
    using detail::flux_factor_curvature;

    // On the curve chi0 = D/p at the minimiser of D/p; seed Newton from a scan.
    double rho = 0.5;
    double best = std::numeric_limits<double>::infinity();
    constexpr int kScan = 400;
    for (int i = 1; i < kScan; ++i) {
        const double r = static_cast<double>(i) / kScan;
        const double ratio = diffusivity_raw(r, alpha) / flux_factor(r, alpha);
        if (ratio < best) {
            best = ratio;
            rho = r;
        }
    }
    double chi = best;

    bool converged = false;
    for (int it = 0; it < 60; ++it) {
        const double F = diffusivity_raw(rho, alpha) - chi * flux_factor(rho, alpha);
        const double Fp = diffusivity_slope_raw(rho, alpha) - chi * flux_factor_slope(rho, alpha);
        const double Fpp = 6.0 * alpha - chi * flux_factor_curvature(rho, alpha);
        // Jacobian of (F, F') in (rho, chi).
        const double j11 = Fp, j12 = -flux_factor(rho, alpha);
        const double j21 = Fpp, j22 = -flux_factor_slope(rho, alpha);
        const double det = j11 * j22 - j12 * j21;
        if (std::abs(det) < 1e-300) break;
        double drho = (F * j22 - Fp * j12) / det;
        double dchi = (j11 * Fp - j21 * F) / det;
        double damp = 1.0;
        while (damp > 1e-4 && !(rho - damp * drho > 0.0 && rho - damp * drho < 1.0)) damp *= 0.5;
        rho -= damp * drho;
        chi -= damp * dchi;
        if (std::abs(drho) < 1e-15 && std::abs(F) < 1e-14 && std::abs(Fp) < 1e-12) {
            converged = true;
            break;
        }
    }
    if (converged && chi >= 0.0 && rho > 0.0 && rho < 1.0) return chi;

    // Fallback: bisection on chi0 for min F = 0.
    double lo = 0.0, hi = std::max(1.0, 2.0 * best);
    ModelParams p{alpha, hi, 1.0};
    while (min_F(p).value >= 0.0) {
        hi *= 2.0;
        p.chi0 = hi;
        if (hi > 1e12) throw NoRootError("critical_curve_chi0: no double root in (0,1)");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
        p.chi0 = 0.5 * (lo + hi);
        (min_F(p).value < 0.0 ? hi : lo) = p.chi0;
    }
    return 0.5 * (lo + hi);
}

}  // namespace motility
