/**
 * @file test_steady.cpp
 * @brief Critical points, time map, smooth and plateau steady states, weak
 *        solution checks, stability predicates.
 */
#include "motility/continuum.hpp"
#include "motility/initial.hpp"
#include "motility/steady.hpp"

#include <boost/math/tools/roots.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace motility;

namespace {

ModelParams smooth_params() {
    ModelParams p;
    p.alpha = 0.5;
    p.chi0 = 12.0;
    return p;
}

double independent_L_star(double rho_c, const ModelParams& p) {
    const double D = 3 * p.alpha * (rho_c - 2.0 / 3.0) * (rho_c - 2.0 / 3.0) + 1 - 4 * p.alpha / 3;
    const double cr = p.chi0 * (1 - rho_c) * (1 - p.alpha * rho_c) * rho_c;
    return std::numbers::pi / std::sqrt(cr / D - 1.0);
}

}  // namespace

TEST(CriticalPoints, RootsAndClassification) {
    const auto p = smooth_params();
    const double C = constant_for_critical_point(0.5, p);
    const auto set = critical_points(C, p);
    ASSERT_EQ(set.points.size(), 3u);
    for (const auto& q : set.points) {
        EXPECT_NEAR(primitive_G(q.rho, p) - q.rho + C, 0.0, 1e-10);
        const double D = diffusivity(q.rho, p);
        const double cr = chemotactic_sensitivity(q.rho, p) * q.rho;
        EXPECT_EQ(q.kind, cr > D ? CriticalKind::Centre : CriticalKind::Saddle);
    }
    const auto c = set.centre();
    ASSERT_TRUE(c);
    EXPECT_NEAR(c->rho, 0.5, 1e-10);
    EXPECT_EQ(set.points.front().kind, CriticalKind::Saddle);
    EXPECT_EQ(set.points.back().kind, CriticalKind::Saddle);
}

TEST(CriticalPoints, CentreBandBoundsTheCentres) {
    const auto p = smooth_params();
    const auto band = centre_band(p);
    ASSERT_EQ(band.size(), 2u);
    for (double r : band) EXPECT_NEAR(diffusivity(r, p), chemotactic_sensitivity(r, p) * r, 1e-10);
    for (double rc : {0.2, 0.5, 0.8}) {
        const auto c = critical_points(constant_for_critical_point(rc, p), p).centre();
        ASSERT_TRUE(c);
        EXPECT_GT(c->rho, band[0]);
        EXPECT_LT(c->rho, band[1]);
    }
}

TEST(CriticalPoints, FullBranchNeedsMonotoneG) {
    ModelParams p;  // alpha = 0.95
    EXPECT_THROW(critical_points(0.0, p, Branch::Full), ValidationError);
    const double C = constant_for_critical_point(0.1, p);
    const auto low = critical_points(C, p, Branch::Low);
    for (const auto& q : low.points) EXPECT_LT(q.rho, unstable_interval(p)->lo);
}

TEST(TimeMap, MinimalLengthMatchesLinearisation) {
    const auto p = smooth_params();
    for (double rc : {0.3, 0.5, 0.7}) {
        const double C = constant_for_critical_point(rc, p);
        EXPECT_NEAR(min_domain_length(C, p), independent_L_star(rc, p), 1e-9) << rc;
    }
}

TEST(TimeMap, SmallOrbitsApproachMinimalLength) {
    const auto p = smooth_params();
    const double C = constant_for_critical_point(0.5, p);
    const OrbitFamily fam(C, p);
    const double L_star = independent_L_star(fam.centre(), p);
    const auto o = fam.orbit(fam.centre() - 1e-4);
    ASSERT_TRUE(o);
    EXPECT_NEAR(o->half_period, L_star, 1e-6 * L_star);
}

TEST(TimeMap, HalfPeriodGrowsWithAmplitude) {
    const auto p = smooth_params();
    const OrbitFamily fam(constant_for_critical_point(0.5, p), p);
    double prev = 0.0;
    for (double amp : {1e-3, 0.05, 0.15, 0.3, 0.4}) {
        const auto o = fam.orbit(fam.centre() - amp);
        ASSERT_TRUE(o) << amp;
        EXPECT_GT(o->half_period, prev);
        // Both turning points lie on the same energy level.
        EXPECT_NEAR(fam.energy_W(o->rho_minus, o->f_minus, o->rho_plus), 0.0, 1e-10);
        prev = o->half_period;
    }
}

TEST(TimeMap, HamiltonianIsConserved) {
    const auto p = smooth_params();
    const double C = constant_for_critical_point(0.5, p);
    EXPECT_LE(hamiltonian_drift(C, 0.3, 2.0, 4000, p), 1e-8);
}

TEST(SmoothSteady, ResidualsWallsAndWeakCheck) {
    const auto p = smooth_params();
    const double C = constant_for_critical_point(0.5, p);
    const double L = 1.3 * min_domain_length(C, p);
    const auto prof = construct_smooth_steady(C, L, 1, p, 2001);
    EXPECT_LE(prof.residuals.relative_flux_residual, 1e-6);
    EXPECT_LE(prof.residuals.wall_gradient_ratio, 1e-6);
    EXPECT_LE(prof.residuals.max_G_residual, 1e-6);
    const auto rep = verify_weak_steady(prof, p);
    EXPECT_TRUE(rep.pass);
    EXPECT_TRUE(rep.jumps.empty());
    EXPECT_GT(prof.rho.max() - prof.rho.min(), 0.1);
}

TEST(SmoothSteady, TwoHalfPeriodsAreMirrorSymmetric) {
    const auto p = smooth_params();
    const double C = constant_for_critical_point(0.5, p);
    const double L = 2.6 * min_domain_length(C, p);
    const auto prof = construct_smooth_steady(C, L, 2, p, 2001);
    const std::size_t n = prof.rho.size();
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(prof.rho[i], prof.rho[n - 1 - i], 1e-8);
}

TEST(SmoothSteady, ShortDomainHasNoOrbit) {
    const auto p = smooth_params();
    const double C = constant_for_critical_point(0.5, p);
    EXPECT_THROW(construct_smooth_steady(C, 0.9 * min_domain_length(C, p), 1, p, 501), NoRootError);
}

TEST(SmoothSteady, StaysPutUnderTheDirectScheme) {
    const auto p = smooth_params();
    const double C = constant_for_critical_point(0.5, p);
    const double L = 1.05 * min_domain_length(C, p);
    const auto prof = construct_smooth_steady(C, L, 1, p, 401);
    ModelParams q = p;
    q.L = L;
    const std::vector<double> times{1.0};
    const auto r = simulate_continuum(prof.rho, q, 1.0, times);
    double drift = 0.0;
    for (std::size_t i = 0; i < prof.rho.size(); ++i) drift = std::max(drift, std::abs(r.final_rho[i] - prof.rho[i]));
    EXPECT_LT(drift, 1e-3);
}

TEST(WeakSteady, SyntheticJumpReportsItsSize) {
    const auto p = smooth_params();
    const double lo = 0.1;
    const double target = primitive_K(lo, p) + 0.1;
    std::uintmax_t iters = 100;
    const auto [a, b] = boost::math::tools::bisect([&](double r) { return primitive_K(r, p) - target; }, lo, 0.99,
                                                   boost::math::tools::eps_tolerance<double>(50), iters);
    const double hi = 0.5 * (a + b);
    const Grid1D g(401, p.L);
    SteadyProfile s{{}, {}, Field(g), Field(g), {}, {}};
    const double xj = 0.5 * p.L + 0.5 * g.spacing();
    for (std::size_t i = 0; i < g.size(); ++i) s.rho[i] = g.x(i) < xj ? lo : hi;
    s.S = solve_chemoattractant(s.rho);
    s.jumps = {{xj, lo, hi}};
    const auto rep = verify_weak_steady(s, p);
    ASSERT_EQ(rep.jumps.size(), 1u);
    EXPECT_NEAR(rep.max_K_jump, 0.1, 1e-12);
    EXPECT_FALSE(rep.pass);
}

TEST(PlateauSteady, ConfiguredJumpValuesLeaveSmallKMismatch) {
    ModelParams p;
    const auto coarse = construct_plateau_steady(1.0, p, 401);
    const auto fine = construct_plateau_steady(1.0, p, 1601);
    const auto rc = verify_weak_steady(coarse, p);
    const auto rf = verify_weak_steady(fine, p);
    const double K_mismatch = std::abs(primitive_K(p.jump_high, p) - primitive_K(p.jump_low, p));
    EXPECT_NEAR(rf.max_K_jump, K_mismatch, 1e-14);
    EXPECT_LT(K_mismatch, 1e-3);
    EXPECT_LT(rf.max_flux_mismatch, 0.5 * rc.max_flux_mismatch);
    EXPECT_LE(rf.max_segment_residual, 1e-6);
    ASSERT_EQ(fine.jumps.size(), 2u);
    EXPECT_GT(fine.rho[fine.rho.size() / 2], unstable_interval(p)->hi);
}

TEST(WeakSteady, SimulatedPlateauImprovesWithResolution) {
    ModelParams p;
    double prev = 1e300;
    for (std::size_t n : {400, 800}) {
        const Grid1D g(n, p.L);
        const Field init = make_initial(ic::Bell{4.0, 1.0, 0.15, 0.1}, g);
        const std::vector<double> times{7.0};
        const auto r = simulate_continuum(init, p, 7.0, times);
        const auto& s = r.snapshots.back();
        const auto rep = verify_weak_steady(s.rho, s.S, p);
        EXPECT_EQ(rep.jumps.size(), 2u);
        EXPECT_LT(rep.max_K_jump, prev);
        prev = rep.max_K_jump;
    }
    EXPECT_LE(prev, 1e-2);
}

TEST(Stability, GlobalConditionImpliesLocal) {
    for (double a = 0.0; a <= 0.75; a += 0.05) {
        for (double chi = 0.1; chi <= 6.0; chi += 0.3) {
            for (double L : {1.0, 2.0, 8.0}) {
                ModelParams p;
                p.alpha = a;
                p.chi0 = chi;
                p.L = L;
                for (double rb = 0.05; rb < 1.0; rb += 0.1) {
                    const auto s = stability_predicates(rb, p);
                    if (s.theorem1) {
                        EXPECT_TRUE(s.theorem2) << a << " " << chi << " " << rb;
                    }
                }
            }
        }
    }
}

TEST(Stability, LocalConditionWeakerThanGlobal) {
    ModelParams p;
    p.alpha = 0.5;
    p.chi0 = 3.0;
    const auto s = stability_predicates(0.05, p);
    EXPECT_TRUE(s.theorem2);
    EXPECT_FALSE(s.theorem1);
    // Spike-on-flat preset parameters: alpha = 0.95 and mean density 0.0444.
    const auto f7 = stability_predicates(0.0444, ModelParams{});
    EXPECT_TRUE(f7.theorem2);
    EXPECT_FALSE(f7.theorem1);
}

TEST(Stability, ShortDomainFactor) {
    ModelParams p;
    p.alpha = 0.2;
    p.chi0 = 2.0;
    p.L = 0.5;
    const auto s = stability_predicates(0.3, p);
    EXPECT_NEAR(s.theorem2_lhs, 0.5 * chemotactic_sensitivity(0.3, p) * 0.3, 1e-14);
    EXPECT_NEAR(s.theorem1_lhs, 0.5 * 2.0 * max_flux_factor(0.2), 1e-14);
}
