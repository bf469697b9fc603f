/**
 * @file test_continuum.cpp
 * @brief Direct finite-difference scheme: conservation, linear growth rates,
 *        bounds, hit detection, shape analysis helpers.
 */
#include "motility/continuum.hpp"
#include "motility/initial.hpp"
#include "motility/plateau.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace motility;

namespace {

ModelParams weak_params() {
    ModelParams p;
    p.alpha = 0.5;
    p.chi0 = 1.0;
    return p;
}

}  // namespace

TEST(ContinuumRhs, UniformStateIsStationary) {
    const auto p = weak_params();
    Field rho(Grid1D(64, p.L), std::vector<double>(64, 0.4));
    SimState s(rho, solve_chemoattractant(rho), 0.0);
    for (double v : continuum_rhs(s, p)) EXPECT_NEAR(v, 0.0, 1e-10);
}

TEST(ContinuumRhs, PureDiffusionMatchesSecondDerivative) {
    ModelParams p;
    p.alpha = 0.0;
    p.chi0 = 0.0;
    const std::size_t n = 401;
    const Grid1D g(n, p.L);
    Field rho(g);
    const double q = 3.0 * std::numbers::pi / p.L;
    for (std::size_t i = 0; i < n; ++i) rho[i] = 0.5 + 0.1 * std::cos(q * g.x(i));
    SimState s(rho, solve_chemoattractant(rho), 0.0);
    const auto d = continuum_rhs(s, p);
    for (std::size_t i = 1; i + 1 < n; ++i) EXPECT_NEAR(d[i], -q * q * 0.1 * std::cos(q * g.x(i)), 2e-4);
    // Boundary sites are full lattice cells with a single neighbour.
    const double h = g.spacing();
    EXPECT_NEAR(d[0], (rho[1] - rho[0]) / (h * h), 1e-9);
    EXPECT_NEAR(d[n - 1], (rho[n - 2] - rho[n - 1]) / (h * h), 1e-9);
}

TEST(ContinuumRun, BenchmarkConservesMass) {
    ModelParams p;
    const Grid1D g(200, p.L);
    const Field init = make_initial(ic::Bell{4.0, 1.0, 0.15, 0.1}, g);
    const std::vector<double> times{1.0, 2.0};
    const auto r = simulate_continuum(init, p, 2.0, times);
    ASSERT_FALSE(r.abort_reason);
    const double m0 = site_mass(init.values, g.spacing());
    for (const auto& s : r.snapshots) EXPECT_LE(std::abs(s.diagnostics.mass - m0) / m0, 1e-12);
}

TEST(ContinuumRun, GrowthRateMatchesDispersionRelation) {
    ModelParams p;
    p.alpha = 0.5;
    p.chi0 = 12.0;
    const double k = 4.0;
    const double expected = dispersion_rate(k, 0.5, p);
    const double measured = measure_growth_rate(0.5, k, 1e-5, p, {0.0, 0.5, 30});
    EXPECT_NEAR(measured, expected, 0.05 * std::abs(expected));
}

TEST(ContinuumRun, DecayRateMatchesDispersionRelation) {
    const auto p = weak_params();
    const double k = 2.0;
    const double expected = dispersion_rate(k, 0.3, p);
    ASSERT_LT(expected, 0.0);
    const double measured = measure_growth_rate(0.3, k, 1e-4, p, {0.0, 2.0, 30});
    EXPECT_NEAR(measured, expected, 0.05 * std::abs(expected));
}

TEST(ContinuumRun, RegionOneStaysInUnitInterval) {
    const auto p = weak_params();
    const Field init = make_initial(ic::Bell{4.0, 0.5, 0.85, 0.1}, Grid1D(201, p.L));
    const std::vector<double> times{0.5, 2.0};
    const auto r = simulate_continuum(init, p, 2.0, times);
    EXPECT_EQ(r.final_diagnostics.bound_violations, 0u);
    for (const auto& s : r.snapshots) {
        EXPECT_GE(s.rho.min(), 0.0);
        EXPECT_LE(s.rho.max(), init.max());
    }
}

TEST(ContinuumRun, StopsAtFirstContactWithUnstableInterval) {
    ModelParams p;
    const Grid1D g(201, p.L);
    const Field init = make_initial(ic::Bell{4.0, 1.0, 0.15, 0.1}, g);
    const std::vector<double> times{0.1, 5.0};
    const auto r = simulate_continuum(init, p, 5.0, times, true);
    ASSERT_TRUE(r.hit);
    ASSERT_TRUE(r.hit_state);
    const auto I = unstable_interval(p);
    EXPECT_NEAR(r.hit_state->rho.max(), I->lo, 1e-12);
    EXPECT_NEAR(r.hit->x_c, 4.0, 1e-12);
    EXPECT_GT(r.hit->t_c, 0.1);
    EXPECT_DOUBLE_EQ(r.hit_state->t, r.hit->t_c);
    EXPECT_EQ(r.snapshots.size(), 1u);  // t = 5 lies beyond the hit
}

TEST(ContinuumRun, NoHitBelowCriticalAdhesion) {
    const auto p = weak_params();
    const Field init = make_initial(ic::Bell{4.0, 1.0, 0.15, 0.1}, Grid1D(101, p.L));
    const std::vector<double> times{1.0};
    const auto r = simulate_continuum(init, p, 1.0, times, true);
    EXPECT_FALSE(r.hit);
}

TEST(Initial, RejectsDensitiesOutsideUnitInterval) {
    EXPECT_THROW(make_initial(ic::Bell{4.0, 1.0, 0.95, 0.1}, Grid1D(50, 8.0)), ValidationError);
    EXPECT_THROW(make_initial(ic::Uniform{-0.1}, Grid1D(50, 8.0)), ValidationError);
}

TEST(Initial, SamplesAreResampled) {
    const Field f = make_initial(ic::Samples{{0.0, 0.5, 1.0}}, Grid1D(11, 8.0));
    for (std::size_t i = 0; i < 11; ++i) EXPECT_NEAR(f[i], i / 10.0, 1e-14);
}

TEST(Shape, PlateauEdgesAndCounts) {
    ModelParams p;
    const Grid1D g(401, p.L);
    const Field f = make_initial(ic::Plateaus{0.05, {{2.0, 1.0, 0.99}, {6.0, 0.5, 0.99}}}, g);
    EXPECT_EQ(count_plateaus(f.values, p), 2u);
    const auto edges = detect_plateau_edges(f.values, g.spacing(), p);
    ASSERT_EQ(edges.size(), 4u);
    EXPECT_TRUE(edges[0].rising());
    EXPECT_NEAR(edges[0].left_value, 0.05, 1e-14);
    EXPECT_NEAR(edges[0].right_value, 0.99, 1e-14);
    EXPECT_NEAR(edges[0].x, 1.5, g.spacing());
    EXPECT_NEAR(edges[3].x, 6.25, g.spacing());
}

TEST(Shape, GridOscillationsDetected) {
    std::vector<double> smooth(100), rough(100);
    for (std::size_t i = 0; i < 100; ++i) {
        smooth[i] = 0.5 + 0.01 * std::sin(0.05 * static_cast<double>(i));
        rough[i] = smooth[i] + (i % 2 ? 1e-3 : -1e-3);
    }
    EXPECT_FALSE(has_grid_oscillations(smooth));
    EXPECT_TRUE(has_grid_oscillations(rough));
}

TEST(Fitting, LineAndCosineCoefficient) {
    const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
    const auto fit = fit_line(x, y);
    EXPECT_NEAR(fit.slope, 2.0, 1e-14);
    EXPECT_NEAR(fit.intercept, 1.0, 1e-14);
    EXPECT_NEAR(fit.r2, 1.0, 1e-14);
    const Grid1D g(801, 8.0);
    std::vector<double> v(801);
    for (std::size_t i = 0; i < 801; ++i) v[i] = 0.4 + 0.01 * std::cos(3.0 * std::numbers::pi * g.x(i) / 8.0);
    EXPECT_NEAR(cosine_coefficient(v, 0.4, 3.0, g), 0.01, 1e-8);
}
