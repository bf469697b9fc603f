/**
 * @file test_stefan.cpp
 * @brief Three-phase free-boundary continuation: rescaled phase equation,
 *        spike insertion, interface speeds, conservation and symmetry.
 */
#include "motility/continuum.hpp"
#include "motility/initial.hpp"
#include "motility/stefan.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace motility;

namespace {

ModelParams heat_params() {
    ModelParams p;
    p.alpha = 0.0;  // D = 1
    p.chi0 = 0.0;
    p.L = 4.0;
    return p;
}

Phase sampled(double a, double b, std::size_t N, double (*f)(double)) {
    return detail::sample_phase(PhaseKind::Low, a, b, N, [f](double x) { return f(x); });
}

double smooth_profile(double x) { return 0.5 + 0.2 * std::sin(1.3 * x + 0.4); }
double smooth_dx(double x) { return 0.2 * 1.3 * std::cos(1.3 * x + 0.4); }
double smooth_dxx(double x) { return -0.2 * 1.3 * 1.3 * std::sin(1.3 * x + 0.4); }

struct FrameErrors {
    double interior;  ///< nodes at least two away from an interface
    double adjacent;  ///< nodes next to an interface
    double scale;     ///< max |rho_xx + c rho_x|
};

/// phase_rhs against rho_xx + c rho_x on moving, non-wall ends.
FrameErrors moving_frame_error(std::size_t N) {
    const auto p = heat_params();
    const Phase ph = sampled(1.0, 2.5, N, smooth_profile);
    const double sl = -0.3, sr = 0.5;
    std::vector<double> out(N);
    phase_rhs(ph, sl, sr, false, false, [](double) { return 0.0; }, p, out);
    FrameErrors e{0.0, 0.0, 0.0};
    for (std::size_t j = 1; j + 1 < N; ++j) {
        const double xi = static_cast<double>(j) / static_cast<double>(N - 1);
        const double x = ph.x(j);
        const double c = sl * (1.0 - xi) + sr * xi;
        const double exact = smooth_dxx(x) + c * smooth_dx(x);
        const double err = std::abs(out[j] - exact);
        e.scale = std::max(e.scale, std::abs(exact));
        if (j == 1 || j + 2 == N) {
            e.adjacent = std::max(e.adjacent, err);
        } else {
            e.interior = std::max(e.interior, err);
        }
    }
    EXPECT_EQ(out.front(), 0.0);
    EXPECT_EQ(out.back(), 0.0);
    return e;
}

struct Benchmark {
    ModelParams p;
    SimState hit_state{Field(Grid1D(3, 8.0)), Field(Grid1D(3, 8.0)), 0.0};
    HitEvent hit{};
    InsertionReport report;
    StefanResult result;
    std::vector<double> times{1.3, 2.0, 7.0};
};

const Benchmark& benchmark() {
    static const Benchmark b = [] {
        Benchmark out;
        const Grid1D g(400, out.p.L);
        const Field init = make_initial(ic::Bell{4.0, 1.0, 0.15, 0.1}, g);
        const auto r = simulate_continuum(init, out.p, 7.0, {}, true);
        out.hit_state = *r.hit_state;
        out.hit = *r.hit;
        StefanOptions opt;
        opt.global_nodes = 400;
        out.result = simulate_stefan(out.hit_state, out.hit, out.p, 7.0, out.times, opt, &out.report);
        return out;
    }();
    return b;
}

}  // namespace

TEST(PhaseRhs, MovingFrameChangeOfVariables) {
    const auto e1 = moving_frame_error(101);
    const auto e2 = moving_frame_error(201);
    EXPECT_LT(e2.interior, 1e-4);
    EXPECT_GT(e1.interior / e2.interior, 3.5);
    // The interface flux enters half a cell from the face it replaces: an
    // O(1) but bounded local error at the adjacent node, traded for exact
    // mass exchange between phases.
    EXPECT_LT(e1.adjacent, 0.6 * e1.scale);
    EXPECT_LT(e2.adjacent, 0.6 * e2.scale);
}

TEST(PhaseRhs, NoFluxWallsReduceToHeatEquation) {
    const auto p = heat_params();
    const double a = 0.5, b = 3.0, w = b - a;
    const std::size_t N = 201;
    Phase ph = detail::sample_phase(PhaseKind::Low, a, b, N,
                                    [&](double x) { return 0.5 + 0.1 * std::cos(std::numbers::pi * (x - a) / w); });
    std::vector<double> out(N);
    phase_rhs(ph, 0.0, 0.0, true, true, [](double) { return 0.0; }, p, out);
    const double k2 = std::numbers::pi * std::numbers::pi / (w * w);
    for (std::size_t j = 0; j < N; ++j) {
        EXPECT_NEAR(out[j], -k2 * 0.1 * std::cos(std::numbers::pi * (ph.x(j) - a) / w), 2e-3) << j;
    }
    // Pure diffusion between walls conserves w * trapezoid(rho).
    double sum = 0.5 * (out.front() + out.back());
    for (std::size_t j = 1; j + 1 < N; ++j) sum += out[j];
    EXPECT_NEAR(sum * ph.spacing() * w, 0.0, 1e-10);
}

TEST(Decomposition, SinglePhaseRoundTrip) {
    const Grid1D g(101, 8.0);
    const Field f = make_initial(ic::Bell{4.0, 1.0, 0.15, 0.1}, g);
    const auto d = single_phase(f, 0.0, 101);
    const Field back = assemble_global(d, g);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(back[i], f[i], 1e-14);
    EXPECT_NEAR(d.mass(), trapezoid(f.values, g.spacing()), 1e-13);
}

TEST(Insertion, SplitsIntoLowHighLow) {
    const auto& b = benchmark();
    StefanOptions opt;
    opt.global_nodes = 400;
    InsertionReport rep;
    const auto d = insert_spike(b.hit_state, b.hit, b.p, opt, &rep);
    ASSERT_EQ(d.phases.size(), 3u);
    EXPECT_EQ(d.phases[1].kind, PhaseKind::High);
    EXPECT_NEAR(d.phases[1].width(), b.hit_state.rho.grid.spacing(), 1e-12);
    EXPECT_NEAR(0.5 * (d.phases[1].left_x + d.phases[1].right_x), b.hit.x_c, 1e-12);
    EXPECT_EQ(d.phases[0].values.back(), b.p.jump_low);
    EXPECT_EQ(d.phases[1].values.front(), b.p.jump_high);
    EXPECT_EQ(d.phases[2].values.front(), b.p.jump_low);
    EXPECT_NEAR(rep.total_change, d.mass() - trapezoid(b.hit_state.rho.values, b.hit_state.rho.grid.spacing()), 1e-14);
    EXPECT_LT(std::abs(rep.total_change) / d.mass(), 1e-3);
}

TEST(Insertion, PlateauFattensAfterInsertion) {
    const auto& b = benchmark();
    StefanOptions opt;
    const auto d = insert_spike(b.hit_state, b.hit, b.p, opt);
    const Grid1D g(400, b.p.L);
    const Field S = solve_chemoattractant(assemble_global(d, g));
    const auto speeds = boundary_speeds(d, S, b.p);
    ASSERT_EQ(speeds.size(), 2u);
    EXPECT_LT(speeds[0], 0.0);
    EXPECT_GT(speeds[1], 0.0);
    EXPECT_NEAR(speeds[0], -speeds[1], 1e-6 * std::abs(speeds[1]));
}

TEST(Insertion, WallHitIsUnsupported) {
    const auto& b = benchmark();
    HitEvent wall{0.0, b.hit.t_c, 0};
    EXPECT_THROW(insert_spike(b.hit_state, wall, b.p), UnsupportedGeometryError);
}

TEST(Insertion, SecondSpikeInsideLowPhase) {
    const auto& b = benchmark();
    auto d = insert_spike(b.hit_state, b.hit, b.p);
    const double before = d.mass();
    const auto rep = insert_spike(d, 6.0, 0.02, b.p);
    EXPECT_EQ(d.phases.size(), 5u);
    EXPECT_EQ(d.high_phase_count(), 2u);
    EXPECT_NEAR(d.mass() - before, rep.total_change, 1e-13);
    EXPECT_THROW(insert_spike(d, 4.0, 0.5, b.p), UnsupportedGeometryError);
}

TEST(Merge, ConservesMass) {
    const auto& b = benchmark();
    auto d = insert_spike(b.hit_state, b.hit, b.p);
    const double before = d.mass();
    detail::merge_phases(d, 0, 2, PhaseKind::Low, b.hit.x_c, 200);
    EXPECT_EQ(d.phases.size(), 1u);
    EXPECT_NEAR(d.mass(), before, 1e-13);
}

TEST(StefanRun, BenchmarkConservesMass) {
    const auto& r = benchmark().result;
    ASSERT_FALSE(r.abort_reason);
    EXPECT_LE(r.max_relative_mass_drift, 1e-10);
    EXPECT_NEAR(r.final_mass, r.initial_mass, 1e-10 * r.initial_mass);
}

TEST(StefanRun, PhasesStayOnTheirSideOfTheUnstableInterval) {
    const auto& b = benchmark();
    const auto I = unstable_interval(b.p);
    EXPECT_LT(b.result.max_low_phase_value, I->lo);
    EXPECT_GT(b.result.min_high_phase_value, I->hi);
    EXPECT_TRUE(b.result.dirichlet_pinned);
    EXPECT_TRUE(b.result.events.empty());
}

TEST(StefanRun, SymmetricDataStaySymmetric) {
    const auto& b = benchmark();
    ASSERT_EQ(b.result.snapshots.size(), b.times.size());
    for (const auto& s : b.result.snapshots) {
        const auto bd = s.decomposition.boundaries();
        ASSERT_EQ(bd.size(), 2u);
        EXPECT_NEAR(bd[0] + bd[1], b.p.L, 1e-6);
        const std::size_t n = s.rho.size();
        for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(s.rho[i], s.rho[n - 1 - i], 1e-6);
    }
}

TEST(StefanRun, PlateauWidens) {
    const auto& b = benchmark();
    double prev = 0.0;
    for (const auto& s : b.result.snapshots) {
        const auto bd = s.decomposition.boundaries();
        EXPECT_GT(bd[1] - bd[0], prev);
        prev = bd[1] - bd[0];
    }
    EXPECT_EQ(b.result.final_state.high_phase_count(), 1u);
}

TEST(StefanRun, RejectsSubcriticalAdhesion) {
    ModelParams p;
    p.alpha = 0.5;
    const Field f = make_initial(ic::Uniform{0.2}, Grid1D(50, p.L));
    EXPECT_THROW(simulate_stefan(single_phase(f, 0.0, 50), p, 1.0, {}), ValidationError);
}
