/**
 * @file test_model.cpp
 * @brief Coefficients, primitives, unstable interval, dispersion relation and
 *        region map.
 */
#include "motility/model.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace motility;

namespace {

ModelParams params(double alpha, double chi0, double L = 8.0) {
    ModelParams p;
    p.alpha = alpha;
    p.chi0 = chi0;
    p.L = L;
    p.jump_low = 0.01;
    p.jump_high = 0.999;
    return p;
}

}  // namespace

TEST(Coefficients, DiffusivityEndpointsAndMinimum) {
    for (double a : {0.0, 0.3, 0.75, 0.95, 1.0}) {
        const auto p = params(a, 1.0);
        EXPECT_NEAR(diffusivity(0.0, p), 1.0, 1e-14);
        EXPECT_NEAR(diffusivity(1.0, p), 1.0 - a, 1e-14);
        EXPECT_NEAR(diffusivity(2.0 / 3.0, p), 1.0 - 4.0 * a / 3.0, 1e-14);
        for (double r = 0.0; r <= 1.0; r += 0.01) EXPECT_GE(diffusivity(r, p), diffusivity(2.0 / 3.0, p) - 1e-14);
    }
}

TEST(Coefficients, SensitivityVanishesAtFullPacking) {
    const auto p = params(0.6, 7.0);
    EXPECT_DOUBLE_EQ(chemotactic_sensitivity(1.0, p), 0.0);
    EXPECT_DOUBLE_EQ(chemotactic_sensitivity(0.0, p), 7.0);
    EXPECT_NEAR(chemotactic_sensitivity(0.5, p), 7.0 * 0.5 * 0.7, 1e-14);
}

TEST(Coefficients, RejectsDensitiesOutsideUnitInterval) {
    const auto p = params(0.5, 1.0);
    EXPECT_THROW(diffusivity(-0.1, p), DomainError);
    EXPECT_THROW(chemotactic_sensitivity(1.2, p), DomainError);
}

TEST(Primitives, KDerivativeIsDiffusivity) {
    for (double a : {0.0, 0.5, 0.95}) {
        const auto p = params(a, 2.0);
        for (double r = 0.05; r < 0.96; r += 0.05) {
            const double h = 1e-5;
            const double fd = (primitive_K(r + h, p) - primitive_K(r - h, p)) / (2.0 * h);
            EXPECT_NEAR(fd, diffusivity(r, p), 1e-9) << "alpha=" << a << " rho=" << r;
        }
    }
}

TEST(Primitives, GMatchesLogitWithoutAdhesion) {
    const auto p = params(0.0, 1.0);
    for (double r : {1e-6, 0.01, 0.2, 0.5, 0.77, 0.999, 1.0 - 1e-7}) {
        EXPECT_NEAR(primitive_G(r, p), std::log(r / (1.0 - r)), 1e-11) << r;
    }
}

TEST(Primitives, GMatchesIndependentQuadrature) {
    boost::math::quadrature::tanh_sinh<double> ts;
    for (const auto& p : {params(0.5, 12.0), params(0.95, 16.0), params(0.3, 2.0)}) {
        for (double r : {0.03, 0.2, 0.45, 0.62, 0.8, 0.97}) {
            auto f = [&](double u) { return diffusivity(u, p) / (chemotactic_sensitivity(u, p) * u); };
            const double lo = std::min(0.5, r), hi = std::max(0.5, r);
            const double ref = (r < 0.5 ? -1.0 : 1.0) * ts.integrate(f, lo, hi);
            EXPECT_NEAR(primitive_G(r, p), ref, 1e-11 * std::max(1.0, std::abs(ref))) << r;
        }
    }
}

TEST(Primitives, GSingularEndsAndZeroChemotaxis) {
    const auto p = params(0.5, 1.0);
    EXPECT_THROW(primitive_G(0.0, p), SingularEndpointError);
    EXPECT_THROW(primitive_G(1.0, p), SingularEndpointError);
    EXPECT_THROW(primitive_G(0.5, params(0.5, 0.0)), DomainError);
    EXPECT_DOUBLE_EQ(primitive_G(0.5, p), 0.0);
}

TEST(UnstableInterval, KnownValues) {
    const auto I = unstable_interval(params(0.95, 16.0));
    ASSERT_TRUE(I);
    EXPECT_NEAR(I->lo, 0.361, 1e-3);
    EXPECT_NEAR(I->hi, 0.973, 1e-3);
    ModelParams one = params(1.0, 1.0);
    const auto J = unstable_interval(one);
    ASSERT_TRUE(J);
    EXPECT_NEAR(J->lo, 1.0 / 3.0, 1e-12);
    EXPECT_NEAR(J->hi, 1.0, 1e-12);
    EXPECT_FALSE(unstable_interval(params(0.75, 1.0)));
    EXPECT_FALSE(unstable_interval(params(0.2, 1.0)));
}

TEST(UnstableInterval, EndsAreRootsOfDiffusivity) {
    for (double a = 0.76; a <= 1.0; a += 0.02) {
        const auto p = params(a, 1.0);
        const auto I = unstable_interval(p);
        ASSERT_TRUE(I);
        EXPECT_NEAR(diffusivity(I->lo, p), 0.0, 1e-13);
        EXPECT_NEAR(diffusivity(I->hi, p), 0.0, 1e-13);
        EXPECT_LT(diffusivity(0.5 * (I->lo + I->hi), p), 0.0);
    }
}

TEST(Validation, RejectsOutOfRangeParameters) {
    ModelParams p;
    p.alpha = 1.5;
    EXPECT_THROW(validate(p), ValidationError);
    p = ModelParams{};
    p.L = 0.0;
    EXPECT_THROW(validate(p), ValidationError);
    p = ModelParams{};
    p.jump_low = 0.4;  // inside the unstable interval at alpha = 0.95
    EXPECT_THROW(validate(p), ValidationError);
    EXPECT_NO_THROW(validate(ModelParams{}));
}

TEST(Dispersion, ZeroModeIsNeutral) {
    EXPECT_DOUBLE_EQ(dispersion_rate(0.0, 0.3, params(0.5, 5.0)), 0.0);
}

TEST(Dispersion, DominantModeIsArgmaxOfFineScan) {
    for (const auto& [a, chi, rb] : {std::tuple{0.5, 12.0, 0.5}, std::tuple{0.0, 10.0, 0.3}, std::tuple{0.7, 8.0, 0.2}}) {
        const auto p = params(a, chi);
        double best_k = 0.0, best = -1e300;
        for (double k = 0.0; k <= 20.0; k += 1e-4) {
            const double v = dispersion_rate(k, rb, p);
            if (v > best) {
                best = v;
                best_k = k;
            }
        }
        EXPECT_NEAR(dominant_wavemode(rb, p) * p.L / std::numbers::pi, best_k, 2e-4) << a << " " << chi;
    }
}

TEST(Dispersion, NoUnstableModeBelowThreshold) {
    EXPECT_THROW(dominant_wavemode(0.3, params(0.5, 1.0)), NoUnstableModeError);
    EXPECT_THROW(dominant_wavemode(0.6, params(0.95, 1.0)), DomainError);
}

TEST(RegionMap, CriticalCurveWithoutAdhesion) {
    EXPECT_NEAR(critical_curve_chi0(0.0), 4.0, 1e-10);
}

TEST(RegionMap, CriticalCurveMatchesBruteForce) {
    for (double a : {0.1, 0.3, 0.5, 0.7}) {
        // Smallest chi0 at which D - chi0 rho (1-rho)(1-alpha rho) touches zero.
        double lo = 0.0, hi = 100.0;
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            double m = 1e300;
            for (int i = 0; i <= 20000; ++i) {
                const double r = i / 20000.0;
                m = std::min(m, 3 * a * (r - 2.0 / 3.0) * (r - 2.0 / 3.0) + 1 - 4 * a / 3 - mid * r * (1 - r) * (1 - a * r));
            }
            (m < 0.0 ? hi : lo) = mid;
        }
        EXPECT_NEAR(critical_curve_chi0(a), 0.5 * (lo + hi), 1e-6) << a;
    }
    EXPECT_THROW(critical_curve_chi0(0.8), DomainError);
}

TEST(RegionMap, Classification) {
    EXPECT_EQ(classify_region(0.95, 16.0), Region::IV);
    EXPECT_EQ(classify_region(0.5, 1.0), Region::I);
    EXPECT_EQ(classify_region(0.5, 1.9), Region::II);
    EXPECT_EQ(classify_region(0.5, 3.0), Region::III);
    EXPECT_EQ(classify_region(0.0, 3.9), Region::I);
    EXPECT_EQ(classify_region(0.0, 4.1), Region::III);
}

TEST(RegionMap, MinFSignTracksCriticalCurve) {
    const double chi = critical_curve_chi0(0.5);
    EXPECT_GT(min_F(params(0.5, chi * 0.999)).value, 0.0);
    EXPECT_LT(min_F(params(0.5, chi * 1.001)).value, 0.0);
}

TEST(RegionMap, MaxFluxFactorMatchesScan) {
    for (double a : {0.0, 0.4, 0.9, 1.0}) {
        double m = 0.0;
        for (int i = 0; i <= 100000; ++i) {
            const double r = i / 100000.0;
            m = std::max(m, r * (1 - r) * (1 - a * r));
        }
        EXPECT_NEAR(max_flux_factor(a), m, 1e-9) << a;
    }
}
