/**
 * @file initial.hpp
 * @brief Initial density profiles.
 */
#pragma once

#include "motility/errors.hpp"
#include "motility/grid.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

namespace motility {

namespace ic {

struct Uniform {
    double value = 0.1;
};

/// baseline + amplitude * exp(-((x - center)/width)^2)
struct Bell {
    double center = 4.0;
    double width = 1.0;
    double amplitude = 0.2;
    double baseline = 0.1;
};

/// mean + amplitude * cos(k pi x / L)
struct Cosine {
    double mean = 0.5;
    double amplitude = 1e-3;
    double k = 1.0;
};

struct Plateau {
    double center;
    double width;
    double height;
};

/// Sharp-edged plateaus on a flat background (covers the two-plateau and
/// spike-on-flat data).
struct Plateaus {
    double baseline = 0.055;
    std::vector<Plateau> plateaus;
};

struct Samples {
    std::vector<double> values;
};

}  // namespace ic

using InitialCondition = std::variant<ic::Uniform, ic::Bell, ic::Cosine, ic::Plateaus, ic::Samples>;

inline std::string kind_name(const InitialCondition& ic) {
    struct {
        std::string operator()(const ic::Uniform&) const { return "uniform"; }
        std::string operator()(const ic::Bell&) const { return "bell"; }
        std::string operator()(const ic::Cosine&) const { return "cosine"; }
        std::string operator()(const ic::Plateaus& p) const {
            return p.plateaus.size() == 1 ? "spike_on_flat" : "plateaus";
        }
        std::string operator()(const ic::Samples&) const { return "samples"; }
    } v;
    return std::visit(v, ic);
}

inline Field make_initial(const InitialCondition& cond, const Grid1D& grid) {
    Field f(grid);
    const double L = grid.length();
    const std::size_t n = grid.size();
    if (const auto* u = std::get_if<ic::Uniform>(&cond)) {
        for (auto& v : f.values) v = u->value;
    } else if (const auto* b = std::get_if<ic::Bell>(&cond)) {
        for (std::size_t i = 0; i < n; ++i) {
            const double z = (grid.x(i) - b->center) / b->width;
            f[i] = b->baseline + b->amplitude * std::exp(-z * z);
        }
    } else if (const auto* c = std::get_if<ic::Cosine>(&cond)) {
        for (std::size_t i = 0; i < n; ++i) {
            f[i] = c->mean + c->amplitude * std::cos(c->k * std::numbers::pi * grid.x(i) / L);
        }
    } else if (const auto* pl = std::get_if<ic::Plateaus>(&cond)) {
        for (std::size_t i = 0; i < n; ++i) {
            double v = pl->baseline;
            for (const auto& q : pl->plateaus) {
                if (std::abs(grid.x(i) - q.center) <= 0.5 * q.width) v = q.height;
            }
            f[i] = v;
        }
    } else if (const auto* s = std::get_if<ic::Samples>(&cond)) {
        if (s->values.size() == n) {
            f.values = s->values;
        } else if (s->values.size() >= 3) {
            // Resample onto the requested grid.
            const Grid1D src(s->values.size(), L);
            for (std::size_t i = 0; i < n; ++i) f[i] = interp_uniform(s->values, src.spacing(), grid.x(i));
        } else {
            throw ValidationError("initial.values needs at least 3 samples");
        }
    }
    if (!f.finite() || f.min() < 0.0 || f.max() > 1.0) {
        throw ValidationError("initial condition generates densities outside [0,1]");
    }
    return f;
}

}  // namespace motility
