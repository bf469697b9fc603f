/**
 * @file presets.hpp
 * @brief Named run configurations for the benchmark experiments.
 *
 * The original initial data are unknown, so every preset uses a documented
 * datum of its own. Expected to match: plateau edge values,
 * plateau counts, event ordering. Not expected to match: exact event times.
 */
#pragma once

#include "motility/config.hpp"

#include <map>
#include <string>
#include <vector>

namespace motility {

struct Preset {
    std::string name;
    std::string description;
    RunConfig config;
};

namespace detail {

inline RunConfig bell_benchmark(std::string name, std::size_t n, double t_end, std::vector<double> times) {
    RunConfig c;
    c.name = std::move(name);
    c.solver = SolverKind::Continuum;
    c.n = n;
    c.initial = ic::Bell{4.0, 1.0, 0.15, 0.1};
    c.t_end = t_end;
    c.snapshot_times = std::move(times);
    c.output = "out/" + c.name;
    return c;
}

inline const std::vector<double> kFig4Times{0.0, 1.0911, 1.1356, 2.0, 8.6778, 9.344};

}  // namespace detail

inline std::vector<Preset> presets() {
    std::vector<Preset> out;
    out.push_back({"fig2", "bell datum, n=400: oscillations, plateau with edges near (0.055, 0.99)",
                   detail::bell_benchmark("fig2", 400, 7.0, {0.0, 1.3, 1.38, 1.8, 6.0, 7.0})});
    out.push_back({"fig3", "bell datum, n=800: edges closer to (0.055, 0.99), onset at a lower density",
                   detail::bell_benchmark("fig3", 800, 7.6, {0.0, 1.1675, 1.255, 1.805, 7.2, 7.6})});
    out.push_back({"fig4", "bell datum, n=1200: finest direct run",
                   detail::bell_benchmark("fig4", 1200, 9.344, detail::kFig4Times)});
    {
        RunConfig c;
        c.name = "fig5";
        c.n = 400;
        c.initial = ic::Plateaus{0.055, {{3.0, 1.2, 0.99}, {6.0, 0.3, 0.99}}};
        c.t_end = 18.0;
        c.snapshot_times = {0.0, 8.0, 13.0, 18.0};
        c.output = "out/fig5";
        out.push_back({"fig5", "one large and one small plateau: the narrow one is absorbed (coarsening)", c});
    }
    {
        RunConfig c;
        c.name = "fig6";
        c.n = 400;
        c.initial = ic::Bell{4.0, 2.0, 0.02, 0.09};
        c.t_end = 12.0;
        c.snapshot_times = {0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0};
        c.output = "out/fig6";
        out.push_back({"fig6", "low-density bump: slow aggregation staying below the unstable interval", c});
    }
    {
        RunConfig c;
        c.name = "fig7";
        c.n = 400;
        c.initial = ic::Plateaus{0.02, {{4.0, 0.2, 0.99}}};
        c.t_end = 1.1111;
        c.snapshot_times = {0.0, 0.2222, 0.6667, 1.1111};
        c.output = "out/fig7";
        out.push_back({"fig7", "spike on a flat background with small mean: the aggregate persists", c});
    }
    {
        RunConfig c = detail::bell_benchmark("fig8", 1200, 9.344, {1.0911, 1.1356, 2.0, 8.6778, 9.344});
        c.solver = SolverKind::Stefan;
        out.push_back({"fig8", "bell datum continued as a three-phase Stefan problem after the hit", c});
    }
    {
        RunConfig c = detail::bell_benchmark("fig9", 1200, 9.344, {1.0911, 1.1356, 2.0, 8.6778, 9.344});
        c.solver = SolverKind::Stefan;
        c.stefan.compare_direct = true;
        out.push_back({"fig9", "Stefan continuation overlaid on the direct n=1200 run", c});
    }
    return out;
}

inline RunConfig preset_config(const std::string& name) {
    for (auto& p : presets()) {
        if (p.name == name) return p.config;
    }
    throw ValidationError("preset: unknown name '" + name + "'");
}

}  // namespace motility
