/**
 * @file plateau.hpp
 * @brief Shape analysis of sampled densities: sharp plateau edges across the
 *        unstable interval, plateau counts, and grid-scale oscillations.
 */
#pragma once

#include "motility/model.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace motility {

struct PlateauEdge {
    double x;           ///< crossing of the interval midpoint, linearly interpolated
    double left_value;  ///< median of the flat values on the left
    double right_value;
    std::size_t left_node;   ///< last node on the left side of the transition
    std::size_t right_node;  ///< first node on the right side
    [[nodiscard]] bool rising() const { return right_value > left_value; }
};

namespace detail {

inline double median_of(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    const std::size_t m = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m), v.end());
    if (v.size() % 2 == 1) return v[m];
    const double hi = v[m];
    return 0.5 * (hi + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m)));
}

}  // namespace detail

inline constexpr std::size_t kMaxEdgeWidth = 5;
inline constexpr std::size_t kEdgeSampleNodes = 10;

/// Monotone transitions from below rho_flat to above rho_sharp (or back)
/// completed within kMaxEdgeWidth nodes.
inline std::vector<PlateauEdge> detect_plateau_edges(std::span<const double> rho, double h,
                                                     const ModelParams& p) {
    std::vector<PlateauEdge> edges;
    const auto interval = unstable_interval(p);
    if (!interval) return edges;
    const double lo = interval->lo, hi = interval->hi, mid = 0.5 * (lo + hi);
    const std::size_t n = rho.size();
    auto side = [&](double v) { return v <= lo ? -1 : (v >= hi ? 1 : 0); };

    std::size_t i = 0;
    while (i + 1 < n) {
        const int s0 = side(rho[i]);
        if (s0 == 0) {
            ++i;
            continue;
        }
        // Walk through the unstable interval monotonically.
        std::size_t j = i + 1;
        bool monotone = true;
        while (j < n && side(rho[j]) == 0 && j - i <= kMaxEdgeWidth) {
            if ((rho[j] - rho[j - 1]) * (-s0) <= 0.0) monotone = false;
            ++j;
        }
        if (j < n && side(rho[j]) == -s0 && j - i <= kMaxEdgeWidth && monotone &&
            (rho[j] - rho[j - 1]) * (-s0) > 0.0) {
            PlateauEdge e{};
            e.left_node = i;
            e.right_node = j;
            std::size_t k = i;
            while (k < j && (rho[k + 1] - mid) * (rho[k] - mid) > 0.0) ++k;
            const double t = (mid - rho[k]) / (rho[k + 1] - rho[k]);
            e.x = h * (static_cast<double>(k) + t);
            std::vector<double> left, right;
            for (std::size_t m = 0; m < kEdgeSampleNodes && m <= i; ++m) {
                if (side(rho[i - m]) != s0) break;
                left.push_back(rho[i - m]);
            }
            for (std::size_t m = 0; m < kEdgeSampleNodes && j + m < n; ++m) {
                if (side(rho[j + m]) != -s0) break;
                right.push_back(rho[j + m]);
            }
            e.left_value = detail::median_of(std::move(left));
            e.right_value = detail::median_of(std::move(right));
            edges.push_back(e);
            i = j;
            continue;
        }
        ++i;
    }
    return edges;
}

/// Maximal runs of nodes above rho_sharp with at least `min_nodes` nodes.
inline std::size_t count_plateaus(std::span<const double> rho, const ModelParams& p,
                                  std::size_t min_nodes = 3) {
    const auto interval = unstable_interval(p);
    if (!interval) return 0;
    std::size_t count = 0, run = 0;
    for (double v : rho) {
        if (v >= interval->hi) {
            ++run;
        } else {
            if (run >= min_nodes) ++count;
            run = 0;
        }
    }
    if (run >= min_nodes) ++count;
    return count;
}

/// Count of grid-scale local extrema: sign flips of significant first
/// differences whose monotone runs on both sides are at most `max_run` nodes.
inline std::size_t grid_scale_extrema(std::span<const double> rho, double tol = 1e-6,
                                      std::size_t max_run = 6) {
    struct Run {
        int sign;
        std::size_t length;
    };
    std::vector<Run> runs;
    for (std::size_t i = 0; i + 1 < rho.size(); ++i) {
        const double d = rho[i + 1] - rho[i];
        if (std::abs(d) <= tol) continue;
        const int s = d > 0.0 ? 1 : -1;
        if (!runs.empty() && runs.back().sign == s) {
            ++runs.back().length;
        } else {
            runs.push_back({s, 1});
        }
    }
    std::size_t count = 0;
    for (std::size_t r = 1; r < runs.size(); ++r) {
        if (runs[r - 1].length <= max_run && runs[r].length <= max_run) ++count;
    }
    return count;
}

/// Oscillations are declared once at least two grid-scale extrema coexist.
inline bool has_grid_oscillations(std::span<const double> rho, double tol = 1e-6) {
    return grid_scale_extrema(rho, tol) >= 2;
}

}  // namespace motility
