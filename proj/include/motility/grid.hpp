/**
 * @file grid.hpp
 * @brief Node-centred uniform 1-d grid on [0, L] and sampled fields.
 */
#pragma once

#include "motility/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

namespace motility {

class Grid1D {
public:
    Grid1D(std::size_t n, double length) : n_(n), length_(length) {
        if (n < 3) throw ValidationError("grid needs at least 3 nodes");
        if (!(length > 0.0)) throw ValidationError("grid length must be positive");
        h_ = length / static_cast<double>(n - 1);
    }

    [[nodiscard]] std::size_t size() const { return n_; }
    [[nodiscard]] double spacing() const { return h_; }
    [[nodiscard]] double length() const { return length_; }
    [[nodiscard]] double x(std::size_t i) const {
        return i + 1 == n_ ? length_ : static_cast<double>(i) * h_;
    }
    [[nodiscard]] std::vector<double> nodes() const {
        std::vector<double> xs(n_);
        for (std::size_t i = 0; i < n_; ++i) xs[i] = x(i);
        return xs;
    }

    bool operator==(const Grid1D& o) const { return n_ == o.n_ && length_ == o.length_; }

private:
    std::size_t n_;
    double length_;
    double h_;
};

/// Values sampled on the nodes of a Grid1D.
struct Field {
    Grid1D grid;
    std::vector<double> values;

    explicit Field(Grid1D g) : grid(g), values(g.size(), 0.0) {}
    Field(Grid1D g, std::vector<double> v) : grid(g), values(std::move(v)) {
        if (values.size() != grid.size()) throw ValidationError("field length does not match grid");
    }

    [[nodiscard]] std::size_t size() const { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }

    [[nodiscard]] bool finite() const {
        return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
    }
    [[nodiscard]] double min() const { return *std::min_element(values.begin(), values.end()); }
    [[nodiscard]] double max() const { return *std::max_element(values.begin(), values.end()); }
};

/// h * sum(values): the mass carried by lattice sites.
inline double site_mass(std::span<const double> v, double h) {
    return h * std::accumulate(v.begin(), v.end(), 0.0);
}

inline double trapezoid(std::span<const double> v, double h) {
    if (v.size() < 2) return 0.0;
    double s = 0.5 * (v.front() + v.back());
    for (std::size_t i = 1; i + 1 < v.size(); ++i) s += v[i];
    return h * s;
}

/// Piecewise-linear interpolation of (xs, ys) at x; xs increasing, clamped at the ends.
inline double interp_linear(std::span<const double> xs, std::span<const double> ys, double x) {
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t j = static_cast<std::size_t>(it - xs.begin());
    const double t = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
    return ys[j - 1] + t * (ys[j] - ys[j - 1]);
}

/// Same, on a uniform grid with spacing h starting at 0.
inline double interp_uniform(std::span<const double> ys, double h, double x) {
    const double pos = x / h;
    if (pos <= 0.0) return ys.front();
    const auto last = static_cast<double>(ys.size() - 1);
    if (pos >= last) return ys.back();
    const auto j = static_cast<std::size_t>(pos);
    const double t = pos - static_cast<double>(j);
    return ys[j] + t * (ys[j + 1] - ys[j]);
}

}  // namespace motility
